#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "mmslu/model.hpp"

namespace mmslu {

inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::ordered_json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Layout: "MMSLUCKP", u32 version, u64 header length, JSON header (model
/// config and tensor shapes), then every tensor as little-endian doubles.
void save_checkpoint(const std::filesystem::path& path, const HJoint2Model& model);

ModelConfig read_checkpoint_config(const std::filesystem::path& path);

/// The embedder must have the spaces recorded in the checkpoint (ConfigError
/// otherwise).
HJoint2Model load_checkpoint(const std::filesystem::path& path,
                             std::shared_ptr<const CompositeEmbedder> embedder);

}  // namespace mmslu
