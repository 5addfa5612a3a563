#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmslu/data.hpp"
#include "mmslu/embeddings.hpp"
#include "mmslu/model.hpp"
#include "mmslu/trainer.hpp"
#include "mmslu/visual.hpp"

namespace mmslu::cli {

struct EmbeddingSource {
  std::filesystem::path path;
  std::string name;
  OovPolicy oov = OovPolicy::ZeroFill;
};

struct VisualSource {
  std::filesystem::path path;
  bool pooled = false;  // "id<TAB>csv" instead of per-frame rows
};

/// Feature requested for fusion; the input dimension comes from the sidecar.
struct FusionRequest {
  UtteranceFeature kind = UtteranceFeature::Acoustic;
  std::size_t projection_dim = 128;
};

struct SplitSpec {
  enum class Kind { Holdout, KFold, None };
  Kind kind = Kind::Holdout;
  double test_fraction = 0.2;
  double dev_fraction = 0.1;  // carved out of the training part; 0 = select on train
  std::size_t k = 5;
  std::size_t fold = 0;
  bool stratified = true;
};

struct RunConfig {
  std::string name;
  std::filesystem::path source;  // the config file itself, when loaded from disk
  std::filesystem::path corpus;
  std::vector<std::string> tags;     // empty = default tag set
  std::vector<std::string> intents;  // empty = default intent set
  std::vector<EmbeddingSource> embeddings;
  VocabAlignment alignment = VocabAlignment::Union;
  std::optional<std::filesystem::path> acoustic;
  std::optional<VisualSource> visual_cabin;
  std::optional<VisualSource> visual_road;
  PoolPolicy visual_pool = PoolPolicy::Mean;
  MissingFeaturePolicy acoustic_missing = MissingFeaturePolicy::Strict;
  MissingFeaturePolicy visual_missing = MissingFeaturePolicy::ZeroFill;
  std::vector<FusionRequest> fusion;
  std::size_t hidden_dim = 64;
  bool fine_tune_embeddings = false;
  TrainHyper hyper;
  SplitSpec split;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  LabelSet tag_set() const;
  LabelSet intent_set() const;
};

/// Relative paths resolve against `base_dir`. Unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                           std::string default_name);
RunConfig load_run_config(const std::filesystem::path& path);

/// Checks that every referenced input file exists (ConfigError naming it).
void check_paths(const RunConfig& config);

}  // namespace mmslu::cli
