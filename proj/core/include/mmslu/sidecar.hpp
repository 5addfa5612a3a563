#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mmslu/matrix.hpp"

namespace mmslu {

/// Utterance id -> feature vector. Ordered so that writing is deterministic.
using FeatureMap = std::map<std::string, Vector>;

/// Per-utterance sidecar: "id<TAB>v1,v2,...,vD" per line. All rows must share
/// one dimension and ids must be unique. An empty file yields an empty map.
FeatureMap read_vector_sidecar(const std::filesystem::path& path);
void write_vector_sidecar(const std::filesystem::path& path, const FeatureMap& features);

struct FrameRow {
  std::string utterance_id;
  std::size_t frame_index = 0;
  Vector values;
};

/// Per-frame sidecar: "id<TAB>frame-index<TAB>v1,...,vD" per line.
std::vector<FrameRow> read_frame_sidecar(const std::filesystem::path& path);
void write_frame_sidecar(const std::filesystem::path& path, const std::vector<FrameRow>& rows);

}  // namespace mmslu
