#include "mmslu/visual.hpp"

#include <algorithm>
#include <map>

#include "mmslu/error.hpp"
#include "mmslu/sidecar.hpp"

namespace mmslu {

std::string to_string(View view) { return view == View::Cabin ? "cabin" : "road"; }

View parse_view(std::string_view text) {
  if (text == "cabin") return View::Cabin;
  if (text == "road") return View::Road;
  throw ConfigError("unknown camera view '" + std::string(text) + "' (expected cabin or road)");
}

std::string to_string(PoolPolicy policy) { return policy == PoolPolicy::Mean ? "mean" : "max"; }

PoolPolicy parse_pool_policy(std::string_view text) {
  if (text == "mean") return PoolPolicy::Mean;
  if (text == "max") return PoolPolicy::Max;
  throw ConfigError("unknown pooling policy '" + std::string(text) + "' (expected mean or max)");
}

std::vector<FrameFeatureSet> load_frame_features(const std::filesystem::path& path, View view) {
  std::map<std::string, std::map<std::size_t, Vector>> grouped;
  for (auto& row : read_frame_sidecar(path)) {
    grouped[row.utterance_id].emplace(row.frame_index, std::move(row.values));
  }
  std::vector<FrameFeatureSet> sets;
  sets.reserve(grouped.size());
  for (auto& [id, frames] : grouped) {
    FrameFeatureSet set;
    set.utterance_id = id;
    set.view = view;
    for (auto& [index, values] : frames) set.frames.push_back(std::move(values));
    sets.push_back(std::move(set));
  }
  return sets;
}

Vector pool_frames(const FrameFeatureSet& set, PoolPolicy policy) {
  if (set.frames.empty()) {
    throw EmptyInputError("no frames to pool for utterance '" + set.utterance_id + "'");
  }
  const std::size_t dim = set.frames.front().size();
  for (const auto& frame : set.frames) {
    if (frame.size() != dim) {
      throw ShapeError("ragged frames for utterance '" + set.utterance_id + "'");
    }
  }
  Vector pooled = set.frames.front();
  for (std::size_t f = 1; f < set.frames.size(); ++f) {
    for (std::size_t k = 0; k < dim; ++k) {
      if (policy == PoolPolicy::Mean) {
        pooled[k] += set.frames[f][k];
      } else {
        pooled[k] = std::max(pooled[k], set.frames[f][k]);
      }
    }
  }
  if (policy == PoolPolicy::Mean) {
    const double count = static_cast<double>(set.frames.size());
    for (double& v : pooled) v /= count;
  }
  return pooled;
}

UtteranceVisuals combine_views(const std::optional<Vector>& cabin, const std::optional<Vector>& road) {
  if (!cabin && !road) throw EmptyInputError("combine_views: neither cabin nor road view present");
  UtteranceVisuals out;
  if (cabin) {
    out.vector.insert(out.vector.end(), cabin->begin(), cabin->end());
    out.has_cabin = true;
  }
  if (road) {
    out.vector.insert(out.vector.end(), road->begin(), road->end());
    out.has_road = true;
  }
  out.dim = out.vector.size();
  return out;
}

}  // namespace mmslu
