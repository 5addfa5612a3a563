#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmslu/matrix.hpp"

namespace mmslu {

enum class View { Cabin, Road };

std::string to_string(View view);
View parse_view(std::string_view text);

/// Per-second CNN descriptors for one utterance and one camera view.
struct FrameFeatureSet {
  std::string utterance_id;
  View view = View::Cabin;
  std::vector<Vector> frames;  // ordered by frame index
};

/// Groups a frame sidecar by utterance id (sets ordered by id, frames by
/// frame index). Utterances without frames simply do not appear.
std::vector<FrameFeatureSet> load_frame_features(const std::filesystem::path& path, View view);

enum class PoolPolicy { Mean, Max };

std::string to_string(PoolPolicy policy);
PoolPolicy parse_pool_policy(std::string_view text);

Vector pool_frames(const FrameFeatureSet& set, PoolPolicy policy = PoolPolicy::Mean);

struct UtteranceVisuals {
  Vector vector;
  std::size_t dim = 0;
  bool has_cabin = false;
  bool has_road = false;
};

/// [cabin ; road] with absent views omitted. Both absent is an error.
UtteranceVisuals combine_views(const std::optional<Vector>& cabin, const std::optional<Vector>& road);

}  // namespace mmslu
