#include "mmslu/labels.hpp"

#include "mmslu/error.hpp"

namespace mmslu {

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw ConfigError("empty label in label set");
    if (!index_.emplace(labels_[i], i).second) {
      throw ConfigError("duplicate label '" + labels_[i] + "' in label set");
    }
  }
}

std::optional<std::size_t> LabelSet::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string LabelSet::joined() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i > 0) out += ", ";
    out += labels_[i];
  }
  return out;
}

LabelSet default_tag_set() {
  return LabelSet({"O", "IntentKeyword", "Location", "PositionDirection", "Person", "TimeGuidance",
                   "GestureGaze", "Object"});
}

LabelSet default_intent_set() {
  return LabelSet({"SetDestination", "SetRoute", "Park", "PullOver", "Stop", "GoFaster",
                   "GoSlower", "OpenDoor", "Other"});
}

LabelSet make_tag_set(std::vector<std::string> labels) {
  if (labels.empty() || labels.front() != kOutsideTag) {
    throw ConfigError("tag sets must list \"O\" first");
  }
  return LabelSet(std::move(labels));
}

}  // namespace mmslu
