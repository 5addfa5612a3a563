#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmslu {

/// Ordered, duplicate-free set of class labels.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& at(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }
  /// "A, B, C" for error messages.
  std::string joined() const;

  friend bool operator==(const LabelSet& a, const LabelSet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr std::string_view kOutsideTag = "O";
inline constexpr std::string_view kIntentKeywordTag = "IntentKeyword";

/// O, IntentKeyword, Location, PositionDirection, Person, TimeGuidance,
/// GestureGaze, Object. "O" is always index 0.
LabelSet default_tag_set();

/// SetDestination, SetRoute, Park, PullOver, Stop, GoFaster, GoSlower,
/// OpenDoor, Other.
LabelSet default_intent_set();

/// Tag sets must start with "O".
LabelSet make_tag_set(std::vector<std::string> labels);

}  // namespace mmslu
