#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmslu {

/// Rows are gold labels, columns are predictions.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> counts;

  std::size_t total() const;
  std::size_t row_sum(std::size_t gold) const;
  std::size_t column_sum(std::size_t predicted) const;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // gold occurrences
  std::size_t predicted = 0;  // predicted occurrences
  std::size_t true_positives = 0;
};

/// 0/0 is reported as 0 everywhere. Classes with neither support nor
/// predictions keep F1 = 0 but do not enter the macro or weighted averages.
struct Metrics {
  std::vector<ClassMetrics> per_class;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  std::optional<double> accuracy;  // single-label scoring only
  std::size_t scored = 0;

  const ClassMetrics* find(std::string_view label) const;
};

struct IntentReport {
  Metrics metrics;
  ConfusionMatrix confusion;
};

enum class SlotMode { Token, Span };
std::string to_string(SlotMode mode);
SlotMode parse_slot_mode(std::string_view text);

/// `labels` fixes the row order; labels seen in the data but not listed are
/// appended in sorted order.
IntentReport intent_metrics(std::span<const std::string> gold, std::span<const std::string> pred,
                            std::span<const std::string> labels = {});

/// Token mode scores each position where gold or prediction is not O. Span
/// mode scores maximal runs of one non-O label by exact (start, end, label).
/// `ids` names utterances in shape errors and may be empty.
Metrics slot_metrics(std::span<const std::vector<std::string>> gold,
                     std::span<const std::vector<std::string>> pred, SlotMode mode,
                     std::span<const std::string> ids = {});

struct SlotSpan {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // inclusive
  std::string label;
  friend auto operator<=>(const SlotSpan&, const SlotSpan&) = default;
};
std::vector<SlotSpan> extract_spans(std::span<const std::string> tags);

nlohmann::ordered_json to_json(const Metrics& metrics);
nlohmann::ordered_json to_json(const ConfusionMatrix& confusion);

struct AblationRun {
  std::string name;
  std::optional<Metrics> metrics;  // absent when the run failed
  std::string error;
};

struct AblationReport {
  std::string table;                        // aligned text
  std::vector<nlohmann::ordered_json> rows;  // one object per run, input order
};

/// Requires at least one run. Rows keep the input order; micro-F1 is the
/// headline column.
AblationReport ablation_report(std::span<const AblationRun> runs);

}  // namespace mmslu
