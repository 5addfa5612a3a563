#include "mmslu/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "mmslu/error.hpp"
#include "mmslu/labels.hpp"

namespace mmslu {

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return sum;
}

std::size_t ConfusionMatrix::row_sum(std::size_t gold) const {
  return std::accumulate(counts.at(gold).begin(), counts.at(gold).end(), std::size_t{0});
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += row.at(predicted);
  return sum;
}

const ClassMetrics* Metrics::find(std::string_view label) const {
  for (const auto& c : per_class) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

std::string to_string(SlotMode mode) { return mode == SlotMode::Token ? "token" : "span"; }

SlotMode parse_slot_mode(std::string_view text) {
  if (text == "token") return SlotMode::Token;
  if (text == "span") return SlotMode::Span;
  throw ConfigError("unknown slot mode '" + std::string(text) + "' (expected token or span)");
}

namespace {

// Each reported rate is one integer division, so it is the correctly rounded
// value of the exact fraction. F1 = 2TP / (gold + predicted).
double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct Counts {
  std::size_t tp = 0, gold = 0, predicted = 0;
};

Metrics summarize(const std::vector<std::string>& labels, const std::vector<Counts>& counts) {
  Metrics m;
  std::size_t tp = 0, gold = 0, predicted = 0;
  double macro_sum = 0.0, weighted_sum = 0.0;
  std::size_t macro_classes = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const Counts& c = counts[k];
    ClassMetrics cm;
    cm.label = labels[k];
    cm.true_positives = c.tp;
    cm.support = c.gold;
    cm.predicted = c.predicted;
    cm.precision = ratio(c.tp, c.predicted);
    cm.recall = ratio(c.tp, c.gold);
    cm.f1 = ratio(2 * c.tp, c.gold + c.predicted);
    if (c.gold > 0 || c.predicted > 0) {
      macro_sum += cm.f1;
      ++macro_classes;
    }
    weighted_sum += cm.f1 * static_cast<double>(c.gold);
    tp += c.tp;
    gold += c.gold;
    predicted += c.predicted;
    m.per_class.push_back(std::move(cm));
  }
  m.micro_precision = ratio(tp, predicted);
  m.micro_recall = ratio(tp, gold);
  m.micro_f1 = ratio(2 * tp, gold + predicted);
  m.macro_f1 = macro_classes == 0 ? 0.0 : macro_sum / static_cast<double>(macro_classes);
  m.weighted_f1 = gold == 0 ? 0.0 : weighted_sum / static_cast<double>(gold);
  return m;
}

std::vector<std::string> label_order(std::span<const std::string> declared,
                                     const std::set<std::string>& seen) {
  std::vector<std::string> labels(declared.begin(), declared.end());
  std::set<std::string> listed(labels.begin(), labels.end());
  if (listed.size() != labels.size()) throw InvalidArgument("duplicate label in metric label list");
  for (const auto& s : seen) {
    if (!listed.contains(s)) labels.push_back(s);
  }
  return labels;
}

}  // namespace

IntentReport intent_metrics(std::span<const std::string> gold, std::span<const std::string> pred,
                            std::span<const std::string> labels) {
  if (gold.size() != pred.size()) {
    throw ShapeError("intent_metrics: " + std::to_string(gold.size()) + " gold labels but " +
                     std::to_string(pred.size()) + " predictions");
  }
  if (gold.empty()) throw EmptyInputError("intent_metrics: nothing to score");
  std::set<std::string> seen(gold.begin(), gold.end());
  seen.insert(pred.begin(), pred.end());
  IntentReport report;
  report.confusion.labels = label_order(labels, seen);
  const auto& order = report.confusion.labels;
  std::map<std::string_view, std::size_t> index;
  for (std::size_t k = 0; k < order.size(); ++k) index.emplace(order[k], k);
  report.confusion.counts.assign(order.size(), std::vector<std::size_t>(order.size(), 0));
  std::vector<Counts> counts(order.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::size_t g = index.at(gold[i]);
    const std::size_t p = index.at(pred[i]);
    ++report.confusion.counts[g][p];
    ++counts[g].gold;
    ++counts[p].predicted;
    if (g == p) {
      ++counts[g].tp;
      ++correct;
    }
  }
  report.metrics = summarize(order, counts);
  report.metrics.accuracy = ratio(correct, gold.size());
  report.metrics.scored = gold.size();
  return report;
}

std::vector<SlotSpan> extract_spans(std::span<const std::string> tags) {
  std::vector<SlotSpan> spans;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] == kOutsideTag) continue;
    if (!spans.empty() && spans.back().end + 1 == t && spans.back().label == tags[t]) {
      spans.back().end = t;
    } else {
      spans.push_back({t, t, tags[t]});
    }
  }
  return spans;
}

Metrics slot_metrics(std::span<const std::vector<std::string>> gold,
                     std::span<const std::vector<std::string>> pred, SlotMode mode,
                     std::span<const std::string> ids) {
  if (gold.size() != pred.size()) {
    throw ShapeError("slot_metrics: " + std::to_string(gold.size()) + " gold sequences but " +
                     std::to_string(pred.size()) + " predicted");
  }
  std::set<std::string> seen;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    if (gold[u].size() != pred[u].size()) {
      const std::string name = u < ids.size() ? ids[u] : "#" + std::to_string(u);
      throw ShapeError("slot_metrics: utterance '" + name + "' has " +
                       std::to_string(gold[u].size()) + " gold tags but " +
                       std::to_string(pred[u].size()) + " predicted");
    }
    for (const auto& t : gold[u]) if (t != kOutsideTag) seen.insert(t);
    for (const auto& t : pred[u]) if (t != kOutsideTag) seen.insert(t);
  }
  const std::vector<std::string> labels(seen.begin(), seen.end());
  std::map<std::string_view, std::size_t> index;
  for (std::size_t k = 0; k < labels.size(); ++k) index.emplace(labels[k], k);
  std::vector<Counts> counts(labels.size());
  std::size_t scored = 0;

  for (std::size_t u = 0; u < gold.size(); ++u) {
    if (mode == SlotMode::Token) {
      for (std::size_t t = 0; t < gold[u].size(); ++t) {
        const auto& g = gold[u][t];
        const auto& p = pred[u][t];
        if (g == kOutsideTag && p == kOutsideTag) continue;
        ++scored;
        if (g != kOutsideTag) ++counts[index.at(g)].gold;
        if (p != kOutsideTag) ++counts[index.at(p)].predicted;
        if (g == p) ++counts[index.at(g)].tp;
      }
    } else {
      const auto gs = extract_spans(gold[u]);
      const auto ps = extract_spans(pred[u]);
      const std::set<SlotSpan> gold_set(gs.begin(), gs.end());
      for (const auto& s : gs) ++counts[index.at(s.label)].gold;
      for (const auto& s : ps) {
        ++counts[index.at(s.label)].predicted;
        if (gold_set.contains(s)) ++counts[index.at(s.label)].tp;
      }
      scored += gs.size() + ps.size();
    }
  }
  Metrics m = summarize(labels, counts);
  m.scored = scored;
  return m;
}

nlohmann::ordered_json to_json(const Metrics& metrics) {
  nlohmann::ordered_json j;
  j["micro_f1"] = metrics.micro_f1;
  j["macro_f1"] = metrics.macro_f1;
  j["weighted_f1"] = metrics.weighted_f1;
  j["micro_precision"] = metrics.micro_precision;
  j["micro_recall"] = metrics.micro_recall;
  if (metrics.accuracy) j["accuracy"] = *metrics.accuracy;
  j["scored"] = metrics.scored;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : metrics.per_class) {
    classes.push_back({{"label", c.label},
                       {"precision", c.precision},
                       {"recall", c.recall},
                       {"f1", c.f1},
                       {"support", c.support},
                       {"predicted", c.predicted}});
  }
  j["per_class"] = std::move(classes);
  return j;
}

nlohmann::ordered_json to_json(const ConfusionMatrix& confusion) {
  return {{"labels", confusion.labels}, {"counts", confusion.counts}};
}

AblationReport ablation_report(std::span<const AblationRun> runs) {
  if (runs.empty()) throw InvalidArgument("ablation_report needs at least one run");
  AblationReport report;
  std::size_t name_width = std::string("config").size();
  for (const auto& r : runs) name_width = std::max(name_width, r.name.size());

  const auto pad = [](std::string s, std::size_t width) {
    s.resize(std::max(width, s.size()), ' ');
    return s;
  };
  const auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%10.4f", v);
    return std::string(buf);
  };
  std::string& out = report.table;
  out += pad("config", name_width) + "  " + "  micro_f1" + "  " + "  macro_f1" + "  " +
         "weighted_f1" + "\n";
  out += std::string(name_width, '-') + "  ----------  ----------  -----------\n";
  std::vector<std::string> notes;
  for (const auto& r : runs) {
    nlohmann::ordered_json row;
    row["config"] = r.name;
    if (r.metrics) {
      row["status"] = "ok";
      const auto fields = to_json(*r.metrics);
      for (const auto& [key, value] : fields.items()) row[key] = value;
      out += pad(r.name, name_width) + "  " + cell(r.metrics->micro_f1) + "  " +
             cell(r.metrics->macro_f1) + "  " + " " + cell(r.metrics->weighted_f1) + "\n";
    } else {
      row["status"] = "failed";
      row["error"] = r.error;
      notes.push_back(r.name + ": " + r.error);
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& note : notes) out += "FAILED " + note + "\n";
  return report;
}

}  // namespace mmslu
