#include "mmslu/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "mmslu/error.hpp"
#include "mmslu/random.hpp"
#include "mmslu/text_format.hpp"

namespace mmslu {

using nlohmann::json;
using nlohmann::ordered_json;

void validate_corpus(const Corpus& corpus) {
  std::set<std::string> ids;
  for (const auto& u : corpus.utterances) {
    if (u.id.empty()) throw ValidationError("utterance with an empty id");
    if (!ids.insert(u.id).second) throw ValidationError("duplicate utterance id '" + u.id + "'");
    if (u.tokens.empty()) throw ValidationError("utterance '" + u.id + "' has no tokens");
    if (u.tags.size() != u.tokens.size()) {
      throw ValidationError("utterance '" + u.id + "' has " + std::to_string(u.tokens.size()) +
                            " tokens but " + std::to_string(u.tags.size()) + " tags");
    }
    for (const auto& tag : u.tags) {
      if (!corpus.tags.contains(tag)) {
        throw ValidationError("utterance '" + u.id + "' uses unknown tag '" + tag +
                              "' (allowed: " + corpus.tags.joined() + ")");
      }
    }
    if (u.intent && !corpus.intents.contains(*u.intent)) {
      throw ValidationError("utterance '" + u.id + "' uses unknown intent '" + *u.intent +
                            "' (allowed: " + corpus.intents.joined() + ")");
    }
  }
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.utterances = corpus.size();
  std::vector<std::size_t> intents(corpus.intents.size(), 0), tags(corpus.tags.size(), 0);
  for (const auto& u : corpus.utterances) {
    stats.tokens += u.tokens.size();
    if (u.intent) {
      ++stats.with_intent;
      if (auto i = corpus.intents.find(*u.intent)) ++intents[*i];
    }
    for (const auto& tag : u.tags) {
      if (auto t = corpus.tags.find(tag)) ++tags[*t];
    }
  }
  for (std::size_t i = 0; i < intents.size(); ++i) {
    stats.intent_counts.emplace_back(corpus.intents.at(i), intents[i]);
  }
  for (std::size_t t = 0; t < tags.size(); ++t) stats.tag_counts.emplace_back(corpus.tags.at(t), tags[t]);
  return stats;
}

namespace {

ordered_json nullable(const std::optional<std::string>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

std::optional<std::string> read_nullable(const json& record, const char* key, const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw FormatError(where + ": field '" + key + "' must be a string or null");
  return it->get<std::string>();
}

std::vector<std::string> read_strings(const json& record, const char* key, const std::string& where) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_array()) {
    throw FormatError(where + ": field '" + key + "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : *it) {
    if (!item.is_string()) throw FormatError(where + ": field '" + key + "' must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::string serialize_utterance(const Utterance& u) {
  ordered_json record;
  record["id"] = u.id;
  record["session"] = u.session;
  record["tokens"] = u.tokens;
  record["tags"] = u.tags;
  record["intent"] = nullable(u.intent);
  record["acoustic_ref"] = nullable(u.acoustic_ref);
  record["visual_cabin_ref"] = nullable(u.visual_cabin_ref);
  record["visual_road_ref"] = nullable(u.visual_road_ref);
  return record.dump();
}

Corpus load_corpus(const std::filesystem::path& path, LabelSet tags, LabelSet intents) {
  Corpus corpus;
  corpus.tags = std::move(tags);
  corpus.intents = std::move(intents);
  const auto lines = read_lines(path);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (split_whitespace(lines[ln]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(ln + 1);
    json record;
    try {
      record = json::parse(lines[ln]);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (!record.is_object()) throw FormatError(where + ": expected a JSON object");
    Utterance u;
    auto id = read_nullable(record, "id", where);
    if (!id) throw FormatError(where + ": missing utterance id");
    u.id = *id;
    u.session = read_nullable(record, "session", where).value_or("");
    u.tokens = read_strings(record, "tokens", where);
    u.tags = read_strings(record, "tags", where);
    u.intent = read_nullable(record, "intent", where);
    u.acoustic_ref = read_nullable(record, "acoustic_ref", where);
    u.visual_cabin_ref = read_nullable(record, "visual_cabin_ref", where);
    u.visual_road_ref = read_nullable(record, "visual_road_ref", where);
    corpus.utterances.push_back(std::move(u));
  }
  validate_corpus(corpus);
  return corpus;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& u : corpus.utterances) out << serialize_utterance(u) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> corpus_vocabulary(const Corpus& corpus) {
  std::set<std::string> vocab;
  for (const auto& u : corpus.utterances) vocab.insert(u.tokens.begin(), u.tokens.end());
  return {vocab.begin(), vocab.end()};
}

Corpus subset(const Corpus& corpus, std::span<const std::size_t> indices) {
  Corpus out;
  out.tags = corpus.tags;
  out.intents = corpus.intents;
  out.utterances.reserve(indices.size());
  for (std::size_t i : indices) out.utterances.push_back(corpus.utterances.at(i));
  return out;
}

namespace {

// Index groups per intent class in label order, non-command utterances last.
std::vector<std::vector<std::size_t>> class_groups(const Corpus& corpus) {
  std::vector<std::vector<std::size_t>> groups(corpus.intents.size() + 1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& intent = corpus.utterances[i].intent;
    std::size_t g = corpus.intents.size();
    if (intent) {
      if (auto idx = corpus.intents.find(*intent)) g = *idx;
    }
    groups[g].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<Fold> kfold_split(const Corpus& corpus, std::size_t k, std::uint64_t seed,
                              bool stratified) {
  if (k < 2) throw InvalidArgument("k-fold split requires k >= 2");
  if (k > corpus.size()) {
    throw InvalidArgument("k-fold split with k = " + std::to_string(k) + " exceeds corpus size " +
                          std::to_string(corpus.size()));
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    groups = class_groups(corpus);
  } else {
    groups.emplace_back(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) groups[0][i] = i;
  }
  std::vector<std::size_t> fold_of(corpus.size());
  std::size_t position = 0;
  for (auto& group : groups) {
    rng.shuffle(group);
    for (std::size_t i : group) fold_of[i] = position++ % k;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
    }
  }
  return folds;
}

Fold holdout_split(const Corpus& corpus, double test_fraction, std::uint64_t seed, bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    groups = class_groups(corpus);
  } else {
    groups.emplace_back(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) groups[0][i] = i;
  }
  std::vector<bool> is_test(corpus.size(), false);
  for (auto& group : groups) {
    rng.shuffle(group);
    const auto n_test = static_cast<std::size_t>(
        std::lround(test_fraction * static_cast<double>(group.size())));
    for (std::size_t j = 0; j < n_test && j < group.size(); ++j) is_test[group[j]] = true;
  }
  Fold fold;
  for (std::size_t i = 0; i < corpus.size(); ++i) (is_test[i] ? fold.test : fold.train).push_back(i);
  return fold;
}

std::vector<std::string> to_bio(std::span<const std::string> tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == kOutsideTag) {
      out.emplace_back(kOutsideTag);
    } else if (i > 0 && tags[i - 1] == tags[i]) {
      out.push_back("I-" + tags[i]);
    } else {
      out.push_back("B-" + tags[i]);
    }
  }
  return out;
}

namespace {

std::optional<Vector> resolve(const Utterance& u, const std::optional<std::string>& ref,
                              const FeatureMap& map, MissingFeaturePolicy policy,
                              const char* modality, AttachedFeatures& report) {
  if (ref) {
    if (auto it = map.find(*ref); it != map.end()) return it->second;
  }
  const std::string described =
      u.id + ": " + modality + " '" + (ref ? *ref : std::string("<null>")) + "'";
  if (policy == MissingFeaturePolicy::Strict) {
    throw DataError("missing " + std::string(modality) + " features for utterance '" + u.id +
                    "' (ref '" + (ref ? *ref : std::string("<null>")) + "')");
  }
  if (map.empty()) {
    throw DataError("cannot zero-fill " + std::string(modality) + " for utterance '" + u.id +
                    "': feature map is empty so its dimension is unknown");
  }
  ++report.warnings;
  report.missing.push_back(described);
  return Vector(map.begin()->second.size(), 0.0);
}

}  // namespace

AttachedFeatures attach_features(const Corpus& corpus, const FeatureSources& sources) {
  AttachedFeatures report;
  report.features.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Utterance& u = corpus.utterances[i];
    UtteranceFeatures& f = report.features[i];
    if (sources.acoustic) {
      f.acoustic = resolve(u, u.acoustic_ref, *sources.acoustic, sources.acoustic_policy,
                           "acoustic", report);
    }
    if (sources.visual_cabin) {
      f.visual_cabin = resolve(u, u.visual_cabin_ref, *sources.visual_cabin,
                               sources.visual_policy, "visual_cabin", report);
    }
    if (sources.visual_road) {
      f.visual_road = resolve(u, u.visual_road_ref, *sources.visual_road, sources.visual_policy,
                              "visual_road", report);
    }
  }
  return report;
}

}  // namespace mmslu
