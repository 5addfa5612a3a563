#include "mmslu/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "mmslu/error.hpp"
#include "mmslu/random.hpp"
#include "mmslu/text_format.hpp"

namespace mmslu {

namespace {

// Template grammar: "*word" is an intent keyword, "{Slot}" draws from the
// slot lexicon, anything else is an O-tagged literal.
struct IntentTemplates {
  std::string intent;
  std::vector<std::string> templates;
};

const std::vector<IntentTemplates>& private_templates() {
  static const std::vector<IntentTemplates> templates = {
      {"SetDestination",
       {"*take {Person} to {Location}", "our *destination is {Location}",
        "please *drive {Person} to {Location}", "i want to *head to {Location}"}},
      {"SetRoute",
       {"*change the *route to {Location}", "*turn {PositionDirection} at the {Object}",
        "*turn {PositionDirection} {TimeGuidance}", "*follow the {Object} {PositionDirection}",
        "*reroute through {Location}"}},
      {"Park",
       {"*park near {Location}", "*park {GestureGaze} please",
        "can you *park {PositionDirection} of the {Object}", "find *parking at {Location}"}},
      {"PullOver",
       {"*pull *over {TimeGuidance}", "*pull *over near the {Object}",
        "please *pull *over {GestureGaze}"}},
      {"Stop", {"*stop {TimeGuidance}", "*stop at the {Object}", "*stop the car {GestureGaze}"}},
      {"GoFaster", {"*speed *up {TimeGuidance}", "can you *drive *faster", "please go *faster"}},
      {"GoSlower",
       {"*slow *down {TimeGuidance}", "*slow *down near the {Object}", "please go *slower"}},
      {"OpenDoor",
       {"*open the *door for {Person}", "*unlock the *door {TimeGuidance}",
        "let {Person} *out {GestureGaze}"}},
      {"Other",
       {"*play some *music", "*turn *on the *radio", "*close the *window please",
        "*lower the *temperature"}},
  };
  return templates;
}

// Templates used only by ambiguous utterances of a pair, so both members of
// the pair produce identical token sequences.
const std::vector<std::string>& shared_templates(std::size_t pair_index) {
  static const std::vector<std::vector<std::string>> templates = {
      {"*halt {PositionDirection}", "*halt near the {Object} {TimeGuidance}",
       "can you *halt by the {Object}"},
      {"*adjust the *speed {TimeGuidance}", "*adjust *speed please", "*change *pace {TimeGuidance}"},
  };
  return templates[pair_index % templates.size()];
}

const std::map<std::string, std::vector<std::string>>& slot_lexicons() {
  static const std::map<std::string, std::vector<std::string>> lexicons = {
      {"Location",
       {"starbucks", "downtown", "home", "airport", "campus", "city hall", "main street",
        "union station", "grand hotel", "library"}},
      {"PositionDirection",
       {"left", "right", "ahead", "behind", "next corner", "second exit", "north", "south"}},
      {"Person", {"me", "us", "my friend", "him", "her", "them"}},
      {"TimeGuidance", {"now", "soon", "immediately", "quickly", "asap", "shortly"}},
      {"GestureGaze", {"this", "that", "those", "here"}},
      {"Object", {"tree", "truck", "sign", "bus", "building", "crosswalk", "hydrant", "van"}},
  };
  return lexicons;
}

struct Tagged {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
  friend bool operator==(const Tagged&, const Tagged&) = default;
  friend auto operator<=>(const Tagged&, const Tagged&) = default;
};

Tagged fill_template(const std::string& pattern, Rng& rng) {
  Tagged out;
  for (std::string_view word : split_whitespace(pattern)) {
    if (word.front() == '{') {
      const std::string slot(word.substr(1, word.size() - 2));
      const auto& options = slot_lexicons().at(slot);
      for (std::string_view piece : split_whitespace(options[rng.index(options.size())])) {
        out.tokens.emplace_back(piece);
        out.tags.push_back(slot);
      }
    } else if (word.front() == '*') {
      out.tokens.emplace_back(word.substr(1));
      out.tags.emplace_back(kIntentKeywordTag);
    } else {
      out.tokens.emplace_back(word);
      out.tags.emplace_back(kOutsideTag);
    }
  }
  return out;
}

std::vector<std::string> grammar_vocabulary() {
  std::set<std::string> vocab;
  const auto add_pattern = [&vocab](const std::string& pattern) {
    for (std::string_view word : split_whitespace(pattern)) {
      if (word.front() == '{') continue;
      vocab.emplace(word.front() == '*' ? word.substr(1) : word);
    }
  };
  for (const auto& entry : private_templates()) {
    for (const auto& t : entry.templates) add_pattern(t);
  }
  for (std::size_t p = 0; p < 2; ++p) {
    for (const auto& t : shared_templates(p)) add_pattern(t);
  }
  for (const auto& [slot, options] : slot_lexicons()) {
    for (const auto& option : options) {
      for (std::string_view piece : split_whitespace(option)) vocab.emplace(piece);
    }
  }
  return {vocab.begin(), vocab.end()};
}

EmbeddingTable random_table(std::string name, std::vector<std::string> tokens, std::size_t dim,
                            Rng& rng) {
  Matrix matrix(tokens.size(), dim);
  for (double& v : matrix.values()) v = rng.normal(0.0, 0.5);
  return make_table(std::move(name), std::move(tokens), std::move(matrix));
}

std::string numbered(const char* prefix, std::size_t value, int width) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%s%0*zu", prefix, width, value);
  return buffer;
}

}  // namespace

std::string to_string(IntentDistribution distribution) {
  return distribution == IntentDistribution::Uniform ? "uniform" : "table1-proportional";
}

IntentDistribution parse_intent_distribution(std::string_view text) {
  if (text == "uniform") return IntentDistribution::Uniform;
  if (text == "table1-proportional" || text == "table1") return IntentDistribution::Table1Proportional;
  throw ConfigError("unknown intent distribution '" + std::string(text) +
                    "' (expected uniform or table1-proportional)");
}

const std::vector<std::pair<std::string, std::size_t>>& table1_intent_counts() {
  static const std::vector<std::pair<std::string, std::size_t>> counts = {
      {"SetDestination", 311}, {"SetRoute", 507}, {"Park", 151},
      {"PullOver", 34},        {"Stop", 27},      {"GoFaster", 73},
      {"GoSlower", 41},        {"OpenDoor", 136}, {"Other", 51},
  };
  return counts;
}

std::vector<std::size_t> apportion_intents(std::size_t n, IntentDistribution distribution) {
  const auto& table = table1_intent_counts();
  std::vector<double> weights;
  for (const auto& [name, count] : table) {
    weights.push_back(distribution == IntentDistribution::Uniform ? 1.0 : static_cast<double>(count));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(n) * weights[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  // Largest remainder first; ties go to the earlier label.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k].second];
  return counts;
}

std::map<std::string, std::vector<std::size_t>> GeneratorConfig::resolved_signal_dims() const {
  if (!signal_dims.empty()) return signal_dims;
  const LabelSet intents = default_intent_set();
  const std::size_t block = acoustic_dim / intents.size();
  if (block == 0) {
    throw ConfigError("acoustic_dim " + std::to_string(acoustic_dim) +
                      " is too small to give every intent a signal dimension");
  }
  std::map<std::string, std::vector<std::size_t>> dims;
  for (std::size_t i = 0; i < intents.size(); ++i) {
    for (std::size_t k = 0; k < block; ++k) dims[intents.at(i)].push_back(i * block + k);
  }
  return dims;
}

void GeneratorConfig::validate() const {
  if (n_utterances == 0) throw ConfigError("n_utterances must be positive");
  if (!(ambiguous_fraction >= 0.0 && ambiguous_fraction <= 1.0)) {
    throw ConfigError("ambiguous_fraction must lie in [0, 1], got " + format_real(ambiguous_fraction));
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be nonnegative");
  if (acoustic_dim == 0 || visual_dim == 0 || embedding_dim == 0 || max_frames == 0) {
    throw ConfigError("acoustic_dim, visual_dim, embedding_dim and max_frames must be positive");
  }
  if (!(speech_coverage >= 0.0 && speech_coverage <= 1.0)) {
    throw ConfigError("speech_coverage must lie in [0, 1]");
  }
  if (shared_instances == 0) throw ConfigError("shared_instances must be positive");
  const LabelSet intents = default_intent_set();
  std::set<std::string> in_pairs;
  for (const auto& [a, b] : ambiguous_pairs) {
    if (!intents.contains(a) || !intents.contains(b) || a == b) {
      throw ConfigError("invalid ambiguous pair (" + a + ", " + b + ")");
    }
    if (!in_pairs.insert(a).second || !in_pairs.insert(b).second) {
      throw ConfigError("intent appears in more than one ambiguous pair");
    }
  }
  if (ambiguous_pairs.size() > 2) throw ConfigError("at most two ambiguous pairs are supported");
  std::set<std::size_t> used;
  for (const auto& [intent, dims] : resolved_signal_dims()) {
    if (!intents.contains(intent)) throw ConfigError("signal_dims names unknown intent '" + intent + "'");
    for (std::size_t d : dims) {
      if (d >= acoustic_dim) {
        throw ConfigError("signal dim " + std::to_string(d) + " of " + intent +
                          " exceeds acoustic_dim " + std::to_string(acoustic_dim));
      }
      if (!used.insert(d).second) {
        throw ConfigError("signal_dims overlap at dimension " + std::to_string(d));
      }
    }
  }
  for (const auto& intent : in_pairs) {
    if (resolved_signal_dims()[intent].empty()) {
      throw ConfigError("ambiguous intent " + intent + " has no signal dimensions");
    }
  }
}

SyntheticData generate_synthetic(const GeneratorConfig& cfg) {
  cfg.validate();
  const LabelSet intents = default_intent_set();
  const auto signal = cfg.resolved_signal_dims();
  const std::size_t n = cfg.n_utterances;

  // Intent per utterance.
  Rng order_rng = Rng::derive(cfg.seed, 1);
  const auto counts = apportion_intents(n, cfg.distribution);
  std::vector<std::size_t> intent_of;
  for (std::size_t i = 0; i < counts.size(); ++i) intent_of.insert(intent_of.end(), counts[i], i);
  order_rng.shuffle(intent_of);

  // Pair membership and the ambiguous subset.
  std::vector<int> pair_of(intents.size(), -1);
  for (std::size_t p = 0; p < cfg.ambiguous_pairs.size(); ++p) {
    pair_of[*intents.find(cfg.ambiguous_pairs[p].first)] = static_cast<int>(p);
    pair_of[*intents.find(cfg.ambiguous_pairs[p].second)] = static_cast<int>(p);
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (pair_of[intent_of[i]] >= 0) candidates.push_back(i);
  }
  const auto n_ambiguous =
      static_cast<std::size_t>(std::lround(cfg.ambiguous_fraction * static_cast<double>(n)));
  if (n_ambiguous > candidates.size()) {
    throw ConfigError("ambiguous_fraction needs " + std::to_string(n_ambiguous) +
                      " utterances from ambiguous pairs but only " +
                      std::to_string(candidates.size()) + " are available");
  }
  Rng ambiguity_rng = Rng::derive(cfg.seed, 2);
  ambiguity_rng.shuffle(candidates);
  std::vector<bool> ambiguous(n, false);
  for (std::size_t k = 0; k < n_ambiguous; ++k) ambiguous[candidates[k]] = true;

  // Fixed shared instances per pair.
  Rng text_rng = Rng::derive(cfg.seed, 3);
  std::vector<std::vector<Tagged>> instances(cfg.ambiguous_pairs.size());
  for (std::size_t p = 0; p < cfg.ambiguous_pairs.size(); ++p) {
    std::set<Tagged> distinct;
    const auto& patterns = shared_templates(p);
    for (std::size_t attempt = 0; distinct.size() < cfg.shared_instances && attempt < 1000; ++attempt) {
      Tagged t = fill_template(patterns[attempt % patterns.size()], text_rng);
      if (distinct.insert(t).second) instances[p].push_back(std::move(t));
    }
  }

  SyntheticData data;
  data.ambiguous = ambiguous;
  Rng acoustic_rng = Rng::derive(cfg.seed, 4);
  Rng visual_rng = Rng::derive(cfg.seed, 5);
  const int id_width = n >= 100000 ? 7 : 5;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& intent = intents.at(intent_of[i]);
    Tagged text;
    if (ambiguous[i]) {
      const auto& pool = instances[static_cast<std::size_t>(pair_of[intent_of[i]])];
      text = pool[text_rng.index(pool.size())];
    } else {
      const auto& patterns = private_templates()[intent_of[i]].templates;
      text = fill_template(patterns[text_rng.index(patterns.size())], text_rng);
    }
    Utterance u;
    u.id = numbered("synth-", i, id_width);
    u.session = numbered("session-", i / 50, 3);
    u.tokens = std::move(text.tokens);
    u.tags = std::move(text.tags);
    u.intent = intent;
    u.acoustic_ref = u.id;
    u.visual_cabin_ref = u.id;
    u.visual_road_ref = u.id;

    Vector acoustic(cfg.acoustic_dim);
    for (double& v : acoustic) v = acoustic_rng.normal(0.0, cfg.noise_std);
    if (ambiguous[i]) {
      for (std::size_t d : signal.at(intent)) acoustic[d] += cfg.signal_shift;
    }
    data.acoustic.emplace(u.id, std::move(acoustic));

    for (auto* frames : {&data.cabin_frames, &data.road_frames}) {
      const std::size_t count = 1 + visual_rng.index(cfg.max_frames);
      for (std::size_t f = 0; f < count; ++f) {
        FrameRow row;
        row.utterance_id = u.id;
        row.frame_index = f;
        row.values.resize(cfg.visual_dim);
        for (double& v : row.values) v = visual_rng.normal();
        frames->push_back(std::move(row));
      }
    }
    data.corpus.utterances.push_back(std::move(u));
  }

  Rng embed_rng = Rng::derive(cfg.seed, 6);
  const auto vocab = grammar_vocabulary();
  data.text_embeddings = random_table("text", vocab, cfg.embedding_dim, embed_rng);
  std::vector<std::string> covered = vocab;
  embed_rng.shuffle(covered);
  covered.resize(static_cast<std::size_t>(
      std::lround(cfg.speech_coverage * static_cast<double>(vocab.size()))));
  std::sort(covered.begin(), covered.end());
  data.speech_embeddings = random_table("speech", std::move(covered), cfg.embedding_dim, embed_rng);
  return data;
}

SyntheticPaths write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  SyntheticPaths paths{dir / "corpus.jsonl",     dir / "acoustic.tsv", dir / "visual_cabin.tsv",
                       dir / "visual_road.tsv", dir / "text.vec",     dir / "speech.vec"};
  write_corpus(paths.corpus, data.corpus);
  write_vector_sidecar(paths.acoustic, data.acoustic);
  write_frame_sidecar(paths.visual_cabin, data.cabin_frames);
  write_frame_sidecar(paths.visual_road, data.road_frames);
  write_table(paths.text_embeddings, data.text_embeddings, false);
  write_table(paths.speech_embeddings, data.speech_embeddings, true);
  return paths;
}

}  // namespace mmslu
