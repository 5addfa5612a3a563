#include "mmslu/cli/run_config.hpp"

#include <fstream>
#include <set>

#include "mmslu/error.hpp"

namespace mmslu::cli {

namespace fs = std::filesystem;
using nlohmann::json;

LabelSet RunConfig::tag_set() const { return tags.empty() ? default_tag_set() : make_tag_set(tags); }

LabelSet RunConfig::intent_set() const {
  return intents.empty() ? default_intent_set() : LabelSet(intents);
}

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string_view> keys(allowed);
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

MissingFeaturePolicy parse_missing(const std::string& text) {
  if (text == "strict") return MissingFeaturePolicy::Strict;
  if (text == "zero-fill") return MissingFeaturePolicy::ZeroFill;
  throw ConfigError("unknown missing-feature policy '" + text + "' (expected strict or zero-fill)");
}

VisualSource parse_visual(const json& j, const fs::path& base) {
  if (j.is_string()) return {resolve(base, j.get<std::string>()), false};
  reject_unknown(j, {"path", "format"}, "visual source");
  const std::string format = get_or<std::string>(j, "format", "frames");
  if (format != "frames" && format != "pooled") {
    throw ConfigError("visual format must be frames or pooled, got '" + format + "'");
  }
  return {resolve(base, j.at("path").get<std::string>()), format == "pooled"};
}

SplitSpec parse_split(const json& j) {
  reject_unknown(j, {"kind", "test_fraction", "dev_fraction", "k", "fold", "stratified"}, "split");
  SplitSpec s;
  const std::string kind = get_or<std::string>(j, "kind", "holdout");
  if (kind == "holdout") s.kind = SplitSpec::Kind::Holdout;
  else if (kind == "kfold") s.kind = SplitSpec::Kind::KFold;
  else if (kind == "none") s.kind = SplitSpec::Kind::None;
  else throw ConfigError("split kind must be holdout, kfold or none, got '" + kind + "'");
  s.test_fraction = get_or(j, "test_fraction", s.test_fraction);
  s.dev_fraction = get_or(j, "dev_fraction", s.dev_fraction);
  s.k = get_or(j, "k", s.k);
  s.fold = get_or(j, "fold", s.fold);
  s.stratified = get_or(j, "stratified", s.stratified);
  if (!(s.test_fraction > 0.0 && s.test_fraction < 1.0)) {
    throw ConfigError("split.test_fraction must lie in (0, 1)");
  }
  if (!(s.dev_fraction >= 0.0 && s.dev_fraction < 1.0)) {
    throw ConfigError("split.dev_fraction must lie in [0, 1)");
  }
  if (s.kind == SplitSpec::Kind::KFold && (s.k < 2 || s.fold >= s.k)) {
    throw ConfigError("split needs k >= 2 and fold < k");
  }
  return s;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir, std::string default_name) {
  reject_unknown(j,
                 {"name", "seed", "corpus", "tags", "intents", "embeddings", "alignment",
                  "acoustic", "visual_cabin", "visual_road", "visual_pool", "missing_acoustic",
                  "missing_visual", "fusion", "hidden_dim", "fine_tune_embeddings", "lr",
                  "lambda", "max_epochs", "patience", "stop_at_perfect_dev", "split",
                  "output_dir"},
                 "run config");
  RunConfig c;
  c.name = get_or(j, "name", std::move(default_name));
  if (!j.contains("seed")) throw ConfigError("run config must set an explicit seed");
  c.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (!j.contains("corpus")) throw ConfigError("run config must name a corpus");
  c.corpus = resolve(base_dir, get_or<std::string>(j, "corpus", ""));
  c.tags = get_or(j, "tags", c.tags);
  c.intents = get_or(j, "intents", c.intents);
  if (!j.contains("embeddings") || !j.at("embeddings").is_array() || j.at("embeddings").empty()) {
    throw ConfigError("run config needs a non-empty embeddings list");
  }
  for (const auto& e : j.at("embeddings")) {
    reject_unknown(e, {"path", "name", "oov"}, "embedding entry");
    EmbeddingSource src;
    src.path = resolve(base_dir, e.at("path").get<std::string>());
    src.name = get_or(e, "name", src.path.stem().string());
    src.oov = parse_oov_policy(get_or<std::string>(e, "oov", "zero-fill"));
    c.embeddings.push_back(std::move(src));
  }
  c.alignment = parse_vocab_alignment(get_or<std::string>(j, "alignment", "union"));
  if (j.contains("acoustic")) c.acoustic = resolve(base_dir, j.at("acoustic").get<std::string>());
  if (j.contains("visual_cabin")) c.visual_cabin = parse_visual(j.at("visual_cabin"), base_dir);
  if (j.contains("visual_road")) c.visual_road = parse_visual(j.at("visual_road"), base_dir);
  c.visual_pool = parse_pool_policy(get_or<std::string>(j, "visual_pool", "mean"));
  c.acoustic_missing = parse_missing(get_or<std::string>(j, "missing_acoustic", "strict"));
  c.visual_missing = parse_missing(get_or<std::string>(j, "missing_visual", "zero-fill"));
  const std::size_t default_projection = 128;
  for (const auto& f : get_or(j, "fusion", json::array())) {
    FusionRequest r;
    if (f.is_string()) {
      r.kind = parse_utterance_feature(f.get<std::string>());
    } else {
      reject_unknown(f, {"feature", "projection_dim"}, "fusion entry");
      r.kind = parse_utterance_feature(f.at("feature").get<std::string>());
      r.projection_dim = get_or(f, "projection_dim", default_projection);
    }
    c.fusion.push_back(r);
  }
  c.hidden_dim = get_or(j, "hidden_dim", c.hidden_dim);
  c.fine_tune_embeddings = get_or(j, "fine_tune_embeddings", c.fine_tune_embeddings);
  c.hyper.adam.lr = get_or(j, "lr", c.hyper.adam.lr);
  c.hyper.lambda = get_or(j, "lambda", c.hyper.lambda);
  c.hyper.max_epochs = get_or(j, "max_epochs", c.hyper.max_epochs);
  c.hyper.patience = get_or(j, "patience", c.hyper.patience);
  c.hyper.stop_at_perfect_dev = get_or(j, "stop_at_perfect_dev", c.hyper.stop_at_perfect_dev);
  if (j.contains("split")) c.split = parse_split(j.at("split"));
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "runs/" + c.name));
  if (c.hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (!(c.hyper.adam.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.hyper.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  for (const auto& f : c.fusion) {
    const bool has_source = f.kind == UtteranceFeature::Acoustic      ? c.acoustic.has_value()
                            : f.kind == UtteranceFeature::VisualCabin ? c.visual_cabin.has_value()
                                                                      : c.visual_road.has_value();
    if (!has_source) {
      throw ConfigError("fusion enables " + to_string(f.kind) + " but no sidecar is configured");
    }
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read run config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  RunConfig c = parse_run_config(j, path.parent_path(), path.stem().string());
  c.source = path;
  return c;
}

void check_paths(const RunConfig& config) {
  const auto need = [](const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  need(config.corpus, "corpus");
  for (const auto& e : config.embeddings) need(e.path, "embedding file");
  if (config.acoustic) need(*config.acoustic, "acoustic sidecar");
  if (config.visual_cabin) need(config.visual_cabin->path, "visual_cabin sidecar");
  if (config.visual_road) need(config.visual_road->path, "visual_road sidecar");
}

}  // namespace mmslu::cli
