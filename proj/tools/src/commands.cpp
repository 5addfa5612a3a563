#include "mmslu/cli/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mmslu/checkpoint.hpp"
#include "mmslu/error.hpp"
#include "mmslu/random.hpp"
#include "mmslu/sidecar.hpp"
#include "mmslu/text_format.hpp"
#include "mmslu/wav.hpp"

namespace mmslu::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t init_seed(std::uint64_t run_seed) { return Rng::derive(run_seed, 1).next_u64(); }
std::uint64_t shuffle_seed(std::uint64_t run_seed) { return Rng::derive(run_seed, 2).next_u64(); }

namespace {

FeatureMap pooled_visuals(const VisualSource& src, View view, PoolPolicy policy) {
  if (src.pooled) return read_vector_sidecar(src.path);
  FeatureMap out;
  for (const auto& set : load_frame_features(src.path, view)) {
    out.emplace(set.utterance_id, pool_frames(set, policy));
  }
  return out;
}

std::size_t map_dim(const FeatureMap& map, const fs::path& path) {
  if (map.empty()) throw DataError("feature sidecar " + path.string() + " has no rows");
  return map.begin()->second.size();
}

void split_off(const Corpus& corpus, const std::vector<std::size_t>& pool, double fraction,
               std::uint64_t seed, bool stratified, std::vector<std::size_t>& kept,
               std::vector<std::size_t>& held) {
  const Corpus part = subset(corpus, pool);
  const Fold f = holdout_split(part, fraction, seed, stratified);
  kept.clear();
  held.clear();
  for (std::size_t i : f.train) kept.push_back(pool[i]);
  for (std::size_t i : f.test) held.push_back(pool[i]);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed while writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

std::vector<TrainingExample> pick(const std::vector<TrainingExample>& all,
                                  const std::vector<std::size_t>& idx) {
  std::vector<TrainingExample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

PreparedRun prepare_run(const RunConfig& config) {
  check_paths(config);
  PreparedRun run;
  run.corpus = load_corpus(config.corpus, config.tag_set(), config.intent_set());

  std::vector<std::shared_ptr<const EmbeddingTable>> tables;
  std::vector<OovPolicy> policies;
  for (const auto& src : config.embeddings) {
    tables.push_back(std::make_shared<const EmbeddingTable>(load_table(src.path, src.name)));
    policies.push_back(src.oov);
  }
  run.embedder = std::make_shared<const CompositeEmbedder>(std::move(tables), std::move(policies),
                                                           config.alignment);

  FeatureMap acoustic, cabin, road;
  FeatureSources sources;
  sources.acoustic_policy = config.acoustic_missing;
  sources.visual_policy = config.visual_missing;
  ModelConfig& mc = run.model_config;
  mc.tags = run.corpus.tags;
  mc.intents = run.corpus.intents;
  mc.spaces = ModelConfig::describe(*run.embedder);
  mc.alignment = config.alignment;
  mc.hidden_dim = config.hidden_dim;
  mc.fine_tune_embeddings = config.fine_tune_embeddings;
  for (const auto& req : config.fusion) {
    FeatureSpec spec;
    spec.kind = req.kind;
    spec.projection_dim = req.projection_dim;
    switch (req.kind) {
      case UtteranceFeature::Acoustic:
        acoustic = read_vector_sidecar(*config.acoustic);
        spec.input_dim = map_dim(acoustic, *config.acoustic);
        sources.acoustic = &acoustic;
        break;
      case UtteranceFeature::VisualCabin:
        cabin = pooled_visuals(*config.visual_cabin, View::Cabin, config.visual_pool);
        spec.input_dim = map_dim(cabin, config.visual_cabin->path);
        sources.visual_cabin = &cabin;
        break;
      case UtteranceFeature::VisualRoad:
        road = pooled_visuals(*config.visual_road, View::Road, config.visual_pool);
        spec.input_dim = map_dim(road, config.visual_road->path);
        sources.visual_road = &road;
        break;
    }
    mc.fusion.features.push_back(spec);
  }
  run.features = attach_features(run.corpus, sources);

  const SplitSpec& split = config.split;
  std::vector<std::size_t> pool;
  switch (split.kind) {
    case SplitSpec::Kind::None:
      for (std::size_t i = 0; i < run.corpus.size(); ++i) pool.push_back(i);
      run.test = pool;
      break;
    case SplitSpec::Kind::Holdout: {
      const Fold f = holdout_split(run.corpus, split.test_fraction, config.seed, split.stratified);
      pool = f.train;
      run.test = f.test;
      break;
    }
    case SplitSpec::Kind::KFold: {
      const auto folds = kfold_split(run.corpus, split.k, config.seed, split.stratified);
      pool = folds.at(split.fold).train;
      run.test = folds.at(split.fold).test;
      break;
    }
  }
  if (split.kind != SplitSpec::Kind::None && split.dev_fraction > 0.0) {
    split_off(run.corpus, pool, split.dev_fraction, Rng::derive(config.seed, 3).next_u64(),
              split.stratified, run.train, run.dev);
  } else {
    run.train = pool;
  }
  if (run.train.empty()) throw DataError("the split leaves no training utterances");

  if (mc.fine_tune_embeddings) {
    mc.tuned_vocabulary = corpus_vocabulary(subset(run.corpus, run.train));
  }
  return run;
}

GeneratorConfig parse_generator_config(const json& j) {
  GeneratorConfig c;
  if (!j.is_object()) throw ConfigError("generator config must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_utterances") c.n_utterances = value.get<std::size_t>();
      else if (key == "distribution") c.distribution = parse_intent_distribution(value.get<std::string>());
      else if (key == "ambiguous_fraction") c.ambiguous_fraction = value.get<double>();
      else if (key == "ambiguous_pairs") {
        c.ambiguous_pairs.clear();
        for (const auto& p : value) {
          c.ambiguous_pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
        }
      } else if (key == "acoustic_dim") c.acoustic_dim = value.get<std::size_t>();
      else if (key == "signal_dims") c.signal_dims = value.get<std::map<std::string, std::vector<std::size_t>>>();
      else if (key == "signal_shift") c.signal_shift = value.get<double>();
      else if (key == "noise_std") c.noise_std = value.get<double>();
      else if (key == "visual_dim") c.visual_dim = value.get<std::size_t>();
      else if (key == "max_frames") c.max_frames = value.get<std::size_t>();
      else if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
      else if (key == "speech_coverage") c.speech_coverage = value.get<double>();
      else if (key == "shared_instances") c.shared_instances = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown key '" + key + "' in generator config");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
  return c;
}

GenSynthOutcome cmd_gen_synth(const GeneratorConfig& config, const fs::path& out_dir,
                              std::ostream& out) {
  config.validate();
  ensure_dir(out_dir);
  GenSynthOutcome outcome{generate_synthetic(config), {}};
  outcome.paths = write_synthetic(outcome.data, out_dir);
  const CorpusStats stats = corpus_stats(outcome.data.corpus);
  std::size_t ambiguous = 0;
  for (bool a : outcome.data.ambiguous) ambiguous += a ? 1 : 0;
  out << "wrote " << stats.utterances << " utterances to " << out_dir.string() << "\n";
  for (const auto& [label, count] : stats.intent_counts) {
    out << "  " << std::left << std::setw(16) << label << count << "\n";
  }
  out << "  ambiguous       " << ambiguous << "\n";
  return outcome;
}

void cmd_validate_corpus(const fs::path& corpus, std::ostream& out) {
  const Corpus c = load_corpus(corpus);
  const CorpusStats stats = corpus_stats(c);
  out << corpus.string() << ": " << stats.utterances << " utterances, " << stats.with_intent
      << " with intent, " << stats.tokens << " tokens\n";
  out << "intents:\n";
  for (const auto& [label, count] : stats.intent_counts) out << "  " << label << "\t" << count << "\n";
  out << "tags:\n";
  for (const auto& [label, count] : stats.tag_counts) out << "  " << label << "\t" << count << "\n";
}

void cmd_validate_run(const RunConfig& config, std::ostream& out) {
  const PreparedRun run = prepare_run(config);
  build_examples(run.corpus, &run.features, run.model_config);
  out << config.name << ": corpus " << run.corpus.size() << " utterances; split train "
      << run.train.size() << " / dev " << run.dev.size() << " / test " << run.test.size() << "\n";
  out << "embedding dim " << run.embedder->total_dim() << "; fused extra dim "
      << run.model_config.fusion.fused_extra_dim() << "; feature warnings "
      << run.features.warnings << "\n";
  for (const auto& m : run.features.missing) out << "  missing " << m << "\n";
}

void cmd_extract_acoustic(const fs::path& manifest, const fs::path& out_path, const LldConfig& lld,
                          std::ostream& out) {
  lld.validate();
  FeatureMap features;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(manifest)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw FormatError(manifest.string() + ":" + std::to_string(line_no) +
                        ": expected 'id<TAB>wav path'");
    }
    const std::string id(fields[0]);
    fs::path wav{std::string(fields[1])};
    if (wav.is_relative()) wav = manifest.parent_path() / wav;
    const UtteranceAcoustics a = extract_utterance(read_wav(wav), lld);
    if (!features.emplace(id, a.vector).second) {
      throw FormatError(manifest.string() + ":" + std::to_string(line_no) + ": duplicate id '" + id + "'");
    }
  }
  write_vector_sidecar(out_path, features);
  const std::size_t dim = features.empty() ? 0 : features.begin()->second.size();
  out << "extracted " << features.size() << " utterances, dim " << dim << " -> " << out_path.string()
      << "\n";
}

void cmd_pool_visual(const fs::path& frames, View view, PoolPolicy policy, const fs::path& out_path,
                     std::ostream& out) {
  FeatureMap pooled = pooled_visuals({frames, false}, view, policy);
  write_vector_sidecar(out_path, pooled);
  const std::size_t dim = pooled.empty() ? 0 : pooled.begin()->second.size();
  out << "pooled " << pooled.size() << " " << to_string(view) << " utterances (" << to_string(policy)
      << "), dim " << dim << " -> " << out_path.string() << "\n";
}

TrainOutcome cmd_train(const RunConfig& config, std::ostream& out) {
  const PreparedRun run = prepare_run(config);
  const auto examples = build_examples(run.corpus, &run.features, run.model_config);
  const auto train_set = pick(examples, run.train);
  const auto dev_set = pick(examples, run.dev);
  HJoint2Model model(run.model_config, run.embedder, init_seed(config.seed));
  TrainHyper hyper = config.hyper;
  hyper.seed = shuffle_seed(config.seed);

  ensure_dir(config.output_dir);
  std::ofstream log(config.output_dir / "train.log", std::ios::app);
  log << timestamp() << " start " << config.name << " seed " << config.seed << " params "
      << model.parameter_count() << " train " << train_set.size() << " dev " << dev_set.size()
      << "\n";
  out << config.name << ": " << model.parameter_count() << " parameters, train "
      << train_set.size() << ", dev " << dev_set.size() << "\n";
  const auto on_epoch = [&](const EpochRecord& r) {
    log << timestamp() << " epoch " << r.epoch << " loss " << format_real(r.train_loss) << " dev "
        << format_real(r.dev_micro_f1) << "\n";
    out << "  epoch " << std::setw(3) << r.epoch << "  loss " << std::fixed << std::setprecision(5)
        << r.train_loss << "  dev_f1 " << r.dev_micro_f1 << std::defaultfloat << "\n";
  };
  TrainOutcome outcome{train(std::move(model), train_set, dev_set, hyper, on_epoch),
                       config.output_dir / "model.ckpt", config.output_dir / "history.tsv"};
  save_checkpoint(outcome.checkpoint, outcome.result.model);
  write_text(outcome.history, format_history(outcome.result.history));
  log << timestamp() << " done best epoch " << outcome.result.best_epoch << "\n";
  out << "best epoch " << outcome.result.best_epoch << ", dev micro-F1 "
      << format_real(outcome.result.history.empty() ? 0.0 : outcome.result.history.back().best_dev_f1)
      << "; wrote " << outcome.checkpoint.string() << "\n";
  return outcome;
}

EvalOutcome cmd_eval(const RunConfig& config, const std::optional<fs::path>& checkpoint,
                     std::ostream& out) {
  const PreparedRun run = prepare_run(config);
  const fs::path path = checkpoint.value_or(config.output_dir / "model.ckpt");
  const ModelConfig saved = read_checkpoint_config(path);
  if (!(saved.tags == run.corpus.tags)) {
    throw ConfigError("checkpoint tag set (" + saved.tags.joined() +
                      ") differs from the corpus tag set (" + run.corpus.tags.joined() + ")");
  }
  if (!(saved.intents == run.corpus.intents)) {
    throw ConfigError("checkpoint intent set (" + saved.intents.joined() +
                      ") differs from the corpus intent set (" + run.corpus.intents.joined() + ")");
  }
  const HJoint2Model model = load_checkpoint(path, run.embedder);
  const auto examples = build_examples(run.corpus, &run.features, model.config());

  std::vector<std::string> gold_intents, pred_intents, ids;
  std::vector<std::vector<std::string>> gold_tags, pred_tags;
  for (std::size_t i : run.test) {
    const TrainingExample& ex = examples[i];
    const Prediction p = model.predict(ex.tokens, ex.features);
    const Utterance& u = run.corpus.utterances[i];
    ids.push_back(u.id);
    gold_tags.push_back(u.tags);
    pred_tags.push_back(p.tags);
    if (u.intent) {
      gold_intents.push_back(*u.intent);
      pred_intents.push_back(p.intent);
    }
  }
  if (gold_intents.empty()) throw DataError("the test split has no command utterances to score");
  EvalOutcome outcome;
  outcome.intent = intent_metrics(gold_intents, pred_intents, model.config().intents.labels());
  outcome.slots_token = slot_metrics(gold_tags, pred_tags, SlotMode::Token, ids);
  outcome.slots_span = slot_metrics(gold_tags, pred_tags, SlotMode::Span, ids);

  nlohmann::ordered_json report;
  report["config"] = config.name;
  report["checkpoint"] = path.filename().string();
  report["test_utterances"] = run.test.size();
  report["intent"] = to_json(outcome.intent.metrics);
  report["confusion"] = to_json(outcome.intent.confusion);
  report["slots_token"] = to_json(outcome.slots_token);
  report["slots_span"] = to_json(outcome.slots_span);
  outcome.row = {{"config", config.name},
                 {"micro_f1", outcome.intent.metrics.micro_f1},
                 {"macro_f1", outcome.intent.metrics.macro_f1},
                 {"weighted_f1", outcome.intent.metrics.weighted_f1},
                 {"slot_token_micro_f1", outcome.slots_token.micro_f1},
                 {"slot_span_micro_f1", outcome.slots_span.micro_f1}};

  ensure_dir(config.output_dir);
  write_text(config.output_dir / "eval.json", report.dump(2) + "\n");
  std::ostringstream text;
  text << std::fixed << std::setprecision(4);
  text << config.name << " (" << gold_intents.size() << " intents, " << run.test.size()
       << " utterances)\n";
  text << "intent   micro " << outcome.intent.metrics.micro_f1 << "  macro "
       << outcome.intent.metrics.macro_f1 << "  weighted " << outcome.intent.metrics.weighted_f1
       << "\n";
  text << "slots    token " << outcome.slots_token.micro_f1 << "  span "
       << outcome.slots_span.micro_f1 << "\n";
  for (const auto& c : outcome.intent.metrics.per_class) {
    text << "  " << std::left << std::setw(16) << c.label << std::right << " P " << c.precision
         << "  R " << c.recall << "  F1 " << c.f1 << "  n " << c.support << "\n";
  }
  write_text(config.output_dir / "eval.txt", text.str());
  out << text.str();
  return outcome;
}

AblateOutcome cmd_ablate(std::span<const RunConfig> configs, const fs::path& out_dir,
                         std::optional<std::uint64_t> seed, std::ostream& out) {
  if (configs.empty()) throw ConfigError("ablate needs at least one config");
  AblateOutcome outcome;
  std::vector<AblationRun> runs;
  for (RunConfig config : configs) {
    if (seed) config.seed = *seed;
    try {
      cmd_train(config, out);
      const EvalOutcome e = cmd_eval(config, std::nullopt, out);
      runs.push_back({config.name, e.intent.metrics, ""});
    } catch (const std::exception& e) {
      out << config.name << " failed: " << e.what() << "\n";
      runs.push_back({config.name, std::nullopt, e.what()});
      if (outcome.failures++ == 0) outcome.first_failure_code = exit_code_for(e);
    }
  }
  outcome.report = ablation_report(runs);
  ensure_dir(out_dir);
  write_text(out_dir / "ablation.txt", outcome.report.table);
  std::string lines;
  for (const auto& row : outcome.report.rows) lines += row.dump() + "\n";
  write_text(out_dir / "ablation.jsonl", lines);
  out << outcome.report.table;
  return outcome;
}

void cmd_embed_info(std::span<const EmbeddingSource> sources, const std::optional<fs::path>& corpus,
                    std::ostream& out) {
  if (sources.empty()) throw ConfigError("embed-info needs at least one embedding file");
  std::vector<std::shared_ptr<const EmbeddingTable>> tables;
  std::vector<OovPolicy> policies;
  for (const auto& src : sources) {
    if (!fs::is_regular_file(src.path)) throw ConfigError("embedding file not found: " + src.path.string());
    tables.push_back(std::make_shared<const EmbeddingTable>(load_table(src.path, src.name)));
    policies.push_back(src.oov);
    out << src.name << ": " << tables.back()->size() << " tokens x " << tables.back()->dim
        << " (" << src.path.string() << ")\n";
  }
  const CompositeEmbedder embedder(tables, policies);
  out << "composite dim " << embedder.total_dim() << "\n";
  if (corpus) {
    const Corpus c = load_corpus(*corpus);
    for (const auto& cov : coverage_report(embedder, corpus_vocabulary(c))) {
      out << "  " << cov.name << ": covers " << cov.covered << " / " << cov.vocab_size
          << " corpus types, OOV rate " << std::fixed << std::setprecision(4) << cov.oov_rate
          << std::defaultfloat << "\n";
    }
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->category()) {
      case ErrorCategory::Config: return 2;
      case ErrorCategory::Data: return 3;
      case ErrorCategory::Numeric: return 4;
      case ErrorCategory::Io: return 5;
    }
  }
  return 1;
}

}  // namespace mmslu::cli
