#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mmslu/cli/commands.hpp"
#include "mmslu/error.hpp"

namespace mmslu::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// "name=path" or a bare path (name = file stem), with an optional ":oov" suffix
// on the name, e.g. "speech:trainable-unk=speech.vec".
EmbeddingSource parse_embedding_arg(const std::string& arg) {
  EmbeddingSource src;
  const auto eq = arg.find('=');
  if (eq == std::string::npos) {
    src.path = arg;
    src.name = src.path.stem().string();
    return src;
  }
  std::string name = arg.substr(0, eq);
  src.path = arg.substr(eq + 1);
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    src.oov = parse_oov_policy(name.substr(colon + 1));
    name.resize(colon);
  }
  src.name = name;
  return src;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Hierarchical joint intent/slot models with acoustic and visual fusion"};
  app.name("mmslu");
  app.require_subcommand(1);

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic corpus with sidecars");
  std::string gen_config, gen_out, gen_distribution;
  std::size_t gen_n = 0, gen_acoustic_dim = 0;
  std::uint64_t gen_seed = 0;
  double gen_p = 0.0, gen_noise = 0.0, gen_shift = 0.0;
  gen->add_option("--config", gen_config, "Generator config (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output directory")->required();
  auto* o_n = gen->add_option("--n", gen_n, "Number of utterances");
  auto* o_seed = gen->add_option("--seed", gen_seed, "Seed");
  auto* o_dist = gen->add_option("--distribution", gen_distribution, "uniform | table1-proportional");
  auto* o_p = gen->add_option("--ambiguous-fraction", gen_p, "Share of textually ambiguous utterances");
  auto* o_adim = gen->add_option("--acoustic-dim", gen_acoustic_dim, "Acoustic vector dimension");
  auto* o_noise = gen->add_option("--noise-std", gen_noise, "Acoustic noise std");
  auto* o_shift = gen->add_option("--signal-shift", gen_shift, "Mean shift on signal dims");

  // validate
  auto* val = app.add_subcommand("validate", "Validate a corpus or a full run config");
  std::string val_corpus, val_config;
  auto* o_vc = val->add_option("--corpus", val_corpus, "Corpus file (JSONL)");
  auto* o_vr = val->add_option("--config", val_config, "Run config (JSON)");
  o_vc->excludes(o_vr);
  val->require_option(1);

  // extract-acoustic
  auto* ext = app.add_subcommand("extract-acoustic", "Utterance acoustic vectors from WAV files");
  std::string ext_manifest, ext_out;
  LldConfig lld;
  bool no_deltas = false, no_energy = false, no_zcr = false;
  ext->add_option("--manifest", ext_manifest, "TSV of id<TAB>wav path")->required()->check(CLI::ExistingFile);
  ext->add_option("--out", ext_out, "Output sidecar")->required();
  ext->add_option("--frame-length", lld.frame_length, "Frame length in seconds")->capture_default_str();
  ext->add_option("--hop", lld.hop, "Hop in seconds")->capture_default_str();
  ext->add_option("--preemphasis", lld.preemphasis, "Pre-emphasis coefficient")->capture_default_str();
  ext->add_option("--n-mel", lld.n_mel, "Mel bands")->capture_default_str();
  ext->add_option("--n-mfcc", lld.n_mfcc, "Cepstral coefficients")->capture_default_str();
  ext->add_flag("--no-deltas", no_deltas, "Skip delta LLDs");
  ext->add_flag("--no-energy", no_energy, "Skip log-energy");
  ext->add_flag("--no-zcr", no_zcr, "Skip zero-crossing rate");

  // pool-visual
  auto* pool = app.add_subcommand("pool-visual", "Pool per-frame visual features per utterance");
  std::string pool_frames_path, pool_out, pool_view = "cabin", pool_policy = "mean";
  pool->add_option("--frames", pool_frames_path, "Frame sidecar")->required()->check(CLI::ExistingFile);
  pool->add_option("--view", pool_view, "cabin | road")->capture_default_str();
  pool->add_option("--pool", pool_policy, "mean | max")->capture_default_str();
  pool->add_option("--out", pool_out, "Output sidecar")->required();

  // train
  auto* trn = app.add_subcommand("train", "Train a model from a run config");
  std::string train_config;
  trn->add_option("--config", train_config, "Run config (JSON)")->required();

  // eval
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  std::string eval_config, eval_ckpt;
  evl->add_option("--config", eval_config, "Run config (JSON)")->required();
  evl->add_option("--checkpoint", eval_ckpt, "Checkpoint (default: <output_dir>/model.ckpt)");

  // ablate
  auto* abl = app.add_subcommand("ablate", "Train and evaluate several configs into one table");
  std::vector<std::string> abl_configs;
  std::string abl_out;
  std::uint64_t abl_seed = 0;
  abl->add_option("--configs", abl_configs, "Run configs in table order")->required();
  abl->add_option("--out", abl_out, "Directory for ablation.txt / ablation.jsonl")->required();
  auto* o_aseed = abl->add_option("--seed", abl_seed, "Seed shared by every run");

  // embed-info
  auto* emb = app.add_subcommand("embed-info", "Describe embedding files and corpus coverage");
  std::vector<std::string> emb_args;
  std::string emb_corpus;
  emb->add_option("--embeddings", emb_args, "[name[:oov]=]path")->required();
  emb->add_option("--corpus", emb_corpus, "Corpus for coverage")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::ostream& out = std::cout;
  try {
    if (*gen) {
      GeneratorConfig cfg = gen_config.empty() ? GeneratorConfig{} : parse_generator_config(read_json(gen_config));
      if (*o_n) cfg.n_utterances = gen_n;
      if (*o_seed) cfg.seed = gen_seed;
      if (*o_dist) cfg.distribution = parse_intent_distribution(gen_distribution);
      if (*o_p) cfg.ambiguous_fraction = gen_p;
      if (*o_adim) cfg.acoustic_dim = gen_acoustic_dim;
      if (*o_noise) cfg.noise_std = gen_noise;
      if (*o_shift) cfg.signal_shift = gen_shift;
      cmd_gen_synth(cfg, gen_out, out);
    } else if (*val) {
      if (*o_vc) cmd_validate_corpus(val_corpus, out);
      else cmd_validate_run(load_run_config(val_config), out);
    } else if (*ext) {
      lld.include_deltas = !no_deltas;
      lld.include_log_energy = !no_energy;
      lld.include_zcr = !no_zcr;
      cmd_extract_acoustic(ext_manifest, ext_out, lld, out);
    } else if (*pool) {
      cmd_pool_visual(pool_frames_path, parse_view(pool_view), parse_pool_policy(pool_policy), pool_out, out);
    } else if (*trn) {
      cmd_train(load_run_config(train_config), out);
    } else if (*evl) {
      std::optional<fs::path> ckpt;
      if (!eval_ckpt.empty()) ckpt = eval_ckpt;
      cmd_eval(load_run_config(eval_config), ckpt, out);
    } else if (*abl) {
      std::vector<RunConfig> configs;
      for (const auto& p : abl_configs) configs.push_back(load_run_config(p));
      std::optional<std::uint64_t> seed;
      if (*o_aseed) seed = abl_seed;
      const AblateOutcome outcome = cmd_ablate(configs, abl_out, seed, out);
      return outcome.first_failure_code;
    } else if (*emb) {
      std::vector<EmbeddingSource> sources;
      for (const auto& a : emb_args) sources.push_back(parse_embedding_arg(a));
      std::optional<fs::path> corpus;
      if (!emb_corpus.empty()) corpus = emb_corpus;
      cmd_embed_info(sources, corpus, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}

}  // namespace mmslu::cli
