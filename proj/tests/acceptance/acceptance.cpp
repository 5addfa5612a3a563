// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 only when
// every selected criterion passes.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "mmslu/acoustic.hpp"
#include "mmslu/cli/commands.hpp"
#include "mmslu/cli/run_config.hpp"
#include "mmslu/data.hpp"
#include "mmslu/embeddings.hpp"
#include "mmslu/metrics.hpp"
#include "mmslu/model.hpp"
#include "mmslu/random.hpp"
#include "mmslu/sidecar.hpp"
#include "mmslu/synth.hpp"
#include "mmslu/trainer.hpp"
#include "mmslu/visual.hpp"
#include "support/baseline.hpp"
#include "support/dsp_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/gradient_suites.hpp"
#include "support/metric_oracle.hpp"

using namespace mmslu;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// 1
Outcome gradient_correctness(const fs::path&) {
  const auto start = Clock::now();
  double linear = 0.0, recurrent = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    linear = std::max({linear, support::dense_gradient_error(seed), support::softmax_ce_gradient_error(seed),
                       support::projection_gradient_error(seed)});
    recurrent = std::max({recurrent, support::lstm_cell_gradient_error(seed), support::bilstm_gradient_error(seed),
                          support::end_to_end_gradient_error(seed),
                          support::end_to_end_gradient_error(seed, true)});
  }
  const double elapsed = seconds_since(start);
  return {linear <= 1e-6 && recurrent <= 1e-4 && elapsed < 60.0,
          "20 seeds; linear/softmax max rel err " + fmt(linear) + " (<= 1e-6), recurrent/end-to-end " +
              fmt(recurrent) + " (<= 1e-4), " + fmt(elapsed, 3) + " s (< 60)"};
}

std::shared_ptr<const CompositeEmbedder> text_embedder(const SyntheticData& data) {
  return std::make_shared<const CompositeEmbedder>(
      std::vector<std::shared_ptr<const EmbeddingTable>>{std::make_shared<const EmbeddingTable>(data.text_embeddings)},
      std::vector<OovPolicy>{OovPolicy::ZeroFill});
}

// 2
Outcome overfit_capacity(const fs::path&) {
  const auto start = Clock::now();
  GeneratorConfig g;
  g.n_utterances = 200;
  g.seed = 11;
  const SyntheticData data = generate_synthetic(g);
  std::set<std::string> intents;
  for (const auto& u : data.corpus.utterances) intents.insert(*u.intent);
  ModelConfig config;
  config.hidden_dim = 64;
  const auto examples = build_examples(data.corpus, nullptr, config);
  TrainHyper hyper;
  hyper.max_epochs = 300;
  hyper.stop_at_perfect_dev = true;
  hyper.patience = 300;
  const TrainResult r = train(HJoint2Model(config, text_embedder(data), 3), examples, {}, hyper);
  const double f1 = intent_micro_f1(r.model, examples);
  const double elapsed = seconds_since(start);
  return {f1 >= 0.99 && r.history.size() <= 300 && intents.size() == 9 && elapsed < 300.0,
          "200 utterances, " + std::to_string(intents.size()) + " intents, H = 64: train micro-F1 " +
              fmt_fixed(f1) + " (>= 0.99) after " + std::to_string(r.history.size()) + " epochs (<= 300), " +
              fmt(elapsed, 3) + " s (< 300)"};
}

void write_json(const fs::path& path, const json& j) { support::write_file(path, j.dump(2) + "\n"); }

json run_config_json(const std::string& name, std::uint64_t seed, bool acoustic) {
  json j = {{"name", name},
            {"seed", seed},
            {"corpus", "data/corpus.jsonl"},
            {"embeddings", json::array({{{"path", "data/text.vec"}, {"name", "text"}}})},
            {"hidden_dim", 64},
            {"split", {{"kind", "holdout"}, {"test_fraction", 0.2}, {"dev_fraction", 0.1}}},
            {"output_dir", "runs/" + name}};
  if (acoustic) {
    j["acoustic"] = "data/acoustic.tsv";
    j["fusion"] = json::array({"acoustic"});
  }
  return j;
}

// 3
Outcome multimodal_gain(const fs::path& work) {
  const auto start = Clock::now();
  const fs::path dir = work / "gain";
  fs::create_directories(dir);
  GeneratorConfig g;
  g.n_utterances = 1000;
  g.ambiguous_fraction = 0.3;
  g.signal_shift = 2.0;
  g.noise_std = 1.0;
  g.seed = 7;
  std::ostringstream log;
  cli::cmd_gen_synth(g, dir / "data", log);
  double f1[2] = {0.0, 0.0};
  for (int fused = 0; fused < 2; ++fused) {
    const std::string name = fused ? "text_acoustic" : "text_only";
    write_json(dir / (name + ".json"), run_config_json(name, 7, fused != 0));
    const cli::RunConfig rc = cli::load_run_config(dir / (name + ".json"));
    cli::cmd_train(rc, log);
    f1[fused] = cli::cmd_eval(rc, std::nullopt, log).intent.metrics.micro_f1;
  }
  const double gain = f1[1] - f1[0];
  const double elapsed = seconds_since(start);
  return {gain >= 0.10 && f1[0] <= 0.90 && elapsed < 900.0,
          "p = 0.3, 1000 utterances, 80/20: text-only test micro-F1 " + fmt_fixed(f1[0]) + " (<= 0.90), " +
              "text+acoustic " + fmt_fixed(f1[1]) + ", gain " + fmt_fixed(gain) + " (>= 0.10), " +
              fmt(elapsed, 3) + " s (< 900)"};
}

// 4
Outcome dsp_oracle(const fs::path&) {
  LldConfig cfg;
  double worst_fb = 0.0, worst_utt = 0.0;
  std::size_t clips = 0;
  bool shapes = true, has_sine = false, has_silence = false;
  for (const auto& [name, clip] : oracle::reference_clips()) {
    ++clips;
    has_sine = has_sine || name.find("440") != std::string::npos;
    has_silence = has_silence || name.find("silen") != std::string::npos;
    if (clip.samples.size() > static_cast<std::size_t>(0.5 * clip.sample_rate)) shapes = false;
    const Matrix fast = filterbank_energies(clip, cfg);
    const auto slow = oracle::direct_filterbank(clip, cfg);
    if (fast.rows() != slow.size()) {
      shapes = false;
      continue;
    }
    double scale = 0.0;
    for (const auto& r : slow) for (double v : r) scale = std::max(scale, std::abs(v));
    for (std::size_t t = 0; t < slow.size(); ++t) {
      for (std::size_t m = 0; m < cfg.n_mel; ++m) {
        worst_fb = std::max(worst_fb, oracle::relative_error(fast(t, m), slow[t][m], std::max(scale * 1e-9, 1e-300)));
      }
    }
    const Vector v = extract_utterance(clip, cfg).vector;
    const auto ref = oracle::direct_utterance(clip, cfg);
    if (v.size() != ref.size()) {
      shapes = false;
      continue;
    }
    for (std::size_t k = 0; k < v.size(); ++k) worst_utt = std::max(worst_utt, oracle::relative_error(v[k], ref[k], 1e-6));
  }
  Rng rng(2024);
  std::size_t frame_mismatch = 0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = rng.index(20000), len = 1 + rng.index(1024), hop = 1 + rng.index(512);
    frame_mismatch += frame_count(n, len, hop) != oracle::enumerate_frames(n, len, hop);
  }
  return {shapes && clips == 10 && has_sine && has_silence && worst_fb <= 1e-6 && worst_utt <= 1e-6 &&
              frame_mismatch == 0,
          std::to_string(clips) + " clips (sine 440 Hz and silence included): filterbank max rel err " +
              fmt(worst_fb) + ", utterance vector " + fmt(worst_utt) + " (<= 1e-6); frame count " +
              std::to_string(50 - frame_mismatch) + "/50 exact"};
}

// 5
Outcome metric_oracle(const fs::path&) {
  const auto fuzz = oracle::metric_fuzz(5, 1000);
  const std::vector<std::string> gold{"A", "A", "B"}, pred{"A", "B", "B"};
  const auto m = intent_metrics(gold, pred).metrics;
  const bool example = m.micro_f1 == 2.0 / 3.0 && m.macro_f1 == 2.0 / 3.0;
  return {fuzz.mismatches == 0 && example,
          std::to_string(fuzz.cases - fuzz.mismatches) + "/1000 fuzzed label sets exact" +
              (fuzz.mismatches ? " (first: " + fuzz.first_failure + ")" : std::string()) +
              "; [A,A,B]/[A,B,B] micro " + fmt(m.micro_f1, 17) + " macro " + fmt(m.macro_f1, 17)};
}

// 6
Outcome determinism(const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::create_directories(dir);
  GeneratorConfig g;
  g.n_utterances = 150;
  g.ambiguous_fraction = 0.2;
  g.seed = 3;
  std::ostringstream log;
  cli::cmd_gen_synth(g, dir / "data", log);
  json j = run_config_json("det", 21, true);
  j["hidden_dim"] = 16;
  j["max_epochs"] = 8;
  j["fusion"] = json::array({{{"feature", "acoustic"}, {"projection_dim", 8}}});
  write_json(dir / "det.json", j);
  const cli::RunConfig rc = cli::load_run_config(dir / "det.json");
  const auto a = cli::cmd_train(rc, log);
  const std::string ckpt = support::read_file(a.checkpoint), hist = support::read_file(a.history);
  const auto b = cli::cmd_train(rc, log);
  const bool same_ckpt = support::read_file(b.checkpoint) == ckpt;
  const bool same_hist = support::read_file(b.history) == hist;
  return {same_ckpt && same_hist && !ckpt.empty(),
          std::string("two cmd_train runs: checkpoint ") + (same_ckpt ? "identical" : "DIFFERS") + " (" +
              std::to_string(ckpt.size()) + " bytes), history " + (same_hist ? "identical" : "DIFFERS")};
}

// 7
Outcome baseline_equivalence(const fs::path&) {
  const auto r = support::baseline_equivalence(99, 100);
  return {r.parameters_equal && r.mismatches == 0,
          std::to_string(r.utterances - r.mismatches) + "/" + std::to_string(r.utterances) +
              " utterances bit-identical to the fusion-free forward; parameters " +
              (r.parameters_equal ? "identical" : "DIFFER")};
}

// 8
Outcome schema_fidelity(const fs::path& work) {
  GeneratorConfig g;
  g.n_utterances = 1331;
  g.distribution = IntentDistribution::Table1Proportional;
  std::ostringstream log;
  const auto out = cli::cmd_gen_synth(g, work / "table1", log);
  std::map<std::string, std::size_t> counts;
  for (const auto& u : out.data.corpus.utterances) ++counts[*u.intent];
  std::size_t worst = 0;
  std::string detail;
  for (const auto& [intent, expected] : table1_intent_counts()) {
    const std::size_t got = counts[intent];
    worst = std::max(worst, got > expected ? got - expected : expected - got);
    detail += intent + " " + std::to_string(got) + "/" + std::to_string(expected) + " ";
  }
  const bool round_trip = load_corpus(out.paths.corpus) == out.data.corpus &&
                          read_vector_sidecar(out.paths.acoustic) == out.data.acoustic;
  return {worst <= 1 && round_trip && out.data.corpus.size() == 1331,
          detail + "(max deviation " + std::to_string(worst) + "); round trip " + (round_trip ? "equal" : "DIFFERS")};
}

// 9
Outcome real_artifacts(const fs::path& work) {
  const fs::path dir = work / "artifacts";
  fs::create_directories(dir);
  support::write_file(dir / "glove.txt", "stop 0.1 0.2 0.3 0.4\nthe -0.5 0.5 0 1e-3\ncar 1 2 3 4\n");
  support::write_file(dir / "w2v.txt", "2 3\nstop 0.3 0.2 0.1\npark 1 1 1\n");
  const EmbeddingTable glove = load_table(dir / "glove.txt", "glove");
  const EmbeddingTable w2v = load_table(dir / "w2v.txt", "w2v");
  const bool loaders = glove.size() == 3 && glove.dim == 4 && w2v.size() == 2 && w2v.dim == 3;

  Rng rng(1);
  FeatureMap is10;
  std::vector<FrameRow> frames;
  for (const char* id : {"u1", "u2"}) {
    Vector v(1582);
    for (double& x : v) x = rng.normal();
    is10.emplace(id, std::move(v));
    for (std::size_t f = 0; f < 2; ++f) {
      FrameRow row{id, f, Vector(4096)};
      for (double& x : row.values) x = rng.uniform();
      frames.push_back(std::move(row));
    }
  }
  write_vector_sidecar(dir / "is10.tsv", is10);
  write_frame_sidecar(dir / "cabin_frames.tsv", frames);
  const auto acoustic = load_precomputed(dir / "is10.tsv");
  const auto cabin = load_frame_features(dir / "cabin_frames.tsv", View::Cabin);
  const Vector pooled = pool_frames(cabin.at(0));

  auto emb = std::make_shared<const CompositeEmbedder>(
      std::vector<std::shared_ptr<const EmbeddingTable>>{std::make_shared<const EmbeddingTable>(glove)},
      std::vector<OovPolicy>{OovPolicy::ZeroFill});
  UtteranceFeatures f;
  f.acoustic = acoustic.at("u1").vector;
  f.visual_cabin = pooled;
  ModelConfig projected;
  projected.hidden_dim = 64;
  projected.fusion.features = {{UtteranceFeature::Acoustic, 1582, 128}};
  ModelConfig raw = projected;
  raw.fusion.features = {{UtteranceFeature::Acoustic, 1582, 0}, {UtteranceFeature::VisualCabin, 4096, 0}};
  const std::vector<std::string> tokens{"stop", "the", "car"};
  const std::size_t d1 = HJoint2Model(projected, emb, 1).level2_joint(tokens, f).fused.size();
  const std::size_t d2 = HJoint2Model(raw, emb, 1).level2_joint(tokens, f).fused.size();
  return {loaders && acoustic.at("u1").dim == 1582 && pooled.size() == 4096 && d1 == 256 && d2 == 5806,
          std::string("headerless ") + std::to_string(glove.size()) + "x" + std::to_string(glove.dim) +
              ", headered " + std::to_string(w2v.size()) + "x" + std::to_string(w2v.dim) + "; sidecars " +
              std::to_string(acoustic.at("u1").dim) + "/" + std::to_string(pooled.size()) + " dims fuse to " +
              std::to_string(d1) + " (256) and " + std::to_string(d2) + " (5806)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmslu acceptance suite"};
  fs::path workdir = fs::temp_directory_path() / "mmslu-acceptance";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for generated data and runs");
  app.add_option("--only", only, "Run only these criteria (1-9)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const fs::path&)>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"overfit capacity", overfit_capacity},
      {"multimodal gain", multimodal_gain},
      {"DSP oracle equivalence", dsp_oracle},
      {"metric oracle equivalence", metric_oracle},
      {"determinism", determinism},
      {"baseline equivalence", baseline_equivalence},
      {"schema fidelity", schema_fidelity},
      {"real-artifact ingestion", real_artifacts},
  };

  fs::remove_all(workdir);
  fs::create_directories(workdir);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second(workdir);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << number << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
