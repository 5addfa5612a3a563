#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmslu/acoustic.hpp"
#include "mmslu/cli/run_config.hpp"
#include "mmslu/metrics.hpp"
#include "mmslu/synth.hpp"

namespace mmslu::cli {

/// Everything a run needs before training: loaded data, attached features,
/// the model configuration and the split (indices into corpus).
struct PreparedRun {
  Corpus corpus;
  std::shared_ptr<const CompositeEmbedder> embedder;
  AttachedFeatures features;
  ModelConfig model_config;
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

PreparedRun prepare_run(const RunConfig& config);

/// Seeds derived from the run seed for model init and shuffling.
std::uint64_t init_seed(std::uint64_t run_seed);
std::uint64_t shuffle_seed(std::uint64_t run_seed);

struct GenSynthOutcome {
  SyntheticData data;
  SyntheticPaths paths;
};
GenSynthOutcome cmd_gen_synth(const GeneratorConfig& config, const std::filesystem::path& out_dir,
                              std::ostream& out);
GeneratorConfig parse_generator_config(const nlohmann::json& j);

void cmd_validate_corpus(const std::filesystem::path& corpus, std::ostream& out);
void cmd_validate_run(const RunConfig& config, std::ostream& out);

/// Manifest lines are "id<TAB>wav path"; relative paths resolve against the
/// manifest directory.
void cmd_extract_acoustic(const std::filesystem::path& manifest, const std::filesystem::path& out_path,
                          const LldConfig& lld, std::ostream& out);

void cmd_pool_visual(const std::filesystem::path& frames, View view, PoolPolicy policy,
                     const std::filesystem::path& out_path, std::ostream& out);

struct TrainOutcome {
  TrainResult result;
  std::filesystem::path checkpoint;
  std::filesystem::path history;
};
/// Writes model.ckpt, history.tsv and train.log (the only file with
/// timestamps) into the run's output directory.
TrainOutcome cmd_train(const RunConfig& config, std::ostream& out);

struct EvalOutcome {
  IntentReport intent;
  Metrics slots_token;
  Metrics slots_span;
  nlohmann::ordered_json row;
};
/// Scores the test split. Writes eval.json and eval.txt.
EvalOutcome cmd_eval(const RunConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                     std::ostream& out);

struct AblateOutcome {
  AblationReport report;
  std::size_t failures = 0;
  int first_failure_code = 0;
};
/// Trains and evaluates each config in order; failed runs become notes.
/// `seed` overrides every config's seed when set. Writes ablation.txt and
/// ablation.jsonl into out_dir.
AblateOutcome cmd_ablate(std::span<const RunConfig> configs, const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed, std::ostream& out);

void cmd_embed_info(std::span<const EmbeddingSource> sources,
                    const std::optional<std::filesystem::path>& corpus, std::ostream& out);

/// 0 ok, 2 config, 3 data, 4 numeric, 5 io, 1 anything else.
int exit_code_for(const std::exception& e);

/// Full command-line entry point.
int run(int argc, char** argv);

}  // namespace mmslu::cli
