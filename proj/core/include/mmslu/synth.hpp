#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmslu/data.hpp"
#include "mmslu/embeddings.hpp"
#include "mmslu/sidecar.hpp"

namespace mmslu {

enum class IntentDistribution { Uniform, Table1Proportional };

std::string to_string(IntentDistribution distribution);
IntentDistribution parse_intent_distribution(std::string_view text);

/// Intent counts of the in-cabin command corpus (1331 utterances), in
/// default intent-set order.
const std::vector<std::pair<std::string, std::size_t>>& table1_intent_counts();

/// Apportions n utterances over the default intents (largest remainder).
std::vector<std::size_t> apportion_intents(std::size_t n, IntentDistribution distribution);

struct GeneratorConfig {
  std::size_t n_utterances = 1000;
  IntentDistribution distribution = IntentDistribution::Uniform;
  /// Fraction of utterances drawn from templates shared by an ambiguous pair.
  double ambiguous_fraction = 0.0;
  std::vector<std::pair<std::string, std::string>> ambiguous_pairs = {{"Stop", "PullOver"},
                                                                      {"GoSlower", "GoFaster"}};
  std::size_t acoustic_dim = 32;
  /// Per-intent acoustic dimensions carrying the ambiguity signal. Empty
  /// means: equal consecutive blocks per intent in label order.
  std::map<std::string, std::vector<std::size_t>> signal_dims;
  double signal_shift = 2.0;
  double noise_std = 1.0;
  std::size_t visual_dim = 16;
  std::size_t max_frames = 3;
  std::size_t embedding_dim = 32;
  /// Share of the vocabulary present in the partial-coverage "speech" space.
  double speech_coverage = 0.8;
  /// Distinct token sequences per ambiguous pair.
  std::size_t shared_instances = 4;
  std::uint64_t seed = 1;

  /// Throws ConfigError on invalid settings.
  void validate() const;
  /// signal_dims with the default layout filled in.
  std::map<std::string, std::vector<std::size_t>> resolved_signal_dims() const;
};

struct SyntheticData {
  Corpus corpus;
  std::vector<bool> ambiguous;  // parallel to corpus.utterances
  FeatureMap acoustic;
  std::vector<FrameRow> cabin_frames;
  std::vector<FrameRow> road_frames;
  EmbeddingTable text_embeddings;    // full vocabulary coverage
  EmbeddingTable speech_embeddings;  // partial coverage
};

SyntheticData generate_synthetic(const GeneratorConfig& cfg);

struct SyntheticPaths {
  std::filesystem::path corpus;
  std::filesystem::path acoustic;
  std::filesystem::path visual_cabin;
  std::filesystem::path visual_road;
  std::filesystem::path text_embeddings;
  std::filesystem::path speech_embeddings;
};

/// corpus.jsonl, acoustic.tsv, visual_cabin.tsv, visual_road.tsv,
/// text.vec (headerless) and speech.vec (with a "count dim" header).
SyntheticPaths write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace mmslu
