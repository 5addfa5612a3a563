#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmslu/labels.hpp"
#include "mmslu/matrix.hpp"
#include "mmslu/sidecar.hpp"

namespace mmslu {

struct Utterance {
  std::string id;
  std::string session;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;      // one per token
  std::optional<std::string> intent;  // absent for non-command utterances
  std::optional<std::string> acoustic_ref;
  std::optional<std::string> visual_cabin_ref;
  std::optional<std::string> visual_road_ref;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Corpus {
  LabelSet tags = default_tag_set();
  LabelSet intents = default_intent_set();
  std::vector<Utterance> utterances;

  std::size_t size() const { return utterances.size(); }
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct CorpusStats {
  std::size_t utterances = 0;
  std::size_t with_intent = 0;
  std::size_t tokens = 0;
  std::vector<std::pair<std::string, std::size_t>> intent_counts;  // label order
  std::vector<std::pair<std::string, std::size_t>> tag_counts;     // label order
};

/// Throws ValidationError naming the offending utterance.
void validate_corpus(const Corpus& corpus);
CorpusStats corpus_stats(const Corpus& corpus);

/// One JSON object per line with fields id, session, tokens, tags, intent,
/// acoustic_ref, visual_cabin_ref, visual_road_ref (nullable strings).
Corpus load_corpus(const std::filesystem::path& path, LabelSet tags = default_tag_set(),
                   LabelSet intents = default_intent_set());
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
std::string serialize_utterance(const Utterance& utterance);

/// Sorted distinct tokens.
std::vector<std::string> corpus_vocabulary(const Corpus& corpus);

Corpus subset(const Corpus& corpus, std::span<const std::size_t> indices);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// k disjoint test folds covering the corpus. Stratified mode deals each
/// intent class (non-command utterances form their own class) round-robin so
/// per-class counts per fold differ by at most one.
std::vector<Fold> kfold_split(const Corpus& corpus, std::size_t k, std::uint64_t seed,
                              bool stratified);

/// Single train/test partition with round(test_fraction * n) held out per
/// class (stratified) or overall.
Fold holdout_split(const Corpus& corpus, double test_fraction, std::uint64_t seed, bool stratified);

/// Per-token tags to B-/I- prefixed tags; adjacent equal non-O tags form one span.
std::vector<std::string> to_bio(std::span<const std::string> tags);

struct UtteranceFeatures {
  std::optional<Vector> acoustic;
  std::optional<Vector> visual_cabin;
  std::optional<Vector> visual_road;
};

enum class MissingFeaturePolicy { Strict, ZeroFill };

/// Sources left null are not attached at all.
struct FeatureSources {
  const FeatureMap* acoustic = nullptr;
  const FeatureMap* visual_cabin = nullptr;
  const FeatureMap* visual_road = nullptr;
  MissingFeaturePolicy acoustic_policy = MissingFeaturePolicy::Strict;
  MissingFeaturePolicy visual_policy = MissingFeaturePolicy::ZeroFill;
};

struct AttachedFeatures {
  std::vector<UtteranceFeatures> features;  // parallel to corpus.utterances
  std::size_t warnings = 0;
  std::vector<std::string> missing;  // "utterance-id: modality 'ref'"
};

/// Resolves each utterance's feature refs (a null ref counts as missing).
/// Strict modalities throw DataError naming the id; zero-fill modalities
/// substitute zeros and count a warning.
AttachedFeatures attach_features(const Corpus& corpus, const FeatureSources& sources);

}  // namespace mmslu
