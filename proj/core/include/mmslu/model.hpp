#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmslu/data.hpp"
#include "mmslu/embeddings.hpp"
#include "mmslu/labels.hpp"
#include "mmslu/layers.hpp"
#include "mmslu/lstm.hpp"
#include "mmslu/matrix.hpp"

namespace mmslu {

enum class UtteranceFeature { Acoustic, VisualCabin, VisualRoad };

std::string to_string(UtteranceFeature feature);
UtteranceFeature parse_utterance_feature(std::string_view text);

/// One utterance-level modality entering the intent classifier.
struct FeatureSpec {
  UtteranceFeature kind = UtteranceFeature::Acoustic;
  std::size_t input_dim = 0;
  std::size_t projection_dim = 128;  // 0 = raw concatenation
  std::size_t output_dim() const { return projection_dim > 0 ? projection_dim : input_dim; }
  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct FusionConfig {
  /// Enabled utterance-level features. Normalized to the order
  /// acoustic, visual_cabin, visual_road when a model is built.
  std::vector<FeatureSpec> features;
  std::size_t fused_extra_dim() const;
  bool enabled(UtteranceFeature kind) const;
  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

struct EmbeddingSpec {
  std::string name;
  std::size_t dim = 0;
  OovPolicy oov = OovPolicy::ZeroFill;
  friend bool operator==(const EmbeddingSpec&, const EmbeddingSpec&) = default;
};

struct ModelConfig {
  LabelSet tags = default_tag_set();
  LabelSet intents = default_intent_set();
  std::vector<EmbeddingSpec> spaces;
  VocabAlignment alignment = VocabAlignment::Union;
  std::size_t hidden_dim = 64;
  FusionConfig fusion;
  bool fine_tune_embeddings = false;
  /// Rows of the fine-tuned table (only used when fine_tune_embeddings).
  std::vector<std::string> tuned_vocabulary;

  std::size_t embedding_dim() const;
  /// Describes the spaces of an embedder, for building a config around it.
  static std::vector<EmbeddingSpec> describe(const CompositeEmbedder& embedder);
};

/// Every trainable tensor of the model. A gradient buffer is the same struct.
struct ModelParams {
  BiLstm level1_encoder;
  Dense level1_tags;
  BiLstm level2_encoder;
  Dense level2_tags;
  Dense intent_out;
  std::vector<Dense> projections;  // parallel to fusion features; empty when raw
  std::vector<Matrix> unk_rows;    // per space: 1 x dim for trainable UNK, else empty
  Matrix tuned_embeddings;         // |tuned vocabulary| x embedding_dim, or empty

  ModelParams zeros_like() const;
  /// Non-empty tensors in a fixed order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;
  std::size_t parameter_count() const;
};

struct FilterResult {
  std::vector<std::size_t> kept;  // original positions, ascending
  bool fallback = false;          // every tag was O, so all positions were kept
};

/// Keeps positions whose tag index is not O (index 0). An all-O sequence
/// keeps everything and sets the fallback flag.
FilterResult filter_tokens(std::span<const std::size_t> tags);
/// Same rule over token strings and tag names; returns the kept tokens.
std::vector<std::string> filter_tokens(std::span<const std::string> tokens,
                                       std::span<const std::string> tags, FilterResult* result);

struct JointOutput {
  Vector intent;                  // distribution over intents
  std::vector<Vector> tags;       // one distribution per filtered token
  Vector representation;          // [last forward state ; first backward state]
  Vector fused;                   // input to the intent layer
};

struct Prediction {
  std::string intent;
  Vector intent_distribution;
  std::vector<std::string> tags;  // Level-1 argmax per token
  std::vector<std::string> intent_keywords;
  bool fallback = false;
};

struct TrainingExample {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::size_t> tags;
  std::optional<std::size_t> intent;
  UtteranceFeatures features;
};

struct LossBreakdown {
  double level1 = 0.0;
  double intent = 0.0;
  double level2_tags = 0.0;
  double total = 0.0;
};

class HJoint2Model {
 public:
  HJoint2Model(ModelConfig config, std::shared_ptr<const CompositeEmbedder> embedder,
               std::uint64_t seed);

  /// A model with no utterance-level fusion at all.
  static HJoint2Model text_only(LabelSet tags, LabelSet intents, std::size_t hidden_dim,
                                std::shared_ptr<const CompositeEmbedder> embedder,
                                std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const CompositeEmbedder& embedder() const { return *embedder_; }
  std::shared_ptr<const CompositeEmbedder> embedder_ptr() const { return embedder_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  std::size_t parameter_count() const { return params_.parameter_count(); }

  Vector embed_token(std::string_view token) const;
  std::vector<Vector> embed_tokens(std::span<const std::string> tokens) const;

  /// Per-token Level-1 distributions over the tag set.
  std::vector<Vector> level1_tag(std::span<const std::string> tokens) const;

  /// [representation ; projected or raw utterance features] in the order
  /// acoustic, visual_cabin, visual_road. Absent features become zeros.
  Vector fuse(std::span<const double> representation, const UtteranceFeatures& features) const;

  JointOutput level2_joint(std::span<const std::string> filtered_tokens,
                           const UtteranceFeatures& features) const;

  Prediction predict(std::span<const std::string> tokens, const UtteranceFeatures& features) const;

  /// Training loss with gold-tag filtering. When `grads` is non-null the
  /// gradient of the total loss is accumulated into it.
  LossBreakdown loss_and_gradient(const TrainingExample& example, double lambda,
                                  ModelParams* grads) const;

 private:
  HJoint2Model(ModelConfig config, std::shared_ptr<const CompositeEmbedder> embedder);
  void check_embedder() const;
  std::vector<Vector> embed_positions(std::span<const std::string> tokens,
                                      std::span<const std::size_t> positions) const;
  void accumulate_embedding_grad(std::string_view token, std::span<const double> grad,
                                 ModelParams& grads) const;
  const std::optional<Vector>& feature_value(const UtteranceFeatures& f, UtteranceFeature kind) const;

  ModelConfig config_;
  std::shared_ptr<const CompositeEmbedder> embedder_;
  ModelParams params_;
  std::unordered_map<std::string, std::size_t> tuned_index_;

  friend HJoint2Model restore_model(ModelConfig, std::shared_ptr<const CompositeEmbedder>, ModelParams);
};

/// Rebuilds a model around given parameters (used by checkpoint loading).
HJoint2Model restore_model(ModelConfig config, std::shared_ptr<const CompositeEmbedder> embedder,
                           ModelParams params);

/// Converts a corpus plus attached features into training examples. Every
/// enabled modality must be present for every utterance (DataError naming
/// the id otherwise).
std::vector<TrainingExample> build_examples(const Corpus& corpus, const AttachedFeatures* features,
                                            const ModelConfig& config);

}  // namespace mmslu
