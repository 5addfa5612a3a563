#include "mmslu/model.hpp"

#include <algorithm>
#include <cmath>

#include "mmslu/error.hpp"
#include "mmslu/random.hpp"

namespace mmslu {

std::string to_string(UtteranceFeature feature) {
  switch (feature) {
    case UtteranceFeature::Acoustic: return "acoustic";
    case UtteranceFeature::VisualCabin: return "visual_cabin";
    case UtteranceFeature::VisualRoad: return "visual_road";
  }
  return "unknown";
}

UtteranceFeature parse_utterance_feature(std::string_view text) {
  if (text == "acoustic") return UtteranceFeature::Acoustic;
  if (text == "visual_cabin") return UtteranceFeature::VisualCabin;
  if (text == "visual_road") return UtteranceFeature::VisualRoad;
  throw ConfigError("unknown utterance feature '" + std::string(text) +
                    "' (expected acoustic, visual_cabin or visual_road)");
}

std::size_t FusionConfig::fused_extra_dim() const {
  std::size_t total = 0;
  for (const auto& f : features) total += f.output_dim();
  return total;
}

bool FusionConfig::enabled(UtteranceFeature kind) const {
  return std::any_of(features.begin(), features.end(),
                     [kind](const FeatureSpec& f) { return f.kind == kind; });
}

std::size_t ModelConfig::embedding_dim() const {
  std::size_t total = 0;
  for (const auto& s : spaces) total += s.dim;
  return total;
}

std::vector<EmbeddingSpec> ModelConfig::describe(const CompositeEmbedder& embedder) {
  std::vector<EmbeddingSpec> specs;
  for (std::size_t s = 0; s < embedder.space_count(); ++s) {
    specs.push_back({embedder.space(s).name, embedder.space(s).dim, embedder.policy(s)});
  }
  return specs;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.level1_encoder = level1_encoder.zeros_like();
  z.level1_tags = level1_tags.zeros_like();
  z.level2_encoder = level2_encoder.zeros_like();
  z.level2_tags = level2_tags.zeros_like();
  z.intent_out = intent_out.zeros_like();
  for (const auto& p : projections) z.projections.push_back(p.zeros_like());
  for (const auto& u : unk_rows) z.unk_rows.emplace_back(u.rows(), u.cols());
  z.tuned_embeddings = Matrix(tuned_embeddings.rows(), tuned_embeddings.cols());
  return z;
}

namespace {

template <class Params, class Ptr>
void gather(Params& p, std::vector<Ptr>& out) {
  p.level1_encoder.collect(out);
  p.level1_tags.collect(out);
  p.level2_encoder.collect(out);
  p.level2_tags.collect(out);
  p.intent_out.collect(out);
  for (auto& proj : p.projections) {
    if (!proj.weight.empty()) proj.collect(out);
  }
  for (auto& u : p.unk_rows) {
    if (!u.empty()) out.push_back(&u);
  }
  if (!p.tuned_embeddings.empty()) out.push_back(&p.tuned_embeddings);
}

}  // namespace

std::vector<Matrix*> ModelParams::tensors() {
  std::vector<Matrix*> out;
  gather(*this, out);
  return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
  std::vector<const Matrix*> out;
  gather(*this, out);
  return out;
}

std::vector<std::string> ModelParams::tensor_names() const {
  static const char* cell[] = {"w_i", "w_f", "w_o", "w_g", "u_i", "u_f",
                               "u_o", "u_g", "b_i", "b_f", "b_o", "b_g"};
  std::vector<std::string> names;
  const auto encoder = [&names](const std::string& prefix) {
    for (const char* dir : {"fwd", "bwd"}) {
      for (const char* n : cell) names.push_back(prefix + "." + dir + "." + n);
    }
  };
  const auto dense = [&names](const std::string& prefix) {
    names.push_back(prefix + ".weight");
    names.push_back(prefix + ".bias");
  };
  encoder("level1.encoder");
  dense("level1.tags");
  encoder("level2.encoder");
  dense("level2.tags");
  dense("level2.intent");
  for (std::size_t k = 0; k < projections.size(); ++k) {
    if (!projections[k].weight.empty()) dense("fusion.projection" + std::to_string(k));
  }
  for (std::size_t s = 0; s < unk_rows.size(); ++s) {
    if (!unk_rows[s].empty()) names.push_back("embedding.unk" + std::to_string(s));
  }
  if (!tuned_embeddings.empty()) names.push_back("embedding.tuned");
  return names;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const Matrix* m : tensors()) total += m->size();
  return total;
}

FilterResult filter_tokens(std::span<const std::size_t> tags) {
  FilterResult result;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t] != 0) result.kept.push_back(t);
  }
  if (result.kept.empty()) {
    result.fallback = true;
    for (std::size_t t = 0; t < tags.size(); ++t) result.kept.push_back(t);
  }
  return result;
}

std::vector<std::string> filter_tokens(std::span<const std::string> tokens,
                                       std::span<const std::string> tags, FilterResult* result) {
  if (tokens.size() != tags.size()) {
    throw ShapeError("filter_tokens: " + std::to_string(tokens.size()) + " tokens but " +
                     std::to_string(tags.size()) + " tags");
  }
  std::vector<std::size_t> indices(tags.size());
  for (std::size_t t = 0; t < tags.size(); ++t) indices[t] = tags[t] == kOutsideTag ? 0 : 1;
  FilterResult local = filter_tokens(indices);
  std::vector<std::string> kept;
  for (std::size_t t : local.kept) kept.push_back(tokens[t]);
  if (result) *result = std::move(local);
  return kept;
}

HJoint2Model::HJoint2Model(ModelConfig config, std::shared_ptr<const CompositeEmbedder> embedder)
    : config_(std::move(config)), embedder_(std::move(embedder)) {
  if (!embedder_) throw ConfigError("model requires an embedder");
  if (config_.spaces.empty()) {
    config_.spaces = ModelConfig::describe(*embedder_);
    config_.alignment = embedder_->alignment();
  }
  check_embedder();
  if (config_.hidden_dim == 0) throw ConfigError("hidden_dim must be positive");
  if (config_.tags.size() == 0 || config_.tags.at(0) != kOutsideTag) {
    throw ConfigError("tag set must start with \"O\"");
  }
  if (config_.intents.size() == 0) throw ConfigError("intent set is empty");
  auto& features = config_.fusion.features;
  std::stable_sort(features.begin(), features.end(),
                   [](const FeatureSpec& a, const FeatureSpec& b) { return a.kind < b.kind; });
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (features[k].input_dim == 0) {
      throw ConfigError("utterance feature " + to_string(features[k].kind) + " has zero dimension");
    }
    if (k > 0 && features[k].kind == features[k - 1].kind) {
      throw ConfigError("utterance feature " + to_string(features[k].kind) + " enabled twice");
    }
  }
  if (config_.fine_tune_embeddings) {
    for (std::size_t r = 0; r < config_.tuned_vocabulary.size(); ++r) {
      if (!tuned_index_.emplace(config_.tuned_vocabulary[r], r).second) {
        throw ConfigError("duplicate token '" + config_.tuned_vocabulary[r] +
                          "' in fine-tuning vocabulary");
      }
    }
  } else {
    config_.tuned_vocabulary.clear();
  }
}

HJoint2Model::HJoint2Model(ModelConfig config, std::shared_ptr<const CompositeEmbedder> embedder,
                           std::uint64_t seed)
    : HJoint2Model(std::move(config), std::move(embedder)) {
  const std::size_t D = config_.embedding_dim();
  const std::size_t H = config_.hidden_dim;
  const std::size_t T = config_.tags.size();
  const std::size_t I = config_.intents.size();
  Rng rng(seed);
  params_.level1_encoder = BiLstm::initialized(D, H, rng);
  params_.level1_tags = Dense(2 * H, T, rng);
  params_.level2_encoder = BiLstm::initialized(D, H, rng);
  params_.level2_tags = Dense(2 * H, T, rng);
  params_.intent_out = Dense(2 * H + config_.fusion.fused_extra_dim(), I, rng);
  // Fusion and embedding tensors draw from separate streams so that enabling
  // them never changes the text-path initialization.
  for (std::size_t k = 0; k < config_.fusion.features.size(); ++k) {
    const FeatureSpec& spec = config_.fusion.features[k];
    if (spec.projection_dim > 0) {
      Rng projection_rng = Rng::derive(seed, 100 + static_cast<std::uint64_t>(spec.kind));
      params_.projections.emplace_back(spec.input_dim, spec.projection_dim, projection_rng);
    } else {
      params_.projections.emplace_back();
    }
  }
  for (std::size_t s = 0; s < config_.spaces.size(); ++s) {
    if (config_.spaces[s].oov == OovPolicy::TrainableUnk) {
      Rng unk_rng = Rng::derive(seed, 200 + s);
      params_.unk_rows.push_back(glorot_init(1, config_.spaces[s].dim, unk_rng));
    } else {
      params_.unk_rows.emplace_back();
    }
  }
  if (config_.fine_tune_embeddings && !config_.tuned_vocabulary.empty()) {
    // Rows start from the frozen composite lookup.
    Matrix tuned(config_.tuned_vocabulary.size(), D);
    for (std::size_t r = 0; r < config_.tuned_vocabulary.size(); ++r) {
      const Vector v = embed_token(config_.tuned_vocabulary[r]);
      std::copy(v.begin(), v.end(), tuned.row(r).begin());
    }
    params_.tuned_embeddings = std::move(tuned);
  }
}

HJoint2Model HJoint2Model::text_only(LabelSet tags, LabelSet intents, std::size_t hidden_dim,
                                     std::shared_ptr<const CompositeEmbedder> embedder,
                                     std::uint64_t seed) {
  ModelConfig config;
  config.tags = std::move(tags);
  config.intents = std::move(intents);
  config.hidden_dim = hidden_dim;
  return HJoint2Model(std::move(config), std::move(embedder), seed);
}

HJoint2Model restore_model(ModelConfig config, std::shared_ptr<const CompositeEmbedder> embedder,
                           ModelParams params) {
  HJoint2Model model(config, embedder, 0);
  const auto expected = model.params_.tensors();
  const auto given = static_cast<const ModelParams&>(params).tensors();
  const auto names = model.params_.tensor_names();
  if (expected.size() != given.size()) {
    throw ConfigError("parameter set has " + std::to_string(given.size()) +
                      " tensors, configuration implies " + std::to_string(expected.size()));
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (!expected[k]->same_shape(*given[k])) {
      throw ConfigError("tensor " + names[k] + " has shape " + std::to_string(given[k]->rows()) +
                        "x" + std::to_string(given[k]->cols()) + ", expected " +
                        std::to_string(expected[k]->rows()) + "x" +
                        std::to_string(expected[k]->cols()));
    }
  }
  model.params_ = std::move(params);
  return model;
}

void HJoint2Model::check_embedder() const {
  const auto actual = ModelConfig::describe(*embedder_);
  if (actual != config_.spaces || embedder_->alignment() != config_.alignment) {
    std::string expected, got;
    for (const auto& s : config_.spaces) expected += " " + s.name + ":" + std::to_string(s.dim);
    for (const auto& s : actual) got += " " + s.name + ":" + std::to_string(s.dim);
    throw ConfigError("embedding spaces do not match the model configuration (model:" + expected +
                      "; embedder:" + got + ")");
  }
}

Vector HJoint2Model::embed_token(std::string_view token) const {
  if (!tuned_index_.empty() && !params_.tuned_embeddings.empty()) {
    if (auto it = tuned_index_.find(std::string(token)); it != tuned_index_.end()) {
      auto row = params_.tuned_embeddings.row(it->second);
      return Vector(row.begin(), row.end());
    }
  }
  Vector out(embedder_->total_dim(), 0.0);
  const auto rows = embedder_->locate(token);
  for (std::size_t s = 0; s < rows.size(); ++s) {
    std::span<const double> source;
    if (rows[s]) {
      source = embedder_->space(s).row(*rows[s]);
    } else if (config_.spaces[s].oov == OovPolicy::TrainableUnk && !params_.unk_rows.empty() &&
               !params_.unk_rows[s].empty()) {
      source = params_.unk_rows[s].values();
    } else {
      continue;
    }
    std::copy(source.begin(), source.end(),
              out.begin() + static_cast<std::ptrdiff_t>(embedder_->offset(s)));
  }
  return out;
}

std::vector<Vector> HJoint2Model::embed_tokens(std::span<const std::string> tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) out.push_back(embed_token(token));
  return out;
}

std::vector<Vector> HJoint2Model::embed_positions(std::span<const std::string> tokens,
                                                  std::span<const std::size_t> positions) const {
  std::vector<Vector> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) out.push_back(embed_token(tokens[p]));
  return out;
}

void HJoint2Model::accumulate_embedding_grad(std::string_view token, std::span<const double> grad,
                                             ModelParams& grads) const {
  if (!tuned_index_.empty() && !params_.tuned_embeddings.empty()) {
    if (auto it = tuned_index_.find(std::string(token)); it != tuned_index_.end()) {
      auto row = grads.tuned_embeddings.row(it->second);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += grad[k];
      return;
    }
  }
  const auto rows = embedder_->locate(token);
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s] || params_.unk_rows[s].empty()) continue;
    auto target = grads.unk_rows[s].values();
    const std::size_t offset = embedder_->offset(s);
    for (std::size_t k = 0; k < target.size(); ++k) target[k] += grad[offset + k];
  }
}

const std::optional<Vector>& HJoint2Model::feature_value(const UtteranceFeatures& f,
                                                         UtteranceFeature kind) const {
  switch (kind) {
    case UtteranceFeature::Acoustic: return f.acoustic;
    case UtteranceFeature::VisualCabin: return f.visual_cabin;
    case UtteranceFeature::VisualRoad: return f.visual_road;
  }
  return f.acoustic;
}

namespace {

struct FusionTrace {
  std::vector<Vector> inputs;   // raw feature vector per enabled feature
  std::vector<Vector> outputs;  // tanh(projection) or the raw vector
  Vector fused;
};

}  // namespace

Vector HJoint2Model::fuse(std::span<const double> representation,
                          const UtteranceFeatures& features) const {
  if (representation.size() != 2 * config_.hidden_dim) {
    throw ShapeError("fuse: representation has dim " + std::to_string(representation.size()) +
                     ", expected " + std::to_string(2 * config_.hidden_dim));
  }
  Vector fused(representation.begin(), representation.end());
  for (std::size_t k = 0; k < config_.fusion.features.size(); ++k) {
    const FeatureSpec& spec = config_.fusion.features[k];
    const auto& value = feature_value(features, spec.kind);
    Vector input = value ? *value : Vector(spec.input_dim, 0.0);
    if (input.size() != spec.input_dim) {
      throw ShapeError("fuse: " + to_string(spec.kind) + " vector has dim " +
                       std::to_string(input.size()) + ", model expects " +
                       std::to_string(spec.input_dim));
    }
    if (spec.projection_dim > 0) {
      Vector projected = params_.projections[k].forward(input);
      for (double& v : projected) v = std::tanh(v);
      fused.insert(fused.end(), projected.begin(), projected.end());
    } else {
      fused.insert(fused.end(), input.begin(), input.end());
    }
  }
  return fused;
}

std::vector<Vector> HJoint2Model::level1_tag(std::span<const std::string> tokens) const {
  if (tokens.empty()) throw EmptyInputError("level1_tag: empty utterance");
  const BiLstmTrace trace = bilstm_trace(params_.level1_encoder, embed_tokens(tokens));
  std::vector<Vector> distributions;
  distributions.reserve(tokens.size());
  for (const auto& out : trace.outputs) distributions.push_back(softmax(params_.level1_tags.forward(out)));
  return distributions;
}

JointOutput HJoint2Model::level2_joint(std::span<const std::string> filtered_tokens,
                                       const UtteranceFeatures& features) const {
  if (filtered_tokens.empty()) throw EmptyInputError("level2_joint: empty filtered sequence");
  const std::size_t H = config_.hidden_dim;
  const BiLstmTrace trace = bilstm_trace(params_.level2_encoder, embed_tokens(filtered_tokens));
  JointOutput out;
  out.representation.reserve(2 * H);
  const auto& last = trace.outputs.back();
  const auto& first = trace.outputs.front();
  out.representation.insert(out.representation.end(), last.begin(), last.begin() + static_cast<std::ptrdiff_t>(H));
  out.representation.insert(out.representation.end(), first.begin() + static_cast<std::ptrdiff_t>(H), first.end());
  out.fused = fuse(out.representation, features);
  out.intent = softmax(params_.intent_out.forward(out.fused));
  for (const auto& o : trace.outputs) out.tags.push_back(softmax(params_.level2_tags.forward(o)));
  return out;
}

Prediction HJoint2Model::predict(std::span<const std::string> tokens,
                                 const UtteranceFeatures& features) const {
  const auto distributions = level1_tag(tokens);
  std::vector<std::size_t> tag_ids;
  Prediction prediction;
  const auto keyword = config_.tags.find(kIntentKeywordTag);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    tag_ids.push_back(argmax(distributions[t]));
    prediction.tags.push_back(config_.tags.at(tag_ids.back()));
    if (keyword && tag_ids.back() == *keyword) prediction.intent_keywords.push_back(tokens[t]);
  }
  const FilterResult filter = filter_tokens(tag_ids);
  std::vector<std::string> filtered;
  for (std::size_t t : filter.kept) filtered.push_back(tokens[t]);
  const JointOutput joint = level2_joint(filtered, features);
  prediction.fallback = filter.fallback;
  prediction.intent_distribution = joint.intent;
  prediction.intent = config_.intents.at(argmax(joint.intent));
  return prediction;
}

LossBreakdown HJoint2Model::loss_and_gradient(const TrainingExample& ex, double lambda,
                                              ModelParams* grads) const {
  const std::size_t n = ex.tokens.size();
  if (n == 0) throw EmptyInputError("training example '" + ex.id + "' has no tokens");
  if (ex.tags.size() != n) {
    throw ShapeError("training example '" + ex.id + "' has mismatched tags");
  }
  const std::size_t H = config_.hidden_dim;
  const bool want_embedding_grads =
      grads != nullptr && (!params_.tuned_embeddings.empty() ||
                           std::any_of(params_.unk_rows.begin(), params_.unk_rows.end(),
                                       [](const Matrix& m) { return !m.empty(); }));
  LossBreakdown loss;

  // Level 1: tag every token.
  const std::vector<Vector> inputs = embed_tokens(ex.tokens);
  const BiLstmTrace trace1 = bilstm_trace(params_.level1_encoder, inputs);
  std::vector<Vector> d_out1(n, Vector(2 * H, 0.0));
  for (std::size_t t = 0; t < n; ++t) {
    const Vector probs = softmax(params_.level1_tags.forward(trace1.outputs[t]));
    loss.level1 += cross_entropy(probs, ex.tags[t]) / static_cast<double>(n);
    if (grads) {
      Vector d = softmax_cross_entropy_grad(probs, ex.tags[t]);
      for (double& v : d) v /= static_cast<double>(n);
      params_.level1_tags.backward(trace1.outputs[t], d, grads->level1_tags, d_out1[t]);
    }
  }
  std::vector<Vector> d_inputs(n, Vector(inputs.front().size(), 0.0));
  if (grads) {
    auto dx = bilstm_backward(params_.level1_encoder, trace1, d_out1, grads->level1_encoder);
    if (want_embedding_grads) d_inputs = std::move(dx);
  }

  // Level 2 only for command utterances, filtered by the gold tags.
  if (ex.intent) {
    const FilterResult filter = filter_tokens(ex.tags);
    const std::size_t m = filter.kept.size();
    std::vector<Vector> inputs2;
    inputs2.reserve(m);
    for (std::size_t p : filter.kept) inputs2.push_back(inputs[p]);
    const BiLstmTrace trace2 = bilstm_trace(params_.level2_encoder, inputs2);

    Vector representation;
    representation.reserve(2 * H);
    representation.insert(representation.end(), trace2.outputs.back().begin(),
                          trace2.outputs.back().begin() + static_cast<std::ptrdiff_t>(H));
    representation.insert(representation.end(),
                          trace2.outputs.front().begin() + static_cast<std::ptrdiff_t>(H),
                          trace2.outputs.front().end());

    FusionTrace fusion;
    fusion.fused = representation;
    for (std::size_t k = 0; k < config_.fusion.features.size(); ++k) {
      const FeatureSpec& spec = config_.fusion.features[k];
      const auto& value = feature_value(ex.features, spec.kind);
      fusion.inputs.push_back(value ? *value : Vector(spec.input_dim, 0.0));
      if (fusion.inputs.back().size() != spec.input_dim) {
        throw ShapeError("example '" + ex.id + "': " + to_string(spec.kind) + " vector has dim " +
                         std::to_string(fusion.inputs.back().size()) + ", model expects " +
                         std::to_string(spec.input_dim));
      }
      if (spec.projection_dim > 0) {
        Vector projected = params_.projections[k].forward(fusion.inputs.back());
        for (double& v : projected) v = std::tanh(v);
        fusion.outputs.push_back(std::move(projected));
      } else {
        fusion.outputs.push_back(fusion.inputs.back());
      }
      fusion.fused.insert(fusion.fused.end(), fusion.outputs.back().begin(),
                          fusion.outputs.back().end());
    }

    const Vector intent_probs = softmax(params_.intent_out.forward(fusion.fused));
    loss.intent = cross_entropy(intent_probs, *ex.intent);

    std::vector<Vector> d_out2(m, Vector(2 * H, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t gold = ex.tags[filter.kept[j]];
      const Vector probs = softmax(params_.level2_tags.forward(trace2.outputs[j]));
      loss.level2_tags += cross_entropy(probs, gold) / static_cast<double>(m);
      if (grads) {
        Vector d = softmax_cross_entropy_grad(probs, gold);
        for (double& v : d) v *= lambda / static_cast<double>(m);
        params_.level2_tags.backward(trace2.outputs[j], d, grads->level2_tags, d_out2[j]);
      }
    }

    if (grads) {
      const Vector d_logits = softmax_cross_entropy_grad(intent_probs, *ex.intent);
      Vector d_fused(fusion.fused.size(), 0.0);
      params_.intent_out.backward(fusion.fused, d_logits, grads->intent_out, d_fused);
      for (std::size_t k = 0; k < H; ++k) {
        d_out2[m - 1][k] += d_fused[k];
        d_out2[0][H + k] += d_fused[H + k];
      }
      std::size_t offset = 2 * H;
      for (std::size_t k = 0; k < config_.fusion.features.size(); ++k) {
        const FeatureSpec& spec = config_.fusion.features[k];
        const std::size_t width = spec.output_dim();
        if (spec.projection_dim > 0) {
          Vector d_pre(width);
          for (std::size_t j = 0; j < width; ++j) {
            const double y = fusion.outputs[k][j];
            d_pre[j] = d_fused[offset + j] * (1.0 - y * y);
          }
          params_.projections[k].backward(fusion.inputs[k], d_pre, grads->projections[k], {});
        }
        offset += width;
      }
      auto dx2 = bilstm_backward(params_.level2_encoder, trace2, d_out2, grads->level2_encoder);
      if (want_embedding_grads) {
        for (std::size_t j = 0; j < m; ++j) {
          auto& target = d_inputs[filter.kept[j]];
          for (std::size_t k = 0; k < target.size(); ++k) target[k] += dx2[j][k];
        }
      }
    }
  }

  if (want_embedding_grads) {
    for (std::size_t t = 0; t < n; ++t) accumulate_embedding_grad(ex.tokens[t], d_inputs[t], *grads);
  }
  loss.total = loss.level1 + loss.intent + lambda * loss.level2_tags;
  return loss;
}

std::vector<TrainingExample> build_examples(const Corpus& corpus, const AttachedFeatures* features,
                                            const ModelConfig& config) {
  if (!(corpus.tags == config.tags)) {
    throw ConfigError("corpus tag set (" + corpus.tags.joined() + ") differs from the model's (" +
                      config.tags.joined() + ")");
  }
  if (!(corpus.intents == config.intents)) {
    throw ConfigError("corpus intent set (" + corpus.intents.joined() +
                      ") differs from the model's (" + config.intents.joined() + ")");
  }
  if (features && features->features.size() != corpus.size()) {
    throw ShapeError("attached features do not line up with the corpus");
  }
  std::vector<TrainingExample> examples;
  examples.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Utterance& u = corpus.utterances[i];
    TrainingExample ex;
    ex.id = u.id;
    ex.tokens = u.tokens;
    for (const auto& tag : u.tags) {
      auto idx = config.tags.find(tag);
      if (!idx) throw ValidationError("utterance '" + u.id + "' uses unknown tag '" + tag + "'");
      ex.tags.push_back(*idx);
    }
    if (u.intent) {
      auto idx = config.intents.find(*u.intent);
      if (!idx) throw ValidationError("utterance '" + u.id + "' uses unknown intent '" + *u.intent + "'");
      ex.intent = *idx;
    }
    if (features) ex.features = features->features[i];
    for (const auto& spec : config.fusion.features) {
      const std::optional<Vector>* value = nullptr;
      const std::optional<std::string>* ref = nullptr;
      switch (spec.kind) {
        case UtteranceFeature::Acoustic: value = &ex.features.acoustic; ref = &u.acoustic_ref; break;
        case UtteranceFeature::VisualCabin: value = &ex.features.visual_cabin; ref = &u.visual_cabin_ref; break;
        case UtteranceFeature::VisualRoad: value = &ex.features.visual_road; ref = &u.visual_road_ref; break;
      }
      if (!value->has_value()) {
        throw DataError("utterance '" + u.id + "' is missing " + to_string(spec.kind) +
                        " features (ref '" + (ref->has_value() ? **ref : std::string("<null>")) + "')");
      }
      if ((*value)->size() != spec.input_dim) {
        throw DataError("utterance '" + u.id + "': " + to_string(spec.kind) + " vector has dim " +
                        std::to_string((*value)->size()) + ", expected " +
                        std::to_string(spec.input_dim));
      }
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

}  // namespace mmslu
