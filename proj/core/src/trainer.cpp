#include "mmslu/trainer.hpp"

#include <cmath>
#include <numeric>

#include "mmslu/error.hpp"
#include "mmslu/random.hpp"
#include "mmslu/text_format.hpp"

namespace mmslu {

std::vector<std::string> predict_intents(const HJoint2Model& model,
                                         std::span<const TrainingExample> examples) {
  std::vector<std::string> out;
  for (const auto& ex : examples) {
    if (ex.intent) out.push_back(model.predict(ex.tokens, ex.features).intent);
  }
  return out;
}

double intent_micro_f1(const HJoint2Model& model, std::span<const TrainingExample> examples) {
  std::size_t scored = 0, correct = 0;
  for (const auto& ex : examples) {
    if (!ex.intent) continue;
    ++scored;
    if (model.predict(ex.tokens, ex.features).intent == model.config().intents.at(*ex.intent)) {
      ++correct;
    }
  }
  // Single-label: pooled P = R = accuracy.
  return scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
}

TrainResult train(HJoint2Model model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> dev_set, const TrainHyper& hyper,
                  const EpochCallback& on_epoch) {
  if (train_set.empty()) throw EmptyInputError("training set is empty");
  if (hyper.max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (dev_set.empty()) dev_set = train_set;

  ModelParams grads = model.params().zeros_like();
  const std::vector<Matrix*> params = model.params().tensors();
  const std::vector<Matrix*> grad_tensors = grads.tensors();
  const std::vector<const Matrix*> grad_view(grad_tensors.begin(), grad_tensors.end());
  AdamState adam = make_adam_state(grad_view, hyper.adam);

  Rng rng(hyper.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{model, {}, 0, false};
  double best = -1.0;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t idx : order) {
      for (Matrix* g : grad_tensors) g->fill(0.0);
      const LossBreakdown loss = model.loss_and_gradient(train_set[idx], hyper.lambda, &grads);
      if (!std::isfinite(loss.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " on '" +
                           train_set[idx].id + "'");
      }
      total += loss.total;
      adam_step(params, grad_view, adam);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = total / static_cast<double>(train_set.size());
    record.dev_micro_f1 = intent_micro_f1(model, dev_set);
    if (record.dev_micro_f1 > best) {
      best = record.dev_micro_f1;
      result.best_epoch = epoch;
      result.model = model;
      stale = 0;
    } else {
      ++stale;
    }
    record.best_dev_f1 = best;
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if ((hyper.stop_at_perfect_dev && best >= 1.0) || stale >= hyper.patience) {
      result.early_stopped = epoch < hyper.max_epochs;
      break;
    }
  }
  return result;
}

std::string format_history(std::span<const EpochRecord> history) {
  std::string out = "epoch\ttrain_loss\tdev_micro_f1\tbest_dev_f1\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "\t" + format_real(r.train_loss) + "\t" +
           format_real(r.dev_micro_f1) + "\t" + format_real(r.best_dev_f1) + "\n";
  }
  return out;
}

}  // namespace mmslu
