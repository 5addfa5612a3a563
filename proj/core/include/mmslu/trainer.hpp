#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mmslu/model.hpp"
#include "mmslu/optim.hpp"

namespace mmslu {

struct TrainHyper {
  std::size_t max_epochs = 300;
  std::size_t patience = 10;
  double lambda = 1.0;
  AdamConfig adam;
  std::uint64_t seed = 1;  // shuffle order
  bool stop_at_perfect_dev = false;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_micro_f1 = 0.0;
  double best_dev_f1 = 0.0;
};

struct TrainResult {
  HJoint2Model model;  // parameters of the best dev epoch
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Per-utterance Adam updates in a seeded shuffle order. Stops after
/// `patience` epochs without dev improvement, or (optionally) as soon as
/// dev reaches 1.
/// An empty dev set means the training set is used for model selection.
TrainResult train(HJoint2Model model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> dev_set, const TrainHyper& hyper,
                  const EpochCallback& on_epoch = {});

/// Predicted intents for the command utterances of `examples`, in order.
std::vector<std::string> predict_intents(const HJoint2Model& model,
                                         std::span<const TrainingExample> examples);
/// Intent micro-F1 over command utterances (0 when there are none).
double intent_micro_f1(const HJoint2Model& model, std::span<const TrainingExample> examples);

/// One history row per line: epoch, train_loss, dev_micro_f1, best_dev_f1.
std::string format_history(std::span<const EpochRecord> history);

}  // namespace mmslu
