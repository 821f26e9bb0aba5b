#pragma once

/**
 * Minibatch training with Adam, plus greedy exact-match evaluation.
 *
 * One metrics line is written per optimizer step:
 *   step=<n> loss=<batch mean> val_acc=<last eval>
 * The eval metric (exact sequence match under greedy decoding) is
 * refreshed every eval_interval steps; between evals the last value is
 * repeated, and before the first it is 0. Identical seeds and inputs
 * give byte-identical logs.
 */

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "treedit/model/network.hpp"

namespace treedit::model {

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_steps = 5000;
  int eval_interval = 25;
  double target_acc = -1.0;  // >= 0: stop once the eval metric reaches it
  int patience = 0;          // > 0: stop after this many evals w/o a new best
  double divergence_loss = 1e4;
  uint64_t seed = 1;
};

struct TrainStats {
  int steps = 0;
  double last_loss = 0.0;
  double best_acc = 0.0;
  bool reached_target = false;
};

/// Fraction of examples whose greedy decode equals gold exactly
/// (0 for an empty set).
double exact_match(const ModelParams& p, const std::vector<PreparedExample>& set);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const ModelParams& shape);
  void step(ModelParams& params, const ModelParams& grads, const TrainConfig& cfg);

 private:
  ModelParams m_, v_;
  int t_ = 0;
};

/// Shuffles examples per epoch and applies dropout with the one seeded
/// RNG stream. Throws std::runtime_error when the loss diverges (NaN or
/// above divergence_loss), DataError on an empty training set.
TrainStats train_model(ModelParams& params, const std::vector<PreparedExample>& train_set,
                       const std::vector<PreparedExample>& eval_set, const TrainConfig& cfg,
                       std::ostream* metrics = nullptr);

}  // namespace treedit::model
