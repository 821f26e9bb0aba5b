#include "treedit/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace treedit::model {

double exact_match(const ModelParams& p, const std::vector<PreparedExample>& set) {
  if (set.empty()) return 0.0;
  int hit = 0;
  for (const PreparedExample& ex : set) {
    if (predict_greedy(p, ex) == ex.gold) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(set.size());
}

AdamOptimizer::AdamOptimizer(const ModelParams& shape)
    : m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void AdamOptimizer::step(ModelParams& params, const ModelParams& grads, const TrainConfig& cfg) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t_);

  std::vector<Eigen::MatrixXd*> pt, mt, vt;
  std::vector<const Eigen::MatrixXd*> gt;
  params.visit([&](const char*, Eigen::MatrixXd& t) { pt.push_back(&t); });
  m_.visit([&](const char*, Eigen::MatrixXd& t) { mt.push_back(&t); });
  v_.visit([&](const char*, Eigen::MatrixXd& t) { vt.push_back(&t); });
  grads.visit([&](const char*, const Eigen::MatrixXd& t) { gt.push_back(&t); });

  for (size_t i = 0; i < pt.size(); ++i) {
    Eigen::MatrixXd& m = *mt[i];
    Eigen::MatrixXd& v = *vt[i];
    const Eigen::MatrixXd& g = *gt[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = (cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square()).matrix();
    pt[i]->array() -=
        cfg.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.adam_eps);
  }
}

TrainStats train_model(ModelParams& params, const std::vector<PreparedExample>& train_set,
                       const std::vector<PreparedExample>& eval_set, const TrainConfig& cfg,
                       std::ostream* metrics) {
  if (train_set.empty()) throw DataError("training set is empty");

  std::mt19937_64 rng(cfg.seed);
  AdamOptimizer opt(params);
  ModelParams grads = params.zeros_like();

  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();  // forces a shuffle before the first batch

  TrainStats stats;
  double val = 0.0;
  int evals_since_best = 0;
  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(train_set.size()));

  for (int step = 1; step <= cfg.max_steps; ++step) {
    grads.visit([](const char*, Eigen::MatrixXd& t) { t.setZero(); });
    double batch_loss = 0.0;
    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch_loss += forward_loss(params, train_set[order[cursor++]], &grads, &rng);
    }
    batch_loss /= batch;
    grads.visit([&](const char*, Eigen::MatrixXd& t) { t /= batch; });
    if (!std::isfinite(batch_loss) || batch_loss > cfg.divergence_loss) {
      throw std::runtime_error("training diverged at step " + std::to_string(step) +
                               " (loss=" + std::to_string(batch_loss) + ")");
    }
    opt.step(params, grads, cfg);
    stats.steps = step;
    stats.last_loss = batch_loss;

    bool evaled = false;
    if (cfg.eval_interval > 0 && step % cfg.eval_interval == 0) {
      val = exact_match(params, eval_set);
      evaled = true;
      if (val > stats.best_acc) {
        stats.best_acc = val;
        evals_since_best = 0;
      } else {
        ++evals_since_best;
      }
    }
    if (metrics) {
      char line[96];
      std::snprintf(line, sizeof line, "step=%d loss=%.6f val_acc=%.4f\n", step, batch_loss, val);
      *metrics << line;
    }
    if (evaled) {
      if (cfg.target_acc >= 0.0 && val >= cfg.target_acc) {
        stats.reached_target = true;
        break;
      }
      if (cfg.patience > 0 && evals_since_best >= cfg.patience) break;
    }
  }
  return stats;
}

}  // namespace treedit::model
