// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <utility>

#include "dcsum/model.hpp"

namespace dcsum {

struct OptimizerConfig {
  double learning_rate = 5e-4;
  double weight_decay = 0.01;  // decoupled, weights only (not biases/gains/gates)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double warmup_fraction = 0.05;  // of the per-task step budget
  int batch_size = 64;
  int epochs = 3;
  double grad_clip = 1.0;  // global-norm cap; <= 0 disables

  void validate() const;
};

// Piecewise-linear schedule: 0 → peak over the warm-up steps, then linear
// decay hitting 0 at the last step. Warm-up length = max(1, round(fraction ·
// total)). Degenerate budgets (no room to decay) hold the peak.
int warmup_steps(const OptimizerConfig& cfg, int total_steps);
double lr_at_step(const OptimizerConfig& cfg, int step, int total_steps);

// Global-norm clip over the gradient refs; returns the applied scale (1 when
// under the cap or clipping is off).
double clip_gradients(DualColumnModel& grads, ParamVisitFn visit, double max_norm);

// Decoupled-decay Adam with bias correction. One instance per training stage;
// first/second moments keyed by canonical tensor name.
class AdamW {
 public:
  explicit AdamW(const OptimizerConfig& cfg) : cfg_(cfg) { cfg.validate(); }

  // Applies one update over the trainable set selected by `visit`. Model and
  // gradient clones must share structure. `lr` comes from the schedule.
  void step(DualColumnModel& model, DualColumnModel& grads, ParamVisitFn visit,
            double lr);

  int steps_taken() const { return t_; }

 private:
  OptimizerConfig cfg_;
  int t_ = 0;
  std::unordered_map<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>> state_;
};

}  // namespace dcsum
