// SPDX-License-Identifier: Apache-2.0
#include "dcsum/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dcsum {

void OptimizerConfig::validate() const {
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw std::invalid_argument("betas must lie in [0,1)");
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be > 0");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
    throw std::invalid_argument("warmup_fraction must lie in [0,1)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
}

int warmup_steps(const OptimizerConfig& cfg, int total_steps) {
  const int w = static_cast<int>(std::lround(cfg.warmup_fraction * total_steps));
  return std::max(1, w);
}

double lr_at_step(const OptimizerConfig& cfg, int step, int total_steps) {
  if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (step < 0 || step >= total_steps)
    throw std::invalid_argument("step outside the task budget");
  const double peak = cfg.learning_rate;
  if (total_steps == 1) return peak;
  const int w = warmup_steps(cfg, total_steps);
  if (step <= w) return peak * static_cast<double>(step) / w;
  if (total_steps - 1 <= w) return peak;  // no room left to decay
  return peak * static_cast<double>(total_steps - 1 - step) / (total_steps - 1 - w);
}

double clip_gradients(DualColumnModel& grads, ParamVisitFn visit, double max_norm) {
  if (max_norm <= 0.0) return 1.0;
  double sq = 0.0;
  visit(grads, [&](const ParamRef& p) {
    for (Eigen::Index i = 0; i < p.size; ++i) sq += p.data[i] * p.data[i];
  });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return 1.0;
  const double scale = max_norm / norm;
  visit(grads, [&](const ParamRef& p) {
    for (Eigen::Index i = 0; i < p.size; ++i) p.data[i] *= scale;
  });
  return scale;
}

void AdamW::step(DualColumnModel& model, DualColumnModel& grads, ParamVisitFn visit,
                 double lr) {
  std::vector<ParamRef> grad_refs;
  visit(grads, [&](const ParamRef& p) { grad_refs.push_back(p); });

  t_ += 1;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);

  size_t idx = 0;
  visit(model, [&](const ParamRef& p) {
    const ParamRef& g = grad_refs.at(idx++);
    if (g.name != p.name || g.size != p.size)
      throw std::invalid_argument("gradient structure does not match the model");

    auto& [m, v] = state_[p.name];
    if (m.size() == 0) {
      m = Eigen::VectorXd::Zero(p.size);
      v = Eigen::VectorXd::Zero(p.size);
    }
    for (Eigen::Index i = 0; i < p.size; ++i) {
      const double gi = g.data[i];
      m(i) = cfg_.beta1 * m(i) + (1.0 - cfg_.beta1) * gi;
      v(i) = cfg_.beta2 * v(i) + (1.0 - cfg_.beta2) * gi * gi;
      const double m_hat = m(i) / bc1;
      const double v_hat = v(i) / bc2;
      p.data[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
      if (p.kind == ParamKind::kWeight) {
        p.data[i] -= lr * cfg_.weight_decay * p.data[i];
      }
    }
  });
  if (idx != grad_refs.size())
    throw std::invalid_argument("gradient traversal does not match the model");
}

}  // namespace dcsum
