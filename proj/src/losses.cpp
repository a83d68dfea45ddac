// SPDX-License-Identifier: Apache-2.0
#include "dcsum/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace dcsum {

namespace {

constexpr double kLogClamp = 1e-12;

double safe_log(double x) { return std::log(std::max(x, kLogClamp)); }

double clamp_prob(double p) {
  return std::min(std::max(p, kLogClamp), 1.0 - kLogClamp);
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) {
  const double q = clamp_prob(p);
  return std::log(q) - std::log1p(-q);
}

void check_lengths(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("probability and label vectors differ in length");
}

double bernoulli_kl(double p, double q) {
  // KL(p ‖ q) with clamped logs; exact-0/1 components contribute nothing.
  double kl = 0.0;
  if (p > 0.0) kl += p * (safe_log(p) - safe_log(q));
  if (p < 1.0) kl += (1.0 - p) * (safe_log(1.0 - p) - safe_log(1.0 - q));
  return kl;
}

}  // namespace

double bce_sum(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
  check_lengths(probs, labels);
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double y = labels(i);
    total -= y * safe_log(probs(i)) + (1.0 - y) * safe_log(1.0 - probs(i));
  }
  return total;
}

double bce_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
  if (probs.size() == 0) return 0.0;
  return bce_sum(probs, labels) / static_cast<double>(probs.size());
}

Eigen::VectorXd bce_grad_logits(const Eigen::VectorXd& probs,
                                const Eigen::VectorXd& labels,
                                double total_sentences) {
  check_lengths(probs, labels);
  return (probs - labels) / total_sentences;
}

double kd_loss_from_logits(const Eigen::VectorXd& student_logits,
                           const Eigen::VectorXd& teacher_logits,
                           const DistillConfig& cfg) {
  check_lengths(student_logits, teacher_logits);
  if (cfg.temperature <= 0.0) throw std::invalid_argument("temperature must be > 0");
  if (student_logits.size() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < student_logits.size(); ++i) {
    const double p = sigmoid(teacher_logits(i) / cfg.temperature);
    const double q = sigmoid(student_logits(i) / cfg.temperature);
    total += bernoulli_kl(p, q);
  }
  const double tau2 = cfg.temperature * cfg.temperature;
  return tau2 * total / static_cast<double>(student_logits.size());
}

double kd_loss(const Eigen::VectorXd& student_probs,
               const Eigen::VectorXd& teacher_probs, const DistillConfig& cfg) {
  check_lengths(student_probs, teacher_probs);
  Eigen::VectorXd zs(student_probs.size()), zt(teacher_probs.size());
  for (Eigen::Index i = 0; i < student_probs.size(); ++i) {
    zs(i) = logit(student_probs(i));
    zt(i) = logit(teacher_probs(i));
  }
  return kd_loss_from_logits(zs, zt, cfg);
}

Eigen::VectorXd kd_grad_student_logits(const Eigen::VectorXd& student_logits,
                                       const Eigen::VectorXd& teacher_logits,
                                       const DistillConfig& cfg,
                                       double total_sentences) {
  check_lengths(student_logits, teacher_logits);
  Eigen::VectorXd grad(student_logits.size());
  for (Eigen::Index i = 0; i < student_logits.size(); ++i) {
    const double p = sigmoid(teacher_logits(i) / cfg.temperature);
    const double q = sigmoid(student_logits(i) / cfg.temperature);
    grad(i) = cfg.temperature * (q - p) / total_sentences;
  }
  return grad;
}

double ewc_penalty(const Eigen::VectorXd& theta, const EwcState& state) {
  if (state.empty()) return 0.0;
  if (theta.size() != state.theta_star.size() ||
      theta.size() != state.fisher_star.size())
    throw std::invalid_argument("parameter vector does not match the anchor shape");
  const Eigen::ArrayXd diff = (theta - state.theta_star).array();
  return 0.5 * (state.fisher_star.array() * diff.square()).sum();
}

Eigen::VectorXd ewc_grad(const Eigen::VectorXd& theta, const EwcState& state) {
  if (state.empty()) return Eigen::VectorXd::Zero(theta.size());
  if (theta.size() != state.theta_star.size() ||
      theta.size() != state.fisher_star.size())
    throw std::invalid_argument("parameter vector does not match the anchor shape");
  return state.fisher_star.cwiseProduct(theta - state.theta_star);
}

void ewc_accumulate(EwcState& state, const Eigen::VectorXd& task_fisher,
                    const Eigen::VectorXd& theta) {
  if (task_fisher.size() != theta.size())
    throw std::invalid_argument("fisher and parameter vectors differ in length");
  if (state.empty()) {
    state.fisher_star = task_fisher;
  } else {
    if (state.fisher_star.size() != task_fisher.size())
      throw std::invalid_argument("fisher accumulator shape changed between tasks");
    state.fisher_star = state.gamma * state.fisher_star + task_fisher;
  }
  state.theta_star = theta;
  state.task_count += 1;
}

}  // namespace dcsum
