// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace dcsum {

// Binary cross-entropy over sentence probabilities, mean over the N sentences;
// log arguments clamped at 1e-12.
double bce_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);
// Unnormalized sum, for batches that average over sentences across documents.
double bce_sum(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);
// d(mean BCE)/d logit with the mean taken over total_sentences: (p - y)/N.
Eigen::VectorXd bce_grad_logits(const Eigen::VectorXd& probs,
                                const Eigen::VectorXd& labels,
                                double total_sentences);

struct DistillConfig {
  double temperature = 2.0;  // logits flattened as logit/temperature
  double alpha_ce = 0.5;     // weight of the distillation term in the total
};

// Bernoulli KL(teacher ‖ student) on temperature-flattened logits, averaged
// over sentences and scaled by temperature². Teacher comes first.
double kd_loss_from_logits(const Eigen::VectorXd& student_logits,
                           const Eigen::VectorXd& teacher_logits,
                           const DistillConfig& cfg);
// Same, starting from probabilities (logits recovered via the clamped logit).
double kd_loss(const Eigen::VectorXd& student_probs,
               const Eigen::VectorXd& teacher_probs, const DistillConfig& cfg);
// d(mean KD)/d student logit with the mean over total_sentences:
// temperature · (student~ − teacher~)/N on the flattened probabilities.
Eigen::VectorXd kd_grad_student_logits(const Eigen::VectorXd& student_logits,
                                       const Eigen::VectorXd& teacher_logits,
                                       const DistillConfig& cfg,
                                       double total_sentences);

// Online elastic-weight-consolidation state over the consolidated parameter
// set (knowledge column + head), flattened in canonical traversal order.
struct EwcState {
  Eigen::VectorXd fisher_star;  // running diagonal Fisher, decayed by gamma
  Eigen::VectorXd theta_star;   // anchor parameters at last consolidation
  double gamma = 0.99;
  double lambda = 15.0;
  int task_count = 0;

  bool empty() const { return task_count == 0; }
};

// ½ Σ F*_j (θ_j − θ*_j)²; gamma is already folded into F* at accumulation
// time. Zero before the first consolidation.
double ewc_penalty(const Eigen::VectorXd& theta, const EwcState& state);
Eigen::VectorXd ewc_grad(const Eigen::VectorXd& theta, const EwcState& state);

// F* ← γ·F* + F_task; θ* ← θ; task counter advances.
void ewc_accumulate(EwcState& state, const Eigen::VectorXd& task_fisher,
                    const Eigen::VectorXd& theta);

}  // namespace dcsum
