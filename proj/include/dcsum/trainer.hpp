// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "dcsum/dataset.hpp"
#include "dcsum/evaluate.hpp"
#include "dcsum/fisher.hpp"
#include "dcsum/losses.hpp"
#include "dcsum/model.hpp"
#include "dcsum/optimizer.hpp"

namespace dcsum {

// How the knowledge column absorbs a finished task: distillation from the
// frozen active column under the consolidation penalty (the method), or
// direct fine-tuning on the task labels (the forgetting-ablation baseline).
enum class Consolidation { kDistill, kFinetune };

Consolidation consolidation_from_string(const std::string& name);
std::string to_string(Consolidation mode);

struct TrainConfig {
  OptimizerConfig opt;
  DistillConfig distill;
  double lambda = 15.0;  // consolidation-penalty strength
  double gamma = 0.99;   // running-Fisher decay
  int fisher_samples = 256;
  FisherMode fisher_mode = FisherMode::kSampled;
  bool preserve_ac = true;  // keep active-column weights across tasks
  Consolidation consolidation = Consolidation::kDistill;
  uint64_t seed = 42;
  int eval_k = 20;  // sentences per extracted summary during held-out scoring
};

// Flat key set (learning_rate, weight_decay, beta1, beta2, epsilon,
// warmup_fraction, batch_size, epochs, tau, alpha_ce, lambda, gamma,
// fisher_samples, preserve_ac, seed, plus grad_clip, fisher_mode,
// consolidation, eval_k); missing keys keep their defaults.
nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct HeldoutEval {
  int task = 0;
  CorpusRouge active;     // deployed adapter-assisted path
  CorpusRouge knowledge;  // consolidated student path (forgetting metric)
};

struct TaskReport {
  int task_index = 0;
  double compress_loss = 0.0;  // mean over the stage's final epoch
  double progress_loss = 0.0;
  std::vector<HeldoutEval> heldout;  // every seen task, oldest first
  double wall_seconds = 0.0;  // informational; excluded from determinism checks
};

nlohmann::json task_report_to_json(const TaskReport& report);
TaskReport task_report_from_json(const nlohmann::json& j);

// Per-task supervised stage: the active column (plus adapters and head) fits
// the oracle labels; the knowledge column stays frozen. Returns the final
// epoch's mean loss.
double train_compress(DualColumnModel& model, const Dataset& data,
                      const std::vector<size_t>& doc_indices,
                      const TrainConfig& cfg, int task_index);

// Consolidation stage: the active path's logits are snapshotted once as the
// teacher, then the knowledge column and head minimize
// alpha_ce·KD + lambda·penalty (or plain label loss for the ablation).
// Afterwards the running Fisher and anchor advance. Returns the final epoch's
// mean loss.
double train_progress(DualColumnModel& model, EwcState& ewc, const Dataset& data,
                      const std::vector<size_t>& doc_indices,
                      const TrainConfig& cfg, int task_index);

using TaskCallback =
    std::function<void(const TaskReport&, DualColumnModel&, const EwcState&)>;

// Oldest task first: compress, progress, then held-out evaluation of every
// seen task on both scoring paths. `max_tasks` < 0 runs the whole stream;
// `start_task` > 0 resumes from a checkpointed boundary.
std::vector<TaskReport> run_stream(DualColumnModel& model, EwcState& ewc,
                                   const Dataset& data, const TrainConfig& cfg,
                                   int start_task = 0, int max_tasks = -1,
                                   const TaskCallback& on_task = nullptr);

}  // namespace dcsum
