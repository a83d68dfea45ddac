// SPDX-License-Identifier: Apache-2.0
#include "dcsum/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "dcsum/backward.hpp"
#include "dcsum/forward.hpp"

namespace dcsum {

using nlohmann::json;

Consolidation consolidation_from_string(const std::string& name) {
  if (name == "distill") return Consolidation::kDistill;
  if (name == "finetune") return Consolidation::kFinetune;
  throw std::invalid_argument("unknown consolidation mode: " + name);
}

std::string to_string(Consolidation mode) {
  return mode == Consolidation::kDistill ? "distill" : "finetune";
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.opt.learning_rate},
              {"weight_decay", cfg.opt.weight_decay},
              {"beta1", cfg.opt.beta1},
              {"beta2", cfg.opt.beta2},
              {"epsilon", cfg.opt.epsilon},
              {"warmup_fraction", cfg.opt.warmup_fraction},
              {"batch_size", cfg.opt.batch_size},
              {"epochs", cfg.opt.epochs},
              {"grad_clip", cfg.opt.grad_clip},
              {"tau", cfg.distill.temperature},
              {"alpha_ce", cfg.distill.alpha_ce},
              {"lambda", cfg.lambda},
              {"gamma", cfg.gamma},
              {"fisher_samples", cfg.fisher_samples},
              {"fisher_mode", to_string(cfg.fisher_mode)},
              {"preserve_ac", cfg.preserve_ac},
              {"consolidation", to_string(cfg.consolidation)},
              {"seed", cfg.seed},
              {"eval_k", cfg.eval_k}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.opt.learning_rate = j.value("learning_rate", cfg.opt.learning_rate);
  cfg.opt.weight_decay = j.value("weight_decay", cfg.opt.weight_decay);
  cfg.opt.beta1 = j.value("beta1", cfg.opt.beta1);
  cfg.opt.beta2 = j.value("beta2", cfg.opt.beta2);
  cfg.opt.epsilon = j.value("epsilon", cfg.opt.epsilon);
  cfg.opt.warmup_fraction = j.value("warmup_fraction", cfg.opt.warmup_fraction);
  cfg.opt.batch_size = j.value("batch_size", cfg.opt.batch_size);
  cfg.opt.epochs = j.value("epochs", cfg.opt.epochs);
  cfg.opt.grad_clip = j.value("grad_clip", cfg.opt.grad_clip);
  cfg.distill.temperature = j.value("tau", cfg.distill.temperature);
  cfg.distill.alpha_ce = j.value("alpha_ce", cfg.distill.alpha_ce);
  cfg.lambda = j.value("lambda", cfg.lambda);
  cfg.gamma = j.value("gamma", cfg.gamma);
  cfg.fisher_samples = j.value("fisher_samples", cfg.fisher_samples);
  if (j.contains("fisher_mode"))
    cfg.fisher_mode = fisher_mode_from_string(j.at("fisher_mode"));
  cfg.preserve_ac = j.value("preserve_ac", cfg.preserve_ac);
  if (j.contains("consolidation"))
    cfg.consolidation = consolidation_from_string(j.at("consolidation"));
  cfg.seed = j.value("seed", cfg.seed);
  cfg.eval_k = j.value("eval_k", cfg.eval_k);
  cfg.opt.validate();
  if (!(cfg.distill.temperature > 0.0))
    throw std::invalid_argument("tau must be positive");
  if (cfg.distill.alpha_ce < 0.0 || cfg.distill.alpha_ce > 1.0)
    throw std::invalid_argument("alpha_ce must lie in [0, 1]");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0)
    throw std::invalid_argument("gamma must lie in (0, 1]");
  if (cfg.fisher_samples < 1)
    throw std::invalid_argument("fisher_samples must be at least 1");
  if (cfg.eval_k < 1) throw std::invalid_argument("eval_k must be at least 1");
  return cfg;
}

namespace {

json rouge_to_json(const RougeScore& s) {
  return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

RougeScore rouge_from_json(const json& j) {
  return RougeScore{j.at("precision"), j.at("recall"), j.at("f1")};
}

json corpus_rouge_to_json(const CorpusRouge& c) {
  return json{{"rouge1", rouge_to_json(c.r1)},
              {"rouge2", rouge_to_json(c.r2)},
              {"rougeL", rouge_to_json(c.rl)},
              {"documents", c.documents}};
}

CorpusRouge corpus_rouge_from_json(const json& j) {
  CorpusRouge c;
  c.r1 = rouge_from_json(j.at("rouge1"));
  c.r2 = rouge_from_json(j.at("rouge2"));
  c.rl = rouge_from_json(j.at("rougeL"));
  c.documents = j.value("documents", size_t{0});
  return c;
}

std::vector<size_t> shuffled(const std::vector<size_t>& indices, Rng& rng) {
  std::vector<size_t> order = indices;
  for (size_t i = order.size(); i > 1; --i) {
    const size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Eigen::VectorXd labels_of(const EncodedDocument& doc) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(doc.labels.size()));
  for (size_t i = 0; i < doc.labels.size(); ++i)
    y(static_cast<Eigen::Index>(i)) = doc.labels[i];
  return y;
}

size_t batch_sentence_count(const Dataset& data, const std::vector<size_t>& order,
                            size_t begin, size_t end) {
  size_t n = 0;
  for (size_t i = begin; i < end; ++i) n += data.docs[order[i]].sentence_count();
  return n;
}

void add_flat(DualColumnModel& grads, ParamVisitFn visit,
              const Eigen::VectorXd& flat) {
  Eigen::Index offset = 0;
  visit(grads, [&](const ParamRef& p) {
    for (Eigen::Index i = 0; i < p.size; ++i) p.data[i] += flat(offset + i);
    offset += p.size;
  });
}

int steps_per_epoch(size_t docs, int batch_size) {
  return static_cast<int>((docs + static_cast<size_t>(batch_size) - 1) /
                          static_cast<size_t>(batch_size));
}

}  // namespace

json task_report_to_json(const TaskReport& report) {
  json heldout = json::array();
  for (const HeldoutEval& h : report.heldout) {
    heldout.push_back(json{{"task", h.task},
                           {"active", corpus_rouge_to_json(h.active)},
                           {"knowledge", corpus_rouge_to_json(h.knowledge)}});
  }
  return json{{"task", report.task_index},
              {"compress_loss", report.compress_loss},
              {"progress_loss", report.progress_loss},
              {"heldout", heldout},
              {"wall_seconds", report.wall_seconds}};
}

TaskReport task_report_from_json(const json& j) {
  TaskReport report;
  report.task_index = j.at("task");
  report.compress_loss = j.at("compress_loss");
  report.progress_loss = j.at("progress_loss");
  report.wall_seconds = j.value("wall_seconds", 0.0);
  for (const json& h : j.value("heldout", json::array())) {
    HeldoutEval eval;
    eval.task = h.at("task");
    eval.active = corpus_rouge_from_json(h.at("active"));
    eval.knowledge = corpus_rouge_from_json(h.at("knowledge"));
    report.heldout.push_back(std::move(eval));
  }
  return report;
}

double train_compress(DualColumnModel& model, const Dataset& data,
                      const std::vector<size_t>& doc_indices,
                      const TrainConfig& cfg, int task_index) {
  if (doc_indices.empty()) return 0.0;
  const int per_epoch = steps_per_epoch(doc_indices.size(), cfg.opt.batch_size);
  const int total_steps = cfg.opt.epochs * per_epoch;
  AdamW optimizer(cfg.opt);
  Rng drop_rng(seed_chain(cfg.seed, "compress-dropout", task_index));

  int step = 0;
  double last_epoch_loss = 0.0;
  for (int epoch = 0; epoch < cfg.opt.epochs; ++epoch) {
    Rng shuffle_rng(seed_chain(cfg.seed, "compress-shuffle", task_index, epoch));
    const std::vector<size_t> order = shuffled(doc_indices, shuffle_rng);
    double epoch_loss = 0.0;

    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(cfg.opt.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(cfg.opt.batch_size));
      const double n_total =
          static_cast<double>(batch_sentence_count(data, order, begin, end));
      DualColumnModel grads = zeros_like(model);
      double loss_sum = 0.0;

      for (size_t i = begin; i < end; ++i) {
        const EncodedDocument& doc = data.docs[order[i]];
        DropoutState drop{model.config.dropout, &drop_rng};
        AcPathCache cache = ac_path_forward(doc, model, drop);
        const Eigen::VectorXd y = labels_of(doc);
        loss_sum += bce_sum(cache.head.probs, y);
        ac_path_backward(doc, model, cache,
                         bce_grad_logits(cache.head.probs, y, n_total), grads);
      }

      const double loss = loss_sum / n_total;
      if (!std::isfinite(loss))
        throw NumericalError("compress loss diverged at task " +
                             std::to_string(task_index) + ", step " +
                             std::to_string(step));
      clip_gradients(grads, visit_active_fn, cfg.opt.grad_clip);
      optimizer.step(model, grads, visit_active_fn,
                     lr_at_step(cfg.opt, step, total_steps));
      ++step;
      epoch_loss += loss;
    }
    if (epoch == cfg.opt.epochs - 1) last_epoch_loss = epoch_loss / per_epoch;
  }
  return last_epoch_loss;
}

double train_progress(DualColumnModel& model, EwcState& ewc, const Dataset& data,
                      const std::vector<size_t>& doc_indices,
                      const TrainConfig& cfg, int task_index) {
  if (doc_indices.empty()) return 0.0;
  ewc.gamma = cfg.gamma;
  ewc.lambda = cfg.lambda;
  const bool distilling = cfg.consolidation == Consolidation::kDistill;

  // The teacher is the deployed path as it stands when consolidation starts;
  // its logits are fixed here so later knowledge/head updates cannot move it.
  std::unordered_map<size_t, Eigen::VectorXd> teacher;
  if (distilling) {
    teacher.reserve(doc_indices.size());
    for (size_t idx : doc_indices) {
      teacher.emplace(idx,
                      ac_path_forward(data.docs[idx], model, DropoutState{}).head.logits);
    }
  }

  const int per_epoch = steps_per_epoch(doc_indices.size(), cfg.opt.batch_size);
  const int total_steps = cfg.opt.epochs * per_epoch;
  AdamW optimizer(cfg.opt);
  Rng drop_rng(seed_chain(cfg.seed, "progress-dropout", task_index));

  int step = 0;
  double last_epoch_loss = 0.0;
  for (int epoch = 0; epoch < cfg.opt.epochs; ++epoch) {
    Rng shuffle_rng(seed_chain(cfg.seed, "progress-shuffle", task_index, epoch));
    const std::vector<size_t> order = shuffled(doc_indices, shuffle_rng);
    double epoch_loss = 0.0;

    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(cfg.opt.batch_size)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(cfg.opt.batch_size));
      const double n_total =
          static_cast<double>(batch_sentence_count(data, order, begin, end));
      DualColumnModel grads = zeros_like(model);
      double data_loss_sum = 0.0;

      for (size_t i = begin; i < end; ++i) {
        const EncodedDocument& doc = data.docs[order[i]];
        DropoutState drop{model.config.dropout, &drop_rng};
        KbPathCache cache = kb_path_forward(doc, model, drop);
        if (distilling) {
          const Eigen::VectorXd& t_logits = teacher.at(order[i]);
          data_loss_sum +=
              kd_loss_from_logits(cache.head.logits, t_logits, cfg.distill) *
              static_cast<double>(doc.sentence_count());
          Eigen::VectorXd dlogits =
              cfg.distill.alpha_ce *
              kd_grad_student_logits(cache.head.logits, t_logits, cfg.distill,
                                     n_total);
          kb_path_backward(doc, model, cache, dlogits, grads);
        } else {
          const Eigen::VectorXd y = labels_of(doc);
          data_loss_sum += bce_sum(cache.head.probs, y);
          kb_path_backward(doc, model, cache,
                           bce_grad_logits(cache.head.probs, y, n_total), grads);
        }
      }

      double loss = 0.0;
      if (distilling) {
        loss = cfg.distill.alpha_ce * data_loss_sum / n_total;
        if (!ewc.empty()) {
          const Eigen::VectorXd theta = flatten_params(model, visit_consolidated_fn);
          loss += cfg.lambda * ewc_penalty(theta, ewc);
          add_flat(grads, visit_consolidated_fn, cfg.lambda * ewc_grad(theta, ewc));
        }
      } else {
        loss = data_loss_sum / n_total;  // ablation: plain label loss, no penalty
      }
      if (!std::isfinite(loss))
        throw NumericalError("progress loss diverged at task " +
                             std::to_string(task_index) + ", step " +
                             std::to_string(step));
      clip_gradients(grads, visit_consolidated_fn, cfg.opt.grad_clip);
      optimizer.step(model, grads, visit_consolidated_fn,
                     lr_at_step(cfg.opt, step, total_steps));
      ++step;
      epoch_loss += loss;
    }
    if (epoch == cfg.opt.epochs - 1) last_epoch_loss = epoch_loss / per_epoch;
  }

  if (distilling) {
    // Advance the running Fisher and re-anchor at the just-consolidated point.
    Rng sample_rng(seed_chain(cfg.seed, "fisher-sample", task_index));
    std::vector<size_t> order = shuffled(doc_indices, sample_rng);
    const size_t want = std::min<size_t>(
        order.size(), static_cast<size_t>(std::max(1, cfg.fisher_samples)));
    std::vector<EncodedDocument> sample;
    sample.reserve(want);
    for (size_t i = 0; i < want; ++i) sample.push_back(data.docs[order[i]]);
    const Eigen::VectorXd fisher = estimate_fisher(
        model, sample, cfg.fisher_mode, seed_chain(cfg.seed, "fisher", task_index));
    ewc_accumulate(ewc, fisher, flatten_params(model, visit_consolidated_fn));
  }
  return last_epoch_loss;
}

std::vector<TaskReport> run_stream(DualColumnModel& model, EwcState& ewc,
                                   const Dataset& data, const TrainConfig& cfg,
                                   int start_task, int max_tasks,
                                   const TaskCallback& on_task) {
  const int available = static_cast<int>(data.task_count());
  if (available == 0) throw DataError("task stream is empty");
  const int end_task =
      max_tasks < 0 ? available : std::min(available, max_tasks);
  if (start_task < 0 || start_task > end_task)
    throw std::invalid_argument("start task outside the stream");

  std::vector<TaskReport> reports;
  for (int t = start_task; t < end_task; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<size_t> train_idx = data.train_indices(static_cast<size_t>(t));

    TaskReport report;
    report.task_index = t;
    report.compress_loss = train_compress(model, data, train_idx, cfg, t);
    report.progress_loss = train_progress(model, ewc, data, train_idx, cfg, t);
    if (!cfg.preserve_ac) {
      reinit_column(model, seed_chain(cfg.seed, "ac-reinit", t));
    }
    model.task_count = t + 1;

    for (int j = 0; j <= t; ++j) {
      const std::vector<size_t> held = data.heldout_indices(static_cast<size_t>(j));
      if (held.empty()) continue;
      std::vector<EvalDoc> eval_docs;
      eval_docs.reserve(held.size());
      for (size_t idx : held)
        eval_docs.push_back(EvalDoc{&data.docs[idx], &data.articles[idx]});
      HeldoutEval eval;
      eval.task = j;
      eval.active = evaluate_docs(model, eval_docs, cfg.eval_k, ScorePath::kActive);
      eval.knowledge =
          evaluate_docs(model, eval_docs, cfg.eval_k, ScorePath::kKnowledge);
      report.heldout.push_back(std::move(eval));
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    reports.push_back(report);
    if (on_task) on_task(reports.back(), model, ewc);
  }
  return reports;
}

}  // namespace dcsum
