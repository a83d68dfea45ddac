// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the test binaries: synthetic documents, a finite-
// difference gradient checker, and a two-topic article stream with disjoint
// signal vocabularies for forgetting experiments.
#pragma once

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dcsum/corpus.hpp"
#include "dcsum/encode.hpp"
#include "dcsum/model.hpp"

namespace dcsum::testing {

inline ModelConfig tiny_config(int layers, int hidden, int heads, int vocab) {
  ModelConfig cfg;
  cfg.num_layers = layers;
  cfg.hidden_dim = hidden;
  cfg.num_heads = heads;
  cfg.head_heads = heads;
  cfg.ffn_dim = 2 * hidden;
  cfg.adapter_dim = std::max(1, hidden / 4);
  cfg.vocab_size = vocab;
  cfg.max_sequence_length = 64;
  cfg.dropout = 0.0;
  cfg.validate();
  return cfg;
}

// A structurally valid encoded document with random words and labels.
inline EncodedDocument random_doc(Rng& rng, int vocab_size, size_t max_sentences,
                                  size_t max_words) {
  EncodedDocument doc;
  doc.article_id = "synthetic";
  const size_t sentences = 1 + rng.next_below(max_sentences);
  for (size_t s = 0; s < sentences; ++s) {
    doc.cls_positions.push_back(doc.token_ids.size());
    doc.token_ids.push_back(Vocabulary::kCls);
    const size_t words = 1 + rng.next_below(max_words);
    for (size_t w = 0; w < words; ++w) {
      doc.token_ids.push_back(
          4 + static_cast<int>(rng.next_below(static_cast<size_t>(vocab_size - 4))));
    }
    doc.token_ids.push_back(Vocabulary::kSep);
    doc.labels.push_back(rng.next_bernoulli(0.4) ? 1 : 0);
  }
  doc.segment_ids.reserve(doc.token_ids.size());
  size_t sentence = 0;
  for (size_t i = 0; i < doc.token_ids.size(); ++i) {
    if (sentence + 1 < doc.cls_positions.size() &&
        i >= doc.cls_positions[sentence + 1]) {
      ++sentence;
    }
    doc.segment_ids.push_back(static_cast<int>(sentence % 2));
  }
  doc.attention_mask.assign(doc.token_ids.size(), 1);
  return doc;
}

inline std::vector<ParamRef> collect_refs(DualColumnModel& m, ParamVisitFn visit) {
  std::vector<ParamRef> refs;
  visit(m, [&refs](const ParamRef& r) { refs.push_back(r); });
  return refs;
}

struct GradCheckReport {
  double max_rel = 0.0;
  std::string worst = "(none)";
  size_t checked = 0;
};

// Central finite differences against analytic gradients already accumulated in
// `grads`. `loss` re-evaluates the objective on the mutated model in place.
inline GradCheckReport gradcheck(DualColumnModel& model, DualColumnModel& grads,
                                 ParamVisitFn visit,
                                 const std::function<double()>& loss, double h) {
  std::vector<ParamRef> prefs = collect_refs(model, visit);
  std::vector<ParamRef> grefs = collect_refs(grads, visit);
  GradCheckReport report;
  for (size_t r = 0; r < prefs.size(); ++r) {
    for (Eigen::Index i = 0; i < prefs[r].size; ++i) {
      double& theta = prefs[r].data[i];
      const double saved = theta;
      theta = saved + h;
      const double hi = loss();
      theta = saved - h;
      const double lo = loss();
      theta = saved;
      const double fd = (hi - lo) / (2.0 * h);
      const double analytic = grefs[r].data[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(fd), 1e-6});
      const double rel = std::abs(analytic - fd) / denom;
      ++report.checked;
      if (rel > report.max_rel) {
        report.max_rel = rel;
        report.worst = prefs[r].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return report;
}

// Two-topic article stream. Each article has `kBodySentences` sentences of
// which three carry a triple of topic signal words at random positions; the
// abstract is exactly those three, so the selection oracle and ROUGE agree on
// them. Every other sentence carries a single distractor signal word, which
// keeps mere token presence uninformative: selection has to weigh signal
// density, a circuit both topics share.
inline std::vector<Article> two_topic_stream(size_t per_task, uint64_t seed) {
  static const std::vector<std::vector<std::string>> kSignals = {
      {"glacier", "moraine", "icefall", "crevasse", "serac", "firn", "nunatak",
       "bergschrund"},
      {"reactor", "turbine", "coolant", "fission", "isotope", "breeder",
       "cladding", "moderator"}};
  static const std::vector<std::string> kFiller = {
      "survey", "group", "noted", "steady", "values", "during", "review",
      "period", "found", "overall", "margin", "within", "range", "record",
      "stable", "field", "report", "update", "panel", "series"};
  constexpr size_t kBodySentences = 8;

  std::vector<Article> out;
  Rng rng(seed_chain(seed, "two-topic-stream"));
  for (size_t task = 0; task < 2; ++task) {
    for (size_t n = 0; n < per_task; ++n) {
      // three distinct signal positions
      std::vector<size_t> pos;
      while (pos.size() < 3) {
        size_t p = rng.next_below(kBodySentences);
        bool dup = false;
        for (size_t q : pos) dup = dup || q == p;
        if (!dup) pos.push_back(p);
      }
      Article a;
      char id[32];
      std::snprintf(id, sizeof(id), "t%zu-%04zu", task, n);
      a.id = id;
      a.title = "synthetic";
      a.published_at = task == 0 ? "2020-06-15" : "2021-06-15";
      a.date_key = task == 0 ? 20200615 : 20210615;
      for (size_t s = 0; s < kBodySentences; ++s) {
        bool is_signal = false;
        for (size_t q : pos) is_signal = is_signal || q == s;
        std::string sentence;
        const size_t words = 6;
        const size_t signal_slots = is_signal ? 3 : 1;
        for (size_t w = 0; w < words; ++w) {
          std::string word;
          if (w < signal_slots) {
            word = kSignals[task][rng.next_below(kSignals[task].size())];
          } else {
            word = kFiller[rng.next_below(kFiller.size())];
          }
          sentence += (w ? " " : "") + word;
        }
        a.body_sentences.push_back(sentence);
        if (is_signal) a.abstract_sentences.push_back(sentence);
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

}  // namespace dcsum::testing
