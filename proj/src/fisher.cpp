// SPDX-License-Identifier: Apache-2.0
#include "dcsum/fisher.hpp"

#include <stdexcept>

#include "dcsum/backward.hpp"
#include "dcsum/forward.hpp"

namespace dcsum {

FisherMode fisher_mode_from_string(const std::string& name) {
  if (name == "sampled") return FisherMode::kSampled;
  if (name == "empirical") return FisherMode::kEmpirical;
  if (name == "exact") return FisherMode::kExact;
  throw std::invalid_argument("unknown fisher mode: " + name);
}

std::string to_string(FisherMode mode) {
  switch (mode) {
    case FisherMode::kSampled: return "sampled";
    case FisherMode::kEmpirical: return "empirical";
    case FisherMode::kExact: return "exact";
  }
  return "sampled";
}

Eigen::VectorXd estimate_fisher(DualColumnModel& model,
                                const std::vector<EncodedDocument>& docs,
                                FisherMode mode, uint64_t seed) {
  if (docs.empty()) throw std::invalid_argument("fisher sample is empty");
  const Eigen::Index n = param_count(model, visit_consolidated_fn);
  Eigen::VectorXd accum = Eigen::VectorXd::Zero(n);

  for (size_t d = 0; d < docs.size(); ++d) {
    const EncodedDocument& doc = docs[d];
    KbPathCache cache = kb_path_forward(doc, model, DropoutState{});
    const Eigen::VectorXd& probs = cache.head.probs;
    const Eigen::Index s_count = probs.size();
    if (s_count == 0) continue;

    if (mode == FisherMode::kExact) {
      for (Eigen::Index s = 0; s < s_count; ++s) {
        DualColumnModel grads = zeros_like(model);
        Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(s_count);
        dlogits(s) = 1.0;
        kb_path_backward(doc, model, cache, dlogits, grads);
        Eigen::VectorXd g = flatten_params(grads, visit_consolidated_fn);
        accum += probs(s) * (1.0 - probs(s)) * g.cwiseAbs2();
      }
      continue;
    }

    Eigen::VectorXd labels(s_count);
    if (mode == FisherMode::kSampled) {
      Rng rng(seed_chain(seed, "fisher-labels", d));
      for (Eigen::Index s = 0; s < s_count; ++s)
        labels(s) = rng.next_bernoulli(probs(s)) ? 1.0 : 0.0;
    } else {
      for (Eigen::Index s = 0; s < s_count; ++s)
        labels(s) = doc.labels[static_cast<size_t>(s)];
    }

    // d(log-likelihood)/d logit = y − p, summed over the document's sentences.
    DualColumnModel grads = zeros_like(model);
    kb_path_backward(doc, model, cache, labels - probs, grads);
    accum += flatten_params(grads, visit_consolidated_fn).cwiseAbs2();
  }

  return accum / static_cast<double>(docs.size());
}

}  // namespace dcsum
