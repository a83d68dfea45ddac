// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dcsum/encode.hpp"
#include "dcsum/model.hpp"

namespace dcsum {

// How labels enter the squared-gradient estimate on the student path:
//  - sampled: labels drawn from the model's own predictive distribution
//    (the true Fisher; default).
//  - empirical: the dataset's oracle labels.
//  - exact: closed-form Bernoulli Fisher Σ_i p_i(1-p_i)·(∇logit_i)², no
//    sampling noise (one backward pass per sentence; test/ablation use).
enum class FisherMode { kSampled, kEmpirical, kExact };

FisherMode fisher_mode_from_string(const std::string& name);
std::string to_string(FisherMode mode);

// Mean over documents of the squared gradient of the document's Bernoulli
// log-likelihood, taken over the consolidated set (knowledge column + head),
// flattened in canonical order. Dropout is off. Deterministic given the seed.
Eigen::VectorXd estimate_fisher(DualColumnModel& model,
                                const std::vector<EncodedDocument>& docs,
                                FisherMode mode, uint64_t seed);

}  // namespace dcsum
