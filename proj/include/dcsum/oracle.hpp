// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "dcsum/corpus.hpp"
#include "dcsum/rouge.hpp"

namespace dcsum {

struct OracleLabels {
  // Body sentence indices in selection order, with the metric gain realized
  // at each step. Indices are unique and within range.
  std::vector<size_t> selected;
  std::vector<double> gains;

  bool contains(size_t index) const;
};

// Greedy extractive oracle: repeatedly adds the body sentence that most
// improves the metric F-score of the selection against the abstract. Stops at
// max_sentences or when no sentence yields a strictly positive gain. Ties go
// to the lowest sentence index.
OracleLabels build_oracle(const Article& article, size_t max_sentences,
                          OracleMetric metric = OracleMetric::kRouge12);

}  // namespace dcsum
