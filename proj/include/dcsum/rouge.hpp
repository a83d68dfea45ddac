// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace dcsum {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

RougeScore make_rouge(double precision, double recall);

// Clipped n-gram overlap. Empty n-gram sets yield zero components.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n);

// Longest-common-subsequence precision/recall/F.
RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference);

size_t lcs_length(const std::vector<std::string>& a,
                  const std::vector<std::string>& b);

enum class OracleMetric { kRouge1, kRouge2, kRouge12 };

OracleMetric oracle_metric_from_string(const std::string& name);
std::string to_string(OracleMetric metric);

// Scoring function used by the greedy oracle: ROUGE-1 F, ROUGE-2 F or their sum.
double oracle_score(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference,
                    OracleMetric metric);

}  // namespace dcsum
