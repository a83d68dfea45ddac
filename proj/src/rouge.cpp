// SPDX-License-Identifier: Apache-2.0
#include "dcsum/rouge.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace dcsum {

namespace {

std::unordered_map<std::string, int> ngram_counts(
    const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, int> counts;
  if (n <= 0 || tokens.size() < static_cast<size_t>(n)) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

RougeScore make_rouge(double precision, double recall) {
  RougeScore s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = (precision + recall > 0.0)
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
  return s;
}

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  auto cand = ngram_counts(candidate, n);
  auto ref = ngram_counts(reference, n);
  long cand_total = 0;
  for (const auto& [key, count] : cand) cand_total += count;
  long ref_total = 0;
  for (const auto& [key, count] : ref) ref_total += count;
  if (cand_total == 0 || ref_total == 0) return RougeScore{};

  long overlap = 0;
  for (const auto& [key, count] : ref) {
    auto it = cand.find(key);
    if (it != cand.end()) overlap += std::min(count, it->second);
  }
  return make_rouge(static_cast<double>(overlap) / cand_total,
                    static_cast<double>(overlap) / ref_total);
}

size_t lcs_length(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row DP keeps memory linear in |b|.
  std::vector<size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        curr[j] = prev[j - 1] + 1;
      } else {
        curr[j] = std::max(prev[j], curr[j - 1]);
      }
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return RougeScore{};
  double lcs = static_cast<double>(lcs_length(candidate, reference));
  return make_rouge(lcs / candidate.size(), lcs / reference.size());
}

OracleMetric oracle_metric_from_string(const std::string& name) {
  if (name == "rouge1" || name == "r1") return OracleMetric::kRouge1;
  if (name == "rouge2" || name == "r2") return OracleMetric::kRouge2;
  if (name == "rouge12" || name == "r1r2") return OracleMetric::kRouge12;
  throw std::invalid_argument("unknown oracle metric: " + name);
}

std::string to_string(OracleMetric metric) {
  switch (metric) {
    case OracleMetric::kRouge1:
      return "rouge1";
    case OracleMetric::kRouge2:
      return "rouge2";
    case OracleMetric::kRouge12:
      return "rouge12";
  }
  return "rouge12";
}

double oracle_score(const std::vector<std::string>& candidate,
                    const std::vector<std::string>& reference,
                    OracleMetric metric) {
  switch (metric) {
    case OracleMetric::kRouge1:
      return rouge_n(candidate, reference, 1).f1;
    case OracleMetric::kRouge2:
      return rouge_n(candidate, reference, 2).f1;
    case OracleMetric::kRouge12:
      return rouge_n(candidate, reference, 1).f1 +
             rouge_n(candidate, reference, 2).f1;
  }
  return 0.0;
}

}  // namespace dcsum
