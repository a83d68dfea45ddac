// SPDX-License-Identifier: Apache-2.0
#include "dcsum/oracle.hpp"

#include <algorithm>
#include <stdexcept>

#include "dcsum/text.hpp"

namespace dcsum {

bool OracleLabels::contains(size_t index) const {
  return std::find(selected.begin(), selected.end(), index) != selected.end();
}

OracleLabels build_oracle(const Article& article, size_t max_sentences,
                          OracleMetric metric) {
  if (max_sentences < 1)
    throw std::invalid_argument("build_oracle: max_sentences must be >= 1");
  if (article.body_sentences.empty())
    throw std::invalid_argument("build_oracle: empty body");

  std::vector<std::string> reference;
  for (const auto& s : article.abstract_sentences) {
    auto toks = tokenize(s);
    reference.insert(reference.end(), toks.begin(), toks.end());
  }
  std::vector<std::vector<std::string>> body_tokens;
  body_tokens.reserve(article.body_sentences.size());
  for (const auto& s : article.body_sentences) body_tokens.push_back(tokenize(s));

  OracleLabels labels;
  std::vector<bool> taken(body_tokens.size(), false);
  double best_so_far = 0.0;

  while (labels.selected.size() < max_sentences) {
    double best_score = best_so_far;
    size_t best_index = body_tokens.size();
    for (size_t i = 0; i < body_tokens.size(); ++i) {
      if (taken[i]) continue;
      // Candidate = current selection plus sentence i, in document order.
      std::vector<std::string> candidate;
      for (size_t j = 0; j < body_tokens.size(); ++j) {
        if ((taken[j] || j == i)) {
          candidate.insert(candidate.end(), body_tokens[j].begin(),
                           body_tokens[j].end());
        }
      }
      double score = oracle_score(candidate, reference, metric);
      if (score > best_score) {
        best_score = score;
        best_index = i;
      }
    }
    if (best_index == body_tokens.size()) break;  // no strictly positive gain
    taken[best_index] = true;
    labels.selected.push_back(best_index);
    labels.gains.push_back(best_score - best_so_far);
    best_so_far = best_score;
  }
  return labels;
}

}  // namespace dcsum
