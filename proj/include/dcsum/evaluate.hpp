// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "dcsum/encode.hpp"
#include "dcsum/model.hpp"
#include "dcsum/rouge.hpp"

namespace dcsum {

// Top-k sentence indices by score (ties -> lower index), in document order.
std::vector<size_t> extract_summary(const EncodedDocument& doc,
                                    const Eigen::VectorXd& scores, int k);

// Which column scores sentences: the deployed adapter-assisted active column,
// or the consolidated knowledge column alone (the student path — this is the
// one forgetting is measured on).
enum class ScorePath { kActive, kKnowledge };

Eigen::VectorXd score_document(const EncodedDocument& doc, DualColumnModel& model,
                               ScorePath path);

struct EvalDoc {
  const EncodedDocument* doc;
  const Article* article;
};

struct CorpusRouge {
  RougeScore r1, r2, rl;  // per-component means over documents
  size_t documents = 0;
};

// Extract k sentences per document, score the extraction's tokens against the
// gold abstract's tokens, and average each ROUGE component over documents.
CorpusRouge evaluate_docs(DualColumnModel& model, const std::vector<EvalDoc>& docs,
                          int k, ScorePath path);

// M[i][j] = metric on task j's held-out slice after training through task i.
struct ForgettingReport {
  std::vector<std::vector<double>> matrix;  // lower-triangular
  std::vector<double> backward_transfer;    // M[last][j] − M[j][j], j < tasks−1
};

ForgettingReport forgetting_from_matrix(
    const std::vector<std::vector<double>>& matrix);

// Self-contained SVG line chart of each task's held-out metric across later
// training (one polyline per task).
std::string forgetting_svg(const ForgettingReport& report);

}  // namespace dcsum
