// SPDX-License-Identifier: Apache-2.0
#include "dcsum/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dcsum/forward.hpp"
#include "dcsum/text.hpp"

namespace dcsum {

std::vector<size_t> extract_summary(const EncodedDocument& doc,
                                    const Eigen::VectorXd& scores, int k) {
  if (k <= 0) throw std::invalid_argument("summary size k must be positive");
  const size_t n = doc.sentence_count();
  if (static_cast<size_t>(scores.size()) != n)
    throw std::invalid_argument("score count does not match sentence count");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(n, static_cast<size_t>(k)));
  std::sort(order.begin(), order.end());
  return order;
}

Eigen::VectorXd score_document(const EncodedDocument& doc, DualColumnModel& model,
                               ScorePath path) {
  if (path == ScorePath::kActive) {
    return ac_path_forward(doc, model, DropoutState{}).head.probs;
  }
  return kb_path_forward(doc, model, DropoutState{}).head.probs;
}

CorpusRouge evaluate_docs(DualColumnModel& model, const std::vector<EvalDoc>& docs,
                          int k, ScorePath path) {
  if (docs.empty()) throw std::invalid_argument("evaluation set is empty");
  auto add = [](RougeScore& acc, const RougeScore& s) {
    acc.precision += s.precision;
    acc.recall += s.recall;
    acc.f1 += s.f1;
  };
  auto scale = [](RougeScore& acc, double inv) {
    acc.precision *= inv;
    acc.recall *= inv;
    acc.f1 *= inv;
  };

  CorpusRouge out;
  for (const EvalDoc& ed : docs) {
    Eigen::VectorXd probs = score_document(*ed.doc, model, path);
    std::vector<size_t> picked = extract_summary(*ed.doc, probs, k);

    std::vector<std::string> candidate, reference;
    for (size_t idx : picked) {
      for (auto& tok : tokenize(ed.article->body_sentences[idx]))
        candidate.push_back(std::move(tok));
    }
    for (const auto& sent : ed.article->abstract_sentences) {
      for (auto& tok : tokenize(sent)) reference.push_back(std::move(tok));
    }
    add(out.r1, rouge_n(candidate, reference, 1));
    add(out.r2, rouge_n(candidate, reference, 2));
    add(out.rl, rouge_l(candidate, reference));
  }
  const double inv = 1.0 / static_cast<double>(docs.size());
  scale(out.r1, inv);
  scale(out.r2, inv);
  scale(out.rl, inv);
  out.documents = docs.size();
  return out;
}

ForgettingReport forgetting_from_matrix(
    const std::vector<std::vector<double>>& matrix) {
  ForgettingReport report;
  report.matrix = matrix;
  const size_t tasks = matrix.size();
  for (size_t i = 0; i < tasks; ++i) {
    if (matrix[i].size() != i + 1)
      throw std::invalid_argument("forgetting history is ragged");
  }
  if (tasks == 0) return report;
  for (size_t j = 0; j + 1 < tasks; ++j) {
    report.backward_transfer.push_back(matrix[tasks - 1][j] - matrix[j][j]);
  }
  return report;
}

std::string forgetting_svg(const ForgettingReport& report) {
  const int width = 640, height = 400;
  const double left = 60, right = 20, top = 30, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const size_t tasks = report.matrix.size();
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

  auto x_of = [&](size_t i) {
    return tasks <= 1 ? left + plot_w / 2
                      : left + plot_w * static_cast<double>(i) /
                                   static_cast<double>(tasks - 1);
  };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = tick / 4.0;
    const double y = y_of(v);
    svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(y) +
           "\" x2=\"" + std::to_string(left + plot_w) + "\" y2=\"" +
           std::to_string(y) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
           std::to_string(y + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" +
           std::to_string(v).substr(0, 4) + "</text>\n";
  }
  for (size_t i = 0; i < tasks; ++i) {
    svg += "<text x=\"" + std::to_string(x_of(i)) + "\" y=\"" +
           std::to_string(top + plot_h + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" "
           "font-family=\"sans-serif\">after " +
           std::to_string(i + 1) + "</text>\n";
  }
  for (size_t j = 0; j < tasks; ++j) {
    std::string points;
    for (size_t i = j; i < tasks; ++i) {
      points += std::to_string(x_of(i)) + "," +
                std::to_string(y_of(report.matrix[i][j])) + " ";
    }
    const char* color = palette[j % (sizeof(palette) / sizeof(palette[0]))];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    svg += "<text x=\"" + std::to_string(left + plot_w - 4) + "\" y=\"" +
           std::to_string(top + 16 + 16 * static_cast<double>(j)) +
           "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color +
           "\" font-family=\"sans-serif\">task " + std::to_string(j + 1) +
           "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(left) + "\" y=\"18\" font-size=\"13\" "
         "font-family=\"sans-serif\">held-out ROUGE-1 F by training progress"
         "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace dcsum
