// SPDX-License-Identifier: Apache-2.0
#include "dcsum/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcsum {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kMaskBias = -1e9;  // exp underflows to exact 0 after max-shift

void check_finite(const Eigen::MatrixXd& m, const char* where, int layer) {
  if (!m.allFinite()) {
    throw NumericalError(std::string("non-finite activation in ") + where +
                         " layer " + std::to_string(layer));
  }
}

void apply_dropout(Eigen::MatrixXd& x, DropoutState drop, DropoutCache& cache) {
  if (!drop.active()) {
    cache.active = false;
    return;
  }
  cache.active = true;
  cache.mask.resize(x.rows(), x.cols());
  const double keep_scale = 1.0 / (1.0 - drop.rate);
  double* m = cache.mask.data();
  for (Eigen::Index i = 0; i < cache.mask.size(); ++i) {
    m[i] = drop.rng->next_double() < drop.rate ? 0.0 : keep_scale;
  }
  x.array() *= cache.mask;
}

Eigen::MatrixXd layer_norm_forward(const Eigen::MatrixXd& x,
                                   const LayerNormParams& p, LayerNormCache& c) {
  const Eigen::Index rows = x.rows(), cols = x.cols();
  c.x_hat.resize(rows, cols);
  c.inv_std.resize(rows);
  Eigen::MatrixXd y(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double mu = x.row(t).mean();
    const double var = (x.row(t).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    c.inv_std(t) = inv;
    c.x_hat.row(t) = (x.row(t).array() - mu) * inv;
    y.row(t) = c.x_hat.row(t).cwiseProduct(p.gain.transpose()) + p.bias.transpose();
  }
  return y;
}

Eigen::MatrixXd attention_forward(const Eigen::MatrixXd& x, const AttentionParams& p,
                                  const std::vector<int>& mask, int num_heads,
                                  AttentionCache& c) {
  const Eigen::Index seq = x.rows();
  const Eigen::Index hidden = x.cols();
  const Eigen::Index head_dim = hidden / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  c.input = x;
  c.q = (x * p.wq).rowwise() + p.bq.transpose();
  c.k = (x * p.wk).rowwise() + p.bk.transpose();
  c.v = (x * p.wv).rowwise() + p.bv.transpose();
  c.probs.clear();
  c.probs.reserve(num_heads);
  c.context.resize(seq, hidden);

  for (int h = 0; h < num_heads; ++h) {
    auto qh = c.q.middleCols(h * head_dim, head_dim);
    auto kh = c.k.middleCols(h * head_dim, head_dim);
    auto vh = c.v.middleCols(h * head_dim, head_dim);
    Eigen::MatrixXd scores = (qh * kh.transpose()) * scale;
    for (Eigen::Index j = 0; j < seq; ++j) {
      if (!mask[static_cast<size_t>(j)]) scores.col(j).array() += kMaskBias;
    }
    Eigen::MatrixXd probs(seq, seq);
    for (Eigen::Index i = 0; i < seq; ++i) {
      const double row_max = scores.row(i).maxCoeff();
      Eigen::ArrayXd e = (scores.row(i).array() - row_max).exp();
      probs.row(i) = e / e.sum();
    }
    c.context.middleCols(h * head_dim, head_dim) = probs * vh;
    c.probs.push_back(std::move(probs));
  }
  return (c.context * p.wo).rowwise() + p.bo.transpose();
}

Eigen::MatrixXd ffn_forward(const Eigen::MatrixXd& x, const FfnParams& p,
                            FfnCache& c) {
  c.input = x;
  c.pre = (x * p.w1).rowwise() + p.b1.transpose();
  c.act = c.pre.unaryExpr([](double v) { return gelu(v); });
  return (c.act * p.w2).rowwise() + p.b2.transpose();
}

// Gated bottleneck read of the sibling column's state:
// gate ⊙ (gelu(kb_in · down + down_bias) · up).
Eigen::MatrixXd adapter_forward(const Eigen::MatrixXd& kb_in,
                                const AdapterParams& a, AdapterCache& c) {
  c.pre = (kb_in * a.down).rowwise() + a.down_bias.transpose();
  c.act = c.pre.unaryExpr([](double v) { return gelu(v); });
  c.up_out = c.act * a.up;
  return c.up_out.array().rowwise() * a.gate.transpose().array();
}

// Pre-norm block; the optional adapter terms join each residual branch.
Eigen::MatrixXd encoder_layer_forward(const Eigen::MatrixXd& x,
                                      const EncoderLayerParams& lp,
                                      const std::vector<int>& mask, int num_heads,
                                      DropoutState drop, const LayerAdapters* ad,
                                      const Eigen::MatrixXd* kb_attn_in,
                                      const Eigen::MatrixXd* kb_ffn_in,
                                      EncoderLayerCache& c) {
  Eigen::MatrixXd ln1_out = layer_norm_forward(x, lp.ln1, c.ln1);
  Eigen::MatrixXd attn_out = attention_forward(ln1_out, lp.attn, mask, num_heads, c.attn);
  apply_dropout(attn_out, drop, c.attn_drop);
  c.x_mid = x + attn_out;
  if (ad != nullptr) {
    c.attn_adapter.emplace();
    c.x_mid += adapter_forward(*kb_attn_in, ad->attn, *c.attn_adapter);
  }

  Eigen::MatrixXd ln2_out = layer_norm_forward(c.x_mid, lp.ln2, c.ln2);
  Eigen::MatrixXd ffn_out = ffn_forward(ln2_out, lp.ffn, c.ffn);
  apply_dropout(ffn_out, drop, c.ffn_drop);
  c.x_out = c.x_mid + ffn_out;
  if (ad != nullptr) {
    c.ffn_adapter.emplace();
    c.x_out += adapter_forward(*kb_ffn_in, ad->ffn, *c.ffn_adapter);
  }
  return c.x_out;
}

}  // namespace

double gelu(double x) { return 0.5 * x * std::erfc(-x / std::sqrt(2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

Eigen::MatrixXd sinusoidal_positions(int length, int hidden) {
  Eigen::MatrixXd pe(length, hidden);
  for (int t = 0; t < length; ++t) {
    for (int k = 0; 2 * k < hidden; ++k) {
      const double exponent = static_cast<double>(2 * k) / hidden;
      const double arg = t / std::pow(10000.0, exponent);
      pe(t, 2 * k) = std::sin(arg);
      if (2 * k + 1 < hidden) pe(t, 2 * k + 1) = std::cos(arg);
    }
  }
  return pe;
}

Eigen::MatrixXd embed(const EncodedDocument& doc, const ColumnParams& col,
                      const ModelConfig& cfg) {
  const size_t seq = doc.length();
  if (seq == 0) throw std::invalid_argument("cannot embed an empty document");
  if (seq > static_cast<size_t>(cfg.max_sequence_length))
    throw std::invalid_argument("sequence exceeds max_sequence_length");
  const double token_scale = std::sqrt(static_cast<double>(cfg.hidden_dim));
  Eigen::MatrixXd pe = sinusoidal_positions(static_cast<int>(seq), cfg.hidden_dim);
  Eigen::MatrixXd out(seq, cfg.hidden_dim);
  for (size_t t = 0; t < seq; ++t) {
    const int id = doc.token_ids[t];
    if (id < 0 || id >= cfg.vocab_size)
      throw std::invalid_argument("token id out of vocabulary range");
    const int seg = doc.segment_ids[t];
    if (seg != 0 && seg != 1) throw std::invalid_argument("segment id must be 0/1");
    out.row(t) = col.token_embedding.row(id) * token_scale +
                 col.segment_embedding.row(seg) +
                 pe.row(static_cast<Eigen::Index>(t));
  }
  return out;
}

ColumnCache column_forward(const EncodedDocument& doc, const ColumnParams& col,
                           const ModelConfig& cfg, DropoutState drop) {
  ColumnCache cache;
  cache.h0 = embed(doc, col, cfg);
  apply_dropout(cache.h0, drop, cache.embed_drop);
  check_finite(cache.h0, "column embedding", 0);
  cache.layers.resize(col.layers.size());
  Eigen::MatrixXd x = cache.h0;
  for (size_t i = 0; i < col.layers.size(); ++i) {
    x = encoder_layer_forward(x, col.layers[i], doc.attention_mask, cfg.num_heads,
                              drop, nullptr, nullptr, nullptr, cache.layers[i]);
    check_finite(x, "column", static_cast<int>(i));
  }
  return cache;
}

ColumnCache ac_forward(const EncodedDocument& doc, const ColumnParams& col,
                       const std::vector<LayerAdapters>& adapters,
                       const ColumnCache& kb, const ModelConfig& cfg,
                       DropoutState drop) {
  if (adapters.size() != col.layers.size())
    throw std::invalid_argument("adapter count does not match layer count");
  if (kb.layers.size() != col.layers.size())
    throw std::invalid_argument("knowledge-column trace does not match layer count");

  ColumnCache cache;
  cache.h0 = embed(doc, col, cfg);
  apply_dropout(cache.h0, drop, cache.embed_drop);
  check_finite(cache.h0, "active-column embedding", 0);
  cache.layers.resize(col.layers.size());
  Eigen::MatrixXd x = cache.h0;
  for (size_t i = 0; i < col.layers.size(); ++i) {
    // Layer i reads the sibling's previous-layer state; layer 0 its embedding.
    const Eigen::MatrixXd& kb_attn_in = i == 0 ? kb.h0 : kb.layers[i - 1].x_mid;
    const Eigen::MatrixXd& kb_ffn_in = i == 0 ? kb.h0 : kb.layers[i - 1].x_out;
    x = encoder_layer_forward(x, col.layers[i], doc.attention_mask, cfg.num_heads,
                              drop, &adapters[i], &kb_attn_in, &kb_ffn_in,
                              cache.layers[i]);
    check_finite(x, "active column", static_cast<int>(i));
  }
  return cache;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

HeadCache head_forward(const Eigen::MatrixXd& hidden, const EncodedDocument& doc,
                       const HeadParams& head, const ModelConfig& cfg,
                       DropoutState drop) {
  HeadCache cache;
  cache.input = hidden;
  cache.layers.resize(head.layers.size());
  Eigen::MatrixXd x = hidden;
  for (size_t i = 0; i < head.layers.size(); ++i) {
    x = encoder_layer_forward(x, head.layers[i], doc.attention_mask, cfg.head_heads,
                              drop, nullptr, nullptr, nullptr, cache.layers[i]);
    check_finite(x, "head", static_cast<int>(i));
  }
  const size_t n = doc.sentence_count();
  cache.logits.resize(static_cast<Eigen::Index>(n));
  cache.probs.resize(static_cast<Eigen::Index>(n));
  for (size_t s = 0; s < n; ++s) {
    const size_t pos = doc.cls_positions[s];
    if (pos >= static_cast<size_t>(x.rows()))
      throw std::invalid_argument("[CLS] position outside the sequence");
    const double z = x.row(static_cast<Eigen::Index>(pos)).dot(head.score_w.transpose()) +
                     head.score_b(0);
    cache.logits(static_cast<Eigen::Index>(s)) = z;
    cache.probs(static_cast<Eigen::Index>(s)) = sigmoid(z);
  }
  if (!cache.logits.allFinite()) throw NumericalError("non-finite sentence logits");
  return cache;
}

AcPathCache ac_path_forward(const EncodedDocument& doc, DualColumnModel& model,
                            DropoutState drop_ac) {
  AcPathCache out;
  out.kb = column_forward(doc, model.kb, model.config, DropoutState{});
  out.ac = ac_forward(doc, model.ac, model.adapters, out.kb, model.config, drop_ac);
  out.head = head_forward(out.ac.final_hidden(), doc, model.head, model.config, drop_ac);
  return out;
}

KbPathCache kb_path_forward(const EncodedDocument& doc, DualColumnModel& model,
                            DropoutState drop) {
  KbPathCache out;
  out.kb = column_forward(doc, model.kb, model.config, drop);
  out.head = head_forward(out.kb.final_hidden(), doc, model.head, model.config, drop);
  return out;
}

}  // namespace dcsum
