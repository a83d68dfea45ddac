// SPDX-License-Identifier: Apache-2.0
#include "dcsum/backward.hpp"

#include <cmath>

namespace dcsum {

namespace {

void dropout_backward(Eigen::MatrixXd& d, const DropoutCache& cache) {
  if (cache.active) d.array() *= cache.mask;
}

// Returns d_input; accumulates parameter gradients.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& d_out,
                                    const LayerNormCache& c,
                                    const LayerNormParams& p,
                                    LayerNormParams& g) {
  g.gain += (d_out.array() * c.x_hat.array()).colwise().sum().matrix().transpose();
  g.bias += d_out.colwise().sum().transpose();

  Eigen::MatrixXd dx_hat =
      (d_out.array().rowwise() * p.gain.transpose().array()).matrix();
  Eigen::MatrixXd dx(d_out.rows(), d_out.cols());
  for (Eigen::Index t = 0; t < d_out.rows(); ++t) {
    const double m1 = dx_hat.row(t).mean();
    const double m2 = dx_hat.row(t).cwiseProduct(c.x_hat.row(t)).mean();
    dx.row(t) =
        c.inv_std(t) * (dx_hat.row(t).array() - m1 - c.x_hat.row(t).array() * m2);
  }
  return dx;
}

Eigen::MatrixXd attention_backward(const Eigen::MatrixXd& d_out,
                                   const AttentionCache& c,
                                   const AttentionParams& p, int num_heads,
                                   AttentionParams& g) {
  const Eigen::Index hidden = d_out.cols();
  const Eigen::Index head_dim = hidden / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  g.wo += c.context.transpose() * d_out;
  g.bo += d_out.colwise().sum().transpose();
  Eigen::MatrixXd d_context = d_out * p.wo.transpose();

  Eigen::MatrixXd dq(d_out.rows(), hidden), dk(d_out.rows(), hidden),
      dv(d_out.rows(), hidden);
  for (int h = 0; h < num_heads; ++h) {
    auto kh = c.k.middleCols(h * head_dim, head_dim);
    auto qh = c.q.middleCols(h * head_dim, head_dim);
    auto vh = c.v.middleCols(h * head_dim, head_dim);
    const Eigen::MatrixXd& probs = c.probs[static_cast<size_t>(h)];
    auto d_ctx = d_context.middleCols(h * head_dim, head_dim);

    Eigen::MatrixXd d_probs = d_ctx * vh.transpose();
    dv.middleCols(h * head_dim, head_dim) = probs.transpose() * d_ctx;

    // Softmax rows: ds = P ⊙ (dP − rowwise dot(dP, P)); masked keys carry
    // exactly-zero probabilities so no gradient leaks through them.
    Eigen::MatrixXd d_scores(probs.rows(), probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const double dot = d_probs.row(i).dot(probs.row(i));
      d_scores.row(i) = probs.row(i).array() * (d_probs.row(i).array() - dot);
    }
    dq.middleCols(h * head_dim, head_dim) = d_scores * kh * scale;
    dk.middleCols(h * head_dim, head_dim) = d_scores.transpose() * qh * scale;
  }

  g.wq += c.input.transpose() * dq;
  g.bq += dq.colwise().sum().transpose();
  g.wk += c.input.transpose() * dk;
  g.bk += dk.colwise().sum().transpose();
  g.wv += c.input.transpose() * dv;
  g.bv += dv.colwise().sum().transpose();
  return dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();
}

Eigen::MatrixXd ffn_backward(const Eigen::MatrixXd& d_out, const FfnCache& c,
                             const FfnParams& p, FfnParams& g) {
  g.w2 += c.act.transpose() * d_out;
  g.b2 += d_out.colwise().sum().transpose();
  Eigen::MatrixXd d_act = d_out * p.w2.transpose();
  Eigen::MatrixXd d_pre =
      d_act.array() * c.pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
  g.w1 += c.input.transpose() * d_pre;
  g.b1 += d_pre.colwise().sum().transpose();
  return d_pre * p.w1.transpose();
}

// The adapter reads a frozen sibling trace, so no gradient flows upstream.
void adapter_backward(const Eigen::MatrixXd& d_out, const AdapterCache& c,
                      const Eigen::MatrixXd& kb_in, const AdapterParams& p,
                      AdapterParams& g) {
  g.gate += (d_out.array() * c.up_out.array()).colwise().sum().matrix().transpose();
  Eigen::MatrixXd d_up_out =
      (d_out.array().rowwise() * p.gate.transpose().array()).matrix();
  g.up += c.act.transpose() * d_up_out;
  Eigen::MatrixXd d_act = d_up_out * p.up.transpose();
  Eigen::MatrixXd d_pre =
      d_act.array() * c.pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
  g.down += kb_in.transpose() * d_pre;
  g.down_bias += d_pre.colwise().sum().transpose();
}

Eigen::MatrixXd encoder_layer_backward(const Eigen::MatrixXd& d_out,
                                       const EncoderLayerCache& c,
                                       const EncoderLayerParams& lp, int num_heads,
                                       EncoderLayerParams& g,
                                       const LayerAdapters* ad,
                                       const Eigen::MatrixXd* kb_attn_in,
                                       const Eigen::MatrixXd* kb_ffn_in,
                                       LayerAdapters* ad_grads) {
  if (ad != nullptr) {
    adapter_backward(d_out, *c.ffn_adapter, *kb_ffn_in, ad->ffn, ad_grads->ffn);
  }
  Eigen::MatrixXd d_ffn_out = d_out;
  dropout_backward(d_ffn_out, c.ffn_drop);
  Eigen::MatrixXd d_ln2_out = ffn_backward(d_ffn_out, c.ffn, lp.ffn, g.ffn);
  Eigen::MatrixXd d_x_mid =
      d_out + layer_norm_backward(d_ln2_out, c.ln2, lp.ln2, g.ln2);

  if (ad != nullptr) {
    adapter_backward(d_x_mid, *c.attn_adapter, *kb_attn_in, ad->attn, ad_grads->attn);
  }
  Eigen::MatrixXd d_attn_out = d_x_mid;
  dropout_backward(d_attn_out, c.attn_drop);
  Eigen::MatrixXd d_ln1_out =
      attention_backward(d_attn_out, c.attn, lp.attn, num_heads, g.attn);
  return d_x_mid + layer_norm_backward(d_ln1_out, c.ln1, lp.ln1, g.ln1);
}

void embed_backward(const Eigen::MatrixXd& d_embed, const EncodedDocument& doc,
                    const ModelConfig& cfg, ColumnParams& g) {
  const double token_scale = std::sqrt(static_cast<double>(cfg.hidden_dim));
  for (size_t t = 0; t < doc.length(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    g.token_embedding.row(doc.token_ids[t]) += token_scale * d_embed.row(row);
    g.segment_embedding.row(doc.segment_ids[t]) += d_embed.row(row);
  }
}

// Shared by the standalone column and the adapter-reading active column.
void column_backward(const Eigen::MatrixXd& d_final, const EncodedDocument& doc,
                     const ColumnParams& col, const ColumnCache& cache,
                     const ModelConfig& cfg, ColumnParams& g,
                     const std::vector<LayerAdapters>* ad, const ColumnCache* kb,
                     std::vector<LayerAdapters>* ad_grads) {
  Eigen::MatrixXd d = d_final;
  for (size_t i = col.layers.size(); i-- > 0;) {
    const Eigen::MatrixXd* kb_attn_in = nullptr;
    const Eigen::MatrixXd* kb_ffn_in = nullptr;
    const LayerAdapters* layer_ad = nullptr;
    LayerAdapters* layer_ad_g = nullptr;
    if (ad != nullptr) {
      kb_attn_in = i == 0 ? &kb->h0 : &kb->layers[i - 1].x_mid;
      kb_ffn_in = i == 0 ? &kb->h0 : &kb->layers[i - 1].x_out;
      layer_ad = &(*ad)[i];
      layer_ad_g = &(*ad_grads)[i];
    }
    d = encoder_layer_backward(d, cache.layers[i], col.layers[i], cfg.num_heads,
                               g.layers[i], layer_ad, kb_attn_in, kb_ffn_in,
                               layer_ad_g);
  }
  dropout_backward(d, cache.embed_drop);
  embed_backward(d, doc, cfg, g);
}

// Returns d(head input); accumulates head parameter gradients.
Eigen::MatrixXd head_backward(const EncodedDocument& doc, const HeadParams& head,
                              const HeadCache& cache, const ModelConfig& cfg,
                              const Eigen::VectorXd& dlogits, HeadParams& g) {
  const Eigen::MatrixXd& top =
      cache.layers.empty() ? cache.input : cache.layers.back().x_out;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(top.rows(), top.cols());
  for (size_t s = 0; s < doc.sentence_count(); ++s) {
    const auto pos = static_cast<Eigen::Index>(doc.cls_positions[s]);
    const double dz = dlogits(static_cast<Eigen::Index>(s));
    d.row(pos) += dz * head.score_w.transpose();
    g.score_w += dz * top.row(pos).transpose();
    g.score_b(0) += dz;
  }
  for (size_t i = cache.layers.size(); i-- > 0;) {
    d = encoder_layer_backward(d, cache.layers[i], head.layers[i], cfg.head_heads,
                               g.layers[i], nullptr, nullptr, nullptr, nullptr);
  }
  return d;
}

}  // namespace

void ac_path_backward(const EncodedDocument& doc, const DualColumnModel& model,
                      const AcPathCache& cache, const Eigen::VectorXd& dlogits,
                      DualColumnModel& grads) {
  Eigen::MatrixXd d_hidden = head_backward(doc, model.head, cache.head,
                                           model.config, dlogits, grads.head);
  column_backward(d_hidden, doc, model.ac, cache.ac, model.config, grads.ac,
                  &model.adapters, &cache.kb, &grads.adapters);
}

void kb_path_backward(const EncodedDocument& doc, const DualColumnModel& model,
                      const KbPathCache& cache, const Eigen::VectorXd& dlogits,
                      DualColumnModel& grads) {
  Eigen::MatrixXd d_hidden = head_backward(doc, model.head, cache.head,
                                           model.config, dlogits, grads.head);
  column_backward(d_hidden, doc, model.kb, cache.kb, model.config, grads.kb,
                  nullptr, nullptr, nullptr);
}

}  // namespace dcsum
