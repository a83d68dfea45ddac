// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dcsum/encode.hpp"
#include "dcsum/model.hpp"

namespace dcsum {

// Exact GELU (erf form) and its derivative.
double gelu(double x);
double gelu_grad(double x);

// pe[t, 2k] = sin(t / 10000^(2k/hidden)), pe[t, 2k+1] = cos(same argument).
Eigen::MatrixXd sinusoidal_positions(int length, int hidden);

// rng == nullptr or rate == 0 means evaluation mode (identity).
struct DropoutState {
  double rate = 0.0;
  Rng* rng = nullptr;
  bool active() const { return rng != nullptr && rate > 0.0; }
};

// ---- forward caches (everything backward needs) -------------------------

struct LayerNormCache {
  Eigen::MatrixXd x_hat;     // normalized input, rows = positions
  Eigen::VectorXd inv_std;   // per-position 1/sqrt(var + eps)
};

struct AttentionCache {
  Eigen::MatrixXd input;                // sublayer input (post layer-norm)
  Eigen::MatrixXd q, k, v;              // projections, heads side by side
  std::vector<Eigen::MatrixXd> probs;   // per-head softmax weights (T x T)
  Eigen::MatrixXd context;              // concatenated head outputs before wo
};

struct FfnCache {
  Eigen::MatrixXd input;  // post layer-norm
  Eigen::MatrixXd pre;    // input * w1 + b1
  Eigen::MatrixXd act;    // gelu(pre)
};

struct DropoutCache {
  bool active = false;
  Eigen::ArrayXXd mask;  // 0 or 1/(1-rate), sampled per element
};

struct AdapterCache {
  Eigen::MatrixXd pre;     // kb_in * down + down_bias
  Eigen::MatrixXd act;     // gelu(pre)
  Eigen::MatrixXd up_out;  // act * up (before gating)
};

struct EncoderLayerCache {
  LayerNormCache ln1;
  AttentionCache attn;
  DropoutCache attn_drop;
  std::optional<AdapterCache> attn_adapter;
  Eigen::MatrixXd x_mid;  // after attention residual
  LayerNormCache ln2;
  FfnCache ffn;
  DropoutCache ffn_drop;
  std::optional<AdapterCache> ffn_adapter;
  Eigen::MatrixXd x_out;  // after feed-forward residual
};

// One full pass of a column. x_mid/x_out per layer double as the trace the
// sibling column's adapters read (h0 = embedding output).
struct ColumnCache {
  Eigen::MatrixXd h0;  // embedding output (post-dropout)
  DropoutCache embed_drop;
  std::vector<EncoderLayerCache> layers;
  const Eigen::MatrixXd& final_hidden() const {
    return layers.empty() ? h0 : layers.back().x_out;
  }
};

struct HeadCache {
  std::vector<EncoderLayerCache> layers;
  Eigen::MatrixXd input;          // hidden sequence fed to the head
  Eigen::VectorXd logits, probs;  // one per [CLS] position
};

// ---- forward passes ------------------------------------------------------

// Token embedding (scaled by sqrt(hidden)) + segment embedding + sinusoid.
Eigen::MatrixXd embed(const EncodedDocument& doc, const ColumnParams& col,
                      const ModelConfig& cfg);

// Standalone encoder column (also the KB pass; its cache is the trace the
// active column's adapters consume).
ColumnCache column_forward(const EncodedDocument& doc, const ColumnParams& col,
                           const ModelConfig& cfg, DropoutState drop);

// Active column with gated adapter reads of the KB trace: layer i's attention
// sublayer reads KB's post-attention state of layer i-1 and its feed-forward
// sublayer KB's post-feed-forward state of layer i-1; layer 0 reads KB's
// embedding output for both.
ColumnCache ac_forward(const EncodedDocument& doc, const ColumnParams& col,
                       const std::vector<LayerAdapters>& adapters,
                       const ColumnCache& kb, const ModelConfig& cfg,
                       DropoutState drop);

// Two-layer encoder head over the full hidden sequence; logits read at the
// [CLS] positions, squashed by the logistic function.
HeadCache head_forward(const Eigen::MatrixXd& hidden, const EncodedDocument& doc,
                       const HeadParams& head, const ModelConfig& cfg,
                       DropoutState drop);

// Convenience bundles for the two scoring paths.
struct AcPathCache {
  ColumnCache kb;
  ColumnCache ac;
  HeadCache head;
};

struct KbPathCache {
  ColumnCache kb;
  HeadCache head;
};

// Deployed path: KB trace -> active column with adapters -> head.
// `drop_ac` regularizes only the trainable side; the KB trace runs clean.
AcPathCache ac_path_forward(const EncodedDocument& doc, DualColumnModel& model,
                            DropoutState drop_ac);

// Student/consolidated path: KB column alone -> head.
KbPathCache kb_path_forward(const EncodedDocument& doc, DualColumnModel& model,
                            DropoutState drop);

}  // namespace dcsum
