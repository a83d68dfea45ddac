// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcsum/common.hpp"

namespace dcsum {

struct ModelConfig {
  int num_layers = 4;    // encoder layers per column
  int hidden_dim = 128;
  int num_heads = 4;
  int ffn_dim = 0;       // 0 -> 4 * hidden_dim
  int head_layers = 2;   // fixed two-layer scoring stack
  int head_heads = 4;
  int adapter_dim = 0;   // bottleneck width, 0 -> hidden_dim / 4
  int vocab_size = 0;
  int max_sequence_length = 512;
  double dropout = 0.1;

  int effective_ffn() const { return ffn_dim > 0 ? ffn_dim : 4 * hidden_dim; }
  int effective_adapter() const {
    return adapter_dim > 0 ? adapter_dim : std::max(1, hidden_dim / 4);
  }
  void validate() const;
};

struct LayerNormParams {
  Eigen::VectorXd gain;
  Eigen::VectorXd bias;
};

struct AttentionParams {
  Eigen::MatrixXd wq, wk, wv, wo;  // (hidden x hidden)
  Eigen::VectorXd bq, bk, bv, bo;
};

struct FfnParams {
  Eigen::MatrixXd w1;  // (hidden x ffn)
  Eigen::MatrixXd w2;  // (ffn x hidden)
  Eigen::VectorXd b1, b2;
};

struct EncoderLayerParams {
  LayerNormParams ln1, ln2;
  AttentionParams attn;
  FfnParams ffn;
};

struct ColumnParams {
  Eigen::MatrixXd token_embedding;    // (vocab x hidden)
  Eigen::MatrixXd segment_embedding;  // (2 x hidden)
  std::vector<EncoderLayerParams> layers;
};

// Gated bottleneck connection reading the sibling column's previous-layer
// state: out = gate ⊙ (up' · gelu(down' · x + down_bias)).
struct AdapterParams {
  Eigen::MatrixXd down;        // (hidden x adapter_dim)
  Eigen::VectorXd down_bias;   // (adapter_dim)
  Eigen::MatrixXd up;          // (adapter_dim x hidden)
  Eigen::VectorXd gate;        // (hidden), initialized U[0,1)
};

struct LayerAdapters {
  AdapterParams attn;
  AdapterParams ffn;
};

struct HeadParams {
  std::vector<EncoderLayerParams> layers;
  Eigen::VectorXd score_w;  // (hidden)
  Eigen::VectorXd score_b;  // (1)
};

struct DualColumnModel {
  ModelConfig config;
  ColumnParams kb;  // knowledge column, updated only at consolidation
  ColumnParams ac;  // active column, trained per task
  std::vector<LayerAdapters> adapters;  // one pair per active-column layer
  HeadParams head;
  uint64_t seed = 0;
  int task_count = 0;
};

// Xavier-uniform weights, zero biases, unit layer-norm gains, gates U[0,1).
// Deterministic given the seed.
DualColumnModel init_model(const ModelConfig& config, uint64_t seed);

void reinit_column(DualColumnModel& model, uint64_t seed);  // ac + adapters

DualColumnModel zeros_like(const DualColumnModel& model);

double xavier_bound(Eigen::Index fan_in, Eigen::Index fan_out);

// ---- parameter traversal ----------------------------------------------

enum class ParamKind { kWeight, kVector };  // only kWeight receives weight decay

struct ParamRef {
  std::string name;
  double* data;
  Eigen::Index size;
  ParamKind kind;
};

namespace detail {

template <typename Fn>
void visit_tensor(const std::string& name, Eigen::MatrixXd& m, ParamKind kind,
                  Fn&& fn) {
  fn(ParamRef{name, m.data(), m.size(), kind});
}

template <typename Fn>
void visit_tensor(const std::string& name, Eigen::VectorXd& v, ParamKind kind,
                  Fn&& fn) {
  fn(ParamRef{name, v.data(), v.size(), kind});
}

template <typename Fn>
void visit_encoder_layer(const std::string& prefix, EncoderLayerParams& l, Fn&& fn) {
  visit_tensor(prefix + ".ln1.gain", l.ln1.gain, ParamKind::kVector, fn);
  visit_tensor(prefix + ".ln1.bias", l.ln1.bias, ParamKind::kVector, fn);
  visit_tensor(prefix + ".attn.wq", l.attn.wq, ParamKind::kWeight, fn);
  visit_tensor(prefix + ".attn.bq", l.attn.bq, ParamKind::kVector, fn);
  visit_tensor(prefix + ".attn.wk", l.attn.wk, ParamKind::kWeight, fn);
  visit_tensor(prefix + ".attn.bk", l.attn.bk, ParamKind::kVector, fn);
  visit_tensor(prefix + ".attn.wv", l.attn.wv, ParamKind::kWeight, fn);
  visit_tensor(prefix + ".attn.bv", l.attn.bv, ParamKind::kVector, fn);
  visit_tensor(prefix + ".attn.wo", l.attn.wo, ParamKind::kWeight, fn);
  visit_tensor(prefix + ".attn.bo", l.attn.bo, ParamKind::kVector, fn);
  visit_tensor(prefix + ".ln2.gain", l.ln2.gain, ParamKind::kVector, fn);
  visit_tensor(prefix + ".ln2.bias", l.ln2.bias, ParamKind::kVector, fn);
  visit_tensor(prefix + ".ffn.w1", l.ffn.w1, ParamKind::kWeight, fn);
  visit_tensor(prefix + ".ffn.b1", l.ffn.b1, ParamKind::kVector, fn);
  visit_tensor(prefix + ".ffn.w2", l.ffn.w2, ParamKind::kWeight, fn);
  visit_tensor(prefix + ".ffn.b2", l.ffn.b2, ParamKind::kVector, fn);
}

}  // namespace detail

template <typename Fn>
void visit_column(const std::string& prefix, ColumnParams& col, Fn&& fn) {
  detail::visit_tensor(prefix + ".embed.token", col.token_embedding,
                       ParamKind::kWeight, fn);
  detail::visit_tensor(prefix + ".embed.segment", col.segment_embedding,
                       ParamKind::kWeight, fn);
  for (size_t i = 0; i < col.layers.size(); ++i) {
    detail::visit_encoder_layer(prefix + ".layer" + std::to_string(i),
                                col.layers[i], fn);
  }
}

template <typename Fn>
void visit_adapter(const std::string& prefix, AdapterParams& a, Fn&& fn) {
  detail::visit_tensor(prefix + ".down", a.down, ParamKind::kWeight, fn);
  detail::visit_tensor(prefix + ".down_bias", a.down_bias, ParamKind::kVector, fn);
  detail::visit_tensor(prefix + ".up", a.up, ParamKind::kWeight, fn);
  detail::visit_tensor(prefix + ".gate", a.gate, ParamKind::kVector, fn);
}

template <typename Fn>
void visit_adapters(std::vector<LayerAdapters>& adapters, Fn&& fn) {
  for (size_t i = 0; i < adapters.size(); ++i) {
    std::string prefix = "adapter.layer" + std::to_string(i);
    visit_adapter(prefix + ".attn", adapters[i].attn, fn);
    visit_adapter(prefix + ".ffn", adapters[i].ffn, fn);
  }
}

template <typename Fn>
void visit_head(HeadParams& head, Fn&& fn) {
  for (size_t i = 0; i < head.layers.size(); ++i) {
    detail::visit_encoder_layer("head.layer" + std::to_string(i), head.layers[i], fn);
  }
  detail::visit_tensor("head.score.w", head.score_w, ParamKind::kWeight, fn);
  detail::visit_tensor("head.score.b", head.score_b, ParamKind::kVector, fn);
}

// Every parameter tensor in canonical checkpoint order.
template <typename Fn>
void visit_all(DualColumnModel& m, Fn&& fn) {
  visit_column("kb", m.kb, fn);
  visit_column("ac", m.ac, fn);
  visit_adapters(m.adapters, fn);
  visit_head(m.head, fn);
}

// The consolidated set: knowledge column plus the shared scoring head.
template <typename Fn>
void visit_consolidated(DualColumnModel& m, Fn&& fn) {
  visit_column("kb", m.kb, fn);
  visit_head(m.head, fn);
}

// Trainable set of the per-task stage: active column, adapters, head.
template <typename Fn>
void visit_active(DualColumnModel& m, Fn&& fn) {
  visit_column("ac", m.ac, fn);
  visit_adapters(m.adapters, fn);
  visit_head(m.head, fn);
}

template <typename V>
uint64_t params_checksum(DualColumnModel& m, V visit) {
  uint64_t h = 0xcbf29ce484222325ull;
  visit(m, [&](const ParamRef& p) {
    h = fnv1a(p.data, static_cast<size_t>(p.size) * sizeof(double), h);
  });
  return h;
}

// std::function-based traversal handles for runtime selection.
using ParamVisitFn = void (*)(DualColumnModel&, const std::function<void(const ParamRef&)>&);
void visit_all_fn(DualColumnModel& m, const std::function<void(const ParamRef&)>& fn);
void visit_consolidated_fn(DualColumnModel& m,
                           const std::function<void(const ParamRef&)>& fn);
void visit_active_fn(DualColumnModel& m, const std::function<void(const ParamRef&)>& fn);

Eigen::Index param_count(DualColumnModel& m, ParamVisitFn visit);
Eigen::VectorXd flatten_params(DualColumnModel& m, ParamVisitFn visit);
void unflatten_params(DualColumnModel& m, ParamVisitFn visit, const Eigen::VectorXd& flat);

}  // namespace dcsum
