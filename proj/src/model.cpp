// SPDX-License-Identifier: Apache-2.0
#include "dcsum/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dcsum {

void ModelConfig::validate() const {
  if (hidden_dim <= 0) throw std::invalid_argument("hidden_dim must be positive");
  if (num_heads <= 0 || hidden_dim % num_heads != 0)
    throw std::invalid_argument("hidden_dim must be divisible by num_heads");
  if (head_layers != 2)
    throw std::invalid_argument("the scoring head is a fixed two-layer stack");
  if (head_heads <= 0 || hidden_dim % head_heads != 0)
    throw std::invalid_argument("hidden_dim must be divisible by head_heads");
  if (num_layers < 0) throw std::invalid_argument("num_layers must be >= 0");
  if (vocab_size < 5) throw std::invalid_argument("vocab_size must be >= 5");
  if (max_sequence_length < 4)
    throw std::invalid_argument("max_sequence_length too small");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("dropout must be in [0,1)");
}

double xavier_bound(Eigen::Index fan_in, Eigen::Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

namespace {

void fill_xavier(Eigen::MatrixXd& m, Rng& rng) {
  double bound = xavier_bound(m.rows(), m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = (2.0 * rng.next_double() - 1.0) * bound;
    }
  }
}

LayerNormParams make_ln(int hidden) {
  LayerNormParams p;
  p.gain = Eigen::VectorXd::Ones(hidden);
  p.bias = Eigen::VectorXd::Zero(hidden);
  return p;
}

EncoderLayerParams make_layer(const ModelConfig& cfg, Rng& rng) {
  int h = cfg.hidden_dim;
  int f = cfg.effective_ffn();
  EncoderLayerParams l;
  l.ln1 = make_ln(h);
  l.ln2 = make_ln(h);
  l.attn.wq.resize(h, h);
  l.attn.wk.resize(h, h);
  l.attn.wv.resize(h, h);
  l.attn.wo.resize(h, h);
  fill_xavier(l.attn.wq, rng);
  fill_xavier(l.attn.wk, rng);
  fill_xavier(l.attn.wv, rng);
  fill_xavier(l.attn.wo, rng);
  l.attn.bq = Eigen::VectorXd::Zero(h);
  l.attn.bk = Eigen::VectorXd::Zero(h);
  l.attn.bv = Eigen::VectorXd::Zero(h);
  l.attn.bo = Eigen::VectorXd::Zero(h);
  l.ffn.w1.resize(h, f);
  l.ffn.w2.resize(f, h);
  fill_xavier(l.ffn.w1, rng);
  fill_xavier(l.ffn.w2, rng);
  l.ffn.b1 = Eigen::VectorXd::Zero(f);
  l.ffn.b2 = Eigen::VectorXd::Zero(h);
  return l;
}

ColumnParams make_column(const ModelConfig& cfg, Rng& rng) {
  ColumnParams col;
  col.token_embedding.resize(cfg.vocab_size, cfg.hidden_dim);
  col.segment_embedding.resize(2, cfg.hidden_dim);
  fill_xavier(col.token_embedding, rng);
  fill_xavier(col.segment_embedding, rng);
  col.layers.reserve(cfg.num_layers);
  for (int i = 0; i < cfg.num_layers; ++i) col.layers.push_back(make_layer(cfg, rng));
  return col;
}

AdapterParams make_adapter(const ModelConfig& cfg, Rng& rng) {
  int h = cfg.hidden_dim;
  int a = cfg.effective_adapter();
  AdapterParams p;
  p.down.resize(h, a);
  p.up.resize(a, h);
  fill_xavier(p.down, rng);
  fill_xavier(p.up, rng);
  p.down_bias = Eigen::VectorXd::Zero(a);
  p.gate.resize(h);
  for (int i = 0; i < h; ++i) p.gate(i) = rng.next_double();  // U[0,1)
  return p;
}

std::vector<LayerAdapters> make_adapters(const ModelConfig& cfg, Rng& rng) {
  std::vector<LayerAdapters> out;
  out.reserve(cfg.num_layers);
  for (int i = 0; i < cfg.num_layers; ++i) {
    LayerAdapters la;
    la.attn = make_adapter(cfg, rng);
    la.ffn = make_adapter(cfg, rng);
    out.push_back(std::move(la));
  }
  return out;
}

HeadParams make_head(const ModelConfig& cfg, Rng& rng) {
  ModelConfig head_cfg = cfg;
  head_cfg.num_heads = cfg.head_heads;
  HeadParams head;
  head.layers.reserve(cfg.head_layers);
  for (int i = 0; i < cfg.head_layers; ++i)
    head.layers.push_back(make_layer(head_cfg, rng));
  head.score_w.resize(cfg.hidden_dim);
  {
    Eigen::MatrixXd w(cfg.hidden_dim, 1);
    fill_xavier(w, rng);
    head.score_w = w.col(0);
  }
  head.score_b = Eigen::VectorXd::Zero(1);
  return head;
}

}  // namespace

DualColumnModel init_model(const ModelConfig& config, uint64_t seed) {
  config.validate();
  DualColumnModel m;
  m.config = config;
  m.seed = seed;
  m.task_count = 0;
  Rng rng(seed_chain(seed, "model-init"));
  m.kb = make_column(config, rng);
  m.ac = make_column(config, rng);
  m.adapters = make_adapters(config, rng);
  m.head = make_head(config, rng);
  return m;
}

void reinit_column(DualColumnModel& model, uint64_t seed) {
  Rng rng(seed_chain(seed, "column-reinit"));
  model.ac = make_column(model.config, rng);
  model.adapters = make_adapters(model.config, rng);
}

DualColumnModel zeros_like(const DualColumnModel& model) {
  DualColumnModel z = model;
  visit_all(z, [](const ParamRef& p) {
    std::fill(p.data, p.data + p.size, 0.0);
  });
  return z;
}

void visit_all_fn(DualColumnModel& m, const std::function<void(const ParamRef&)>& fn) {
  visit_all(m, fn);
}

void visit_consolidated_fn(DualColumnModel& m,
                           const std::function<void(const ParamRef&)>& fn) {
  visit_consolidated(m, fn);
}

void visit_active_fn(DualColumnModel& m, const std::function<void(const ParamRef&)>& fn) {
  visit_active(m, fn);
}

Eigen::Index param_count(DualColumnModel& m, ParamVisitFn visit) {
  Eigen::Index n = 0;
  visit(m, [&](const ParamRef& p) { n += p.size; });
  return n;
}

Eigen::VectorXd flatten_params(DualColumnModel& m, ParamVisitFn visit) {
  Eigen::VectorXd flat(param_count(m, visit));
  Eigen::Index offset = 0;
  visit(m, [&](const ParamRef& p) {
    std::copy(p.data, p.data + p.size, flat.data() + offset);
    offset += p.size;
  });
  return flat;
}

void unflatten_params(DualColumnModel& m, ParamVisitFn visit, const Eigen::VectorXd& flat) {
  if (flat.size() != param_count(m, visit))
    throw std::invalid_argument("flat parameter vector has wrong length");
  Eigen::Index offset = 0;
  visit(m, [&](const ParamRef& p) {
    std::copy(flat.data() + offset, flat.data() + offset + p.size, p.data);
    offset += p.size;
  });
}

}  // namespace dcsum
