// SPDX-License-Identifier: Apache-2.0
#include "dcsum/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace dcsum {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'D', 'C', 'S', 'U', 'M', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

}  // namespace

json model_config_to_json(const ModelConfig& cfg) {
  return json{{"num_layers", cfg.num_layers},
              {"hidden_dim", cfg.hidden_dim},
              {"num_heads", cfg.num_heads},
              {"ffn_dim", cfg.ffn_dim},
              {"head_layers", cfg.head_layers},
              {"head_heads", cfg.head_heads},
              {"adapter_dim", cfg.adapter_dim},
              {"vocab_size", cfg.vocab_size},
              {"max_sequence_length", cfg.max_sequence_length},
              {"dropout", cfg.dropout}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.num_layers = j.value("num_layers", cfg.num_layers);
  cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
  cfg.num_heads = j.value("num_heads", cfg.num_heads);
  cfg.ffn_dim = j.value("ffn_dim", cfg.ffn_dim);
  cfg.head_layers = j.value("head_layers", cfg.head_layers);
  cfg.head_heads = j.value("head_heads", cfg.head_heads);
  cfg.adapter_dim = j.value("adapter_dim", cfg.adapter_dim);
  cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
  cfg.max_sequence_length = j.value("max_sequence_length", cfg.max_sequence_length);
  cfg.dropout = j.value("dropout", cfg.dropout);
  return cfg;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json tensors = json::array();
  std::vector<ParamRef> refs;
  // visit_all mutates nothing; the const_cast keeps one traversal for IO.
  auto& model = const_cast<DualColumnModel&>(ckpt.model);
  visit_all(model, [&](const ParamRef& p) {
    tensors.push_back(json{{"name", p.name}, {"size", p.size}});
    refs.push_back(p);
  });

  json header{{"config", model_config_to_json(ckpt.model.config)},
              {"seed", ckpt.model.seed},
              {"task_count", ckpt.model.task_count},
              {"dataset_hash", to_hex(ckpt.dataset_hash)},
              {"config_hash", to_hex(ckpt.config_hash)},
              {"vocab", ckpt.vocab_tokens},
              {"tensors", tensors},
              {"ewc",
               {{"present", !ckpt.ewc.empty()},
                {"gamma", ckpt.ewc.gamma},
                {"lambda", ckpt.ewc.lambda},
                {"task_count", ckpt.ewc.task_count},
                {"size", ckpt.ewc.fisher_star.size()}}}};
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  const uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const ParamRef& p : refs) {
    out.write(reinterpret_cast<const char*>(p.data),
              static_cast<std::streamsize>(p.size * sizeof(double)));
  }
  if (!ckpt.ewc.empty()) {
    out.write(reinterpret_cast<const char*>(ckpt.ewc.fisher_star.data()),
              static_cast<std::streamsize>(ckpt.ewc.fisher_star.size() *
                                           sizeof(double)));
    out.write(reinterpret_cast<const char*>(ckpt.ewc.theta_star.data()),
              static_cast<std::streamsize>(ckpt.ewc.theta_star.size() *
                                           sizeof(double)));
  }
  if (!out) throw DataError("short write on checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("not a checkpoint file: " + path);
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kVersion)
    throw DataError("unsupported checkpoint version in " + path);
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || header_len == 0 || header_len > (64ull << 20))
    throw DataError("corrupt checkpoint header in " + path);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("truncated checkpoint header in " + path);

  json header;
  try {
    header = json::parse(header_text);
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint header: " + std::string(e.what()));
  }

  Checkpoint ckpt;
  const ModelConfig cfg = model_config_from_json(header.at("config"));
  ckpt.model = init_model(cfg, header.value("seed", 0ull));
  ckpt.model.task_count = header.value("task_count", 0);
  ckpt.vocab_tokens = header.value("vocab", std::vector<std::string>{});
  ckpt.dataset_hash =
      std::stoull(header.value("dataset_hash", std::string("0")), nullptr, 16);
  ckpt.config_hash =
      std::stoull(header.value("config_hash", std::string("0")), nullptr, 16);

  const json& tensors = header.at("tensors");
  size_t next = 0;
  visit_all(ckpt.model, [&](const ParamRef& p) {
    if (next >= tensors.size())
      throw DataError("checkpoint tensor directory is too short");
    const json& entry = tensors.at(next++);
    if (entry.at("name") != p.name ||
        entry.at("size").get<Eigen::Index>() != p.size)
      throw DataError("checkpoint tensor mismatch at " + p.name);
    in.read(reinterpret_cast<char*>(p.data),
            static_cast<std::streamsize>(p.size * sizeof(double)));
    if (!in) throw DataError("truncated tensor payload at " + p.name);
  });
  if (next != tensors.size())
    throw DataError("checkpoint tensor directory is too long");

  const json& ewc = header.at("ewc");
  ckpt.ewc.gamma = ewc.value("gamma", 0.99);
  ckpt.ewc.lambda = ewc.value("lambda", 15.0);
  if (ewc.value("present", false)) {
    const auto n = ewc.at("size").get<Eigen::Index>();
    ckpt.ewc.fisher_star.resize(n);
    ckpt.ewc.theta_star.resize(n);
    in.read(reinterpret_cast<char*>(ckpt.ewc.fisher_star.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    in.read(reinterpret_cast<char*>(ckpt.ewc.theta_star.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw DataError("truncated consolidation state in " + path);
    ckpt.ewc.task_count = ewc.value("task_count", 0);
  }
  return ckpt;
}

}  // namespace dcsum
