// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "dcsum/losses.hpp"
#include "dcsum/model.hpp"

namespace dcsum {

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Everything a later process needs to score documents or resume training:
// config, every parameter tensor by canonical name, the consolidation state,
// the vocabulary, and the hashes that tie the run to its dataset and config.
struct Checkpoint {
  DualColumnModel model;
  EwcState ewc;
  std::vector<std::string> vocab_tokens;
  uint64_t dataset_hash = 0;
  uint64_t config_hash = 0;
};

// Single-file archive: magic, version, JSON header (config, seed, tensor
// directory, vocabulary, hashes), then raw 64-bit little-endian floats.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dcsum
