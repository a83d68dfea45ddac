// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "dcsum/corpus.hpp"
#include "dcsum/encode.hpp"
#include "dcsum/rouge.hpp"
#include "dcsum/vocab.hpp"

namespace dcsum {

struct PrepareConfig {
  size_t shard_size = 5000;
  size_t max_vocab = 30000;
  size_t min_freq = 1;
  size_t max_summary_sentences = 20;
  size_t max_sequence_length = 512;
  OracleMetric oracle_metric = OracleMetric::kRouge12;
};

nlohmann::json prepare_config_to_json(const PrepareConfig& cfg);
PrepareConfig prepare_config_from_json(const nlohmann::json& j);

struct PrepareStats {
  IngestStats ingest;
  size_t unencodable = 0;  // first sentence longer than the sequence budget
  std::vector<size_t> task_sizes;
  double label_density = 0.0;  // mean positive labels per retained document
};

// A prepared corpus: chronologically sorted encodable articles, their encoded
// forms, the vocabulary, and the task shards. `docs` is parallel to
// `articles`; `task_docs` indexes into both per task.
struct Dataset {
  PrepareConfig prep;
  std::vector<Article> articles;
  std::vector<EncodedDocument> docs;
  Vocabulary vocab;
  TaskStream stream;
  std::vector<std::vector<size_t>> task_docs;
  uint64_t dataset_hash = 0;

  size_t task_count() const { return task_docs.size(); }
  // Last ~10% of each shard is held out for forgetting curves; a shard of one
  // document keeps it in training.
  std::vector<size_t> train_indices(size_t task) const;
  std::vector<size_t> heldout_indices(size_t task) const;
};

// ingest (already done by caller) -> vocab -> oracle -> encode -> shard.
// Unencodable articles are dropped before sharding so shard sizes stay exact.
Dataset build_dataset(std::vector<Article> articles, const PrepareConfig& prep,
                      PrepareStats* stats = nullptr);

// Directory layout: manifest.json, articles.jsonl, encoded.jsonl, vocab.txt,
// tasks.json. The manifest records the content hash the loader re-verifies.
void save_dataset(const Dataset& data, const std::string& dir,
                  const PrepareStats* stats = nullptr);
Dataset load_dataset(const std::string& dir);

uint64_t compute_dataset_hash(const Dataset& data);

}  // namespace dcsum
