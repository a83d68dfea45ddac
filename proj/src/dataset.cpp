// SPDX-License-Identifier: Apache-2.0
#include "dcsum/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dcsum/common.hpp"
#include "dcsum/oracle.hpp"

namespace dcsum {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json prepare_config_to_json(const PrepareConfig& cfg) {
  return json{{"shard_size", cfg.shard_size},
              {"max_vocab", cfg.max_vocab},
              {"min_freq", cfg.min_freq},
              {"max_summary_sentences", cfg.max_summary_sentences},
              {"max_sequence_length", cfg.max_sequence_length},
              {"oracle_metric", to_string(cfg.oracle_metric)}};
}

PrepareConfig prepare_config_from_json(const nlohmann::json& j) {
  PrepareConfig cfg;
  cfg.shard_size = j.value("shard_size", cfg.shard_size);
  cfg.max_vocab = j.value("max_vocab", cfg.max_vocab);
  cfg.min_freq = j.value("min_freq", cfg.min_freq);
  cfg.max_summary_sentences =
      j.value("max_summary_sentences", cfg.max_summary_sentences);
  cfg.max_sequence_length = j.value("max_sequence_length", cfg.max_sequence_length);
  if (j.contains("oracle_metric"))
    cfg.oracle_metric = oracle_metric_from_string(j.at("oracle_metric"));
  return cfg;
}

std::vector<size_t> Dataset::train_indices(size_t task) const {
  const auto& all = task_docs.at(task);
  const size_t n = all.size();
  const size_t held = n >= 2 ? std::max<size_t>(1, n / 10) : 0;
  return {all.begin(), all.end() - static_cast<std::ptrdiff_t>(held)};
}

std::vector<size_t> Dataset::heldout_indices(size_t task) const {
  const auto& all = task_docs.at(task);
  const size_t n = all.size();
  const size_t held = n >= 2 ? std::max<size_t>(1, n / 10) : 0;
  return {all.end() - static_cast<std::ptrdiff_t>(held), all.end()};
}

namespace {

json article_to_json(const Article& a) {
  return json{{"id", a.id},
              {"title", a.title},
              {"abstract", a.abstract_sentences},
              {"body", a.body_sentences},
              {"published_at", a.published_at}};
}

Article article_from_json(const json& j) {
  Article a;
  a.id = j.at("id");
  a.title = j.value("title", "");
  a.abstract_sentences = j.at("abstract").get<std::vector<std::string>>();
  a.body_sentences = j.at("body").get<std::vector<std::string>>();
  a.published_at = j.at("published_at");
  auto key = parse_iso_date(a.published_at);
  if (!key) throw DataError("article " + a.id + " has an unparsable date");
  a.date_key = *key;
  return a;
}

json encoded_to_json(const EncodedDocument& d) {
  return json{{"article_id", d.article_id},
              {"token_ids", d.token_ids},
              {"cls_positions", d.cls_positions},
              {"segment_ids", d.segment_ids},
              {"attention_mask", d.attention_mask},
              {"labels", d.labels}};
}

EncodedDocument encoded_from_json(const json& j) {
  EncodedDocument d;
  d.article_id = j.at("article_id");
  d.token_ids = j.at("token_ids").get<std::vector<int>>();
  d.cls_positions = j.at("cls_positions").get<std::vector<size_t>>();
  d.segment_ids = j.at("segment_ids").get<std::vector<int>>();
  d.attention_mask = j.at("attention_mask").get<std::vector<int>>();
  d.labels = j.at("labels").get<std::vector<int>>();
  return d;
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::string encoded_jsonl(const Dataset& data) {
  std::vector<json> recs;
  recs.reserve(data.docs.size());
  for (const auto& d : data.docs) recs.push_back(encoded_to_json(d));
  return to_jsonl(recs);
}

std::string articles_jsonl(const Dataset& data) {
  std::vector<json> recs;
  recs.reserve(data.articles.size());
  for (const auto& a : data.articles) recs.push_back(article_to_json(a));
  return to_jsonl(recs);
}

std::string vocab_text(const Vocabulary& vocab) {
  std::string out;
  for (const auto& tok : vocab.tokens()) {
    out += tok;
    out += '\n';
  }
  return out;
}

std::string tasks_json_text(const TaskStream& stream) {
  return json{{"shard_size", stream.shard_size}, {"tasks", stream.tasks}}.dump(2);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

uint64_t compute_dataset_hash(const Dataset& data) {
  uint64_t h = fnv1a(encoded_jsonl(data));
  h = fnv1a(vocab_text(data.vocab), h);
  h = fnv1a(tasks_json_text(data.stream), h);
  return h;
}

Dataset build_dataset(std::vector<Article> articles, const PrepareConfig& prep,
                      PrepareStats* stats) {
  if (articles.empty()) throw DataError("no articles to prepare");
  Dataset data;
  data.prep = prep;
  data.vocab = Vocabulary::build(articles, prep.max_vocab, prep.min_freq);

  sort_articles(articles);
  size_t unencodable = 0;
  size_t positive_labels = 0;
  for (auto& article : articles) {
    OracleLabels oracle =
        build_oracle(article, prep.max_summary_sentences, prep.oracle_metric);
    auto encoded =
        encode_document(article, oracle, data.vocab, prep.max_sequence_length);
    if (!encoded) {
      ++unencodable;  // dropped before sharding so shard sizes stay exact
      continue;
    }
    for (int label : encoded->labels) positive_labels += static_cast<size_t>(label);
    data.articles.push_back(std::move(article));
    data.docs.push_back(std::move(*encoded));
  }
  if (data.articles.empty())
    throw DataError("no article fits the sequence budget; nothing to shard");

  data.stream = shard_articles(data.articles, prep.shard_size);

  data.task_docs.resize(data.stream.tasks.size());
  size_t next = 0;
  for (size_t t = 0; t < data.stream.tasks.size(); ++t) {
    for (size_t i = 0; i < data.stream.tasks[t].size(); ++i) {
      data.task_docs[t].push_back(next++);
    }
  }
  data.dataset_hash = compute_dataset_hash(data);

  if (stats != nullptr) {
    stats->unencodable = unencodable;
    stats->task_sizes.clear();
    for (const auto& task : data.stream.tasks) stats->task_sizes.push_back(task.size());
    stats->label_density =
        static_cast<double>(positive_labels) / static_cast<double>(data.docs.size());
  }
  return data;
}

void save_dataset(const Dataset& data, const std::string& dir,
                  const PrepareStats* stats) {
  fs::create_directories(dir);
  const fs::path root(dir);
  write_file(root / "articles.jsonl", articles_jsonl(data));
  write_file(root / "encoded.jsonl", encoded_jsonl(data));
  write_file(root / "vocab.txt", vocab_text(data.vocab));
  write_file(root / "tasks.json", tasks_json_text(data.stream));

  json manifest{{"format_version", 1},
                {"prepare_config", prepare_config_to_json(data.prep)},
                {"dataset_hash", to_hex(data.dataset_hash)},
                {"articles", data.articles.size()},
                {"tasks", data.stream.tasks.size()}};
  if (stats != nullptr) {
    manifest["counts"] = {{"records", stats->ingest.records},
                          {"kept", stats->ingest.kept},
                          {"dropped_no_abstract", stats->ingest.dropped_no_abstract},
                          {"malformed", stats->ingest.malformed},
                          {"unencodable", stats->unencodable}};
    manifest["task_sizes"] = stats->task_sizes;
    manifest["label_density"] = stats->label_density;
  }
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  json manifest;
  try {
    manifest = json::parse(read_file(root / "manifest.json"));
  } catch (const json::exception& e) {
    throw DataError("malformed dataset manifest: " + std::string(e.what()));
  }

  Dataset data;
  data.prep = prepare_config_from_json(manifest.at("prepare_config"));

  try {
    std::istringstream articles_in(read_file(root / "articles.jsonl"));
    std::string line;
    while (std::getline(articles_in, line)) {
      if (line.empty()) continue;
      data.articles.push_back(article_from_json(json::parse(line)));
    }
    std::istringstream encoded_in(read_file(root / "encoded.jsonl"));
    while (std::getline(encoded_in, line)) {
      if (line.empty()) continue;
      data.docs.push_back(encoded_from_json(json::parse(line)));
    }
    json tasks = json::parse(read_file(root / "tasks.json"));
    data.stream.shard_size = tasks.at("shard_size");
    data.stream.tasks = tasks.at("tasks").get<std::vector<std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw DataError("malformed dataset file: " + std::string(e.what()));
  }
  data.vocab = Vocabulary::load((root / "vocab.txt").string());

  if (data.articles.size() != data.docs.size())
    throw DataError("articles.jsonl and encoded.jsonl disagree in length");
  for (size_t i = 0; i < data.articles.size(); ++i) {
    if (data.articles[i].id != data.docs[i].article_id)
      throw DataError("article order mismatch at row " + std::to_string(i));
  }

  data.task_docs.resize(data.stream.tasks.size());
  size_t next = 0;
  for (size_t t = 0; t < data.stream.tasks.size(); ++t) {
    for (size_t i = 0; i < data.stream.tasks[t].size(); ++i) {
      if (next >= data.docs.size())
        throw DataError("task index exceeds the document table");
      if (data.stream.tasks[t][i] != data.docs[next].article_id)
        throw DataError("task shard does not match document order at task " +
                        std::to_string(t));
      data.task_docs[t].push_back(next++);
    }
  }
  if (next != data.docs.size())
    throw DataError("task shards do not cover every document");

  data.dataset_hash = compute_dataset_hash(data);
  const std::string recorded = manifest.value("dataset_hash", "");
  if (!recorded.empty() && recorded != to_hex(data.dataset_hash))
    throw DataError("dataset files do not match the manifest hash");
  return data;
}

}  // namespace dcsum
