// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dcsum {

struct Article {
  std::string id;
  std::string title;
  std::vector<std::string> abstract_sentences;  // gold summary, >= 1
  std::vector<std::string> body_sentences;      // >= 1
  std::string published_at;                     // ISO-8601 date
  int64_t date_key = 0;                         // yyyymmdd for ordering
};

// Parses a YYYY-MM-DD prefix (full ISO timestamps allowed) and validates the
// calendar date. Returns the sortable key or nullopt.
std::optional<int64_t> parse_iso_date(const std::string& text);

struct IngestStats {
  size_t records = 0;
  size_t kept = 0;
  size_t dropped_no_abstract = 0;
  size_t malformed = 0;
};

// Reads JSONL articles: keys id, title, abstract (string or list),
// body (string or list), published_at. Records without an abstract are
// dropped; malformed records are skipped and counted, with a line-numbered
// message appended to `log` when provided. Unreadable file -> DataError.
std::vector<Article> ingest_jsonl(const std::string& path, IngestStats* stats,
                                  std::vector<std::string>* log = nullptr);

struct TaskStream {
  std::vector<std::vector<std::string>> tasks;  // article ids per shard
  size_t shard_size = 5000;
};

// Sorts ascending by published_at (ties by id) and partitions into shards of
// `shard_size`; the last shard may be smaller. Also reorders `articles` to the
// global sort order.
TaskStream shard_articles(std::vector<Article>& articles, size_t shard_size);

void sort_articles(std::vector<Article>& articles);

}  // namespace dcsum
