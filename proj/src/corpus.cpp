// SPDX-License-Identifier: Apache-2.0
#include "dcsum/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "dcsum/common.hpp"
#include "dcsum/text.hpp"

namespace dcsum {

namespace {

using nlohmann::json;

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

// Accepts a JSON string or array of strings; raw strings are sentence-split.
std::vector<std::string> sentences_from_field(const json& field) {
  std::vector<std::string> out;
  if (field.is_string()) {
    out = split_sentences(field.get<std::string>());
  } else if (field.is_array()) {
    for (const auto& item : field) {
      if (!item.is_string()) throw DataError("sentence list holds a non-string");
      std::string s = item.get<std::string>();
      size_t b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) continue;
      size_t e = s.find_last_not_of(" \t\r\n");
      out.push_back(s.substr(b, e - b + 1));
    }
  } else if (!field.is_null()) {
    throw DataError("expected string or list of strings");
  }
  return out;
}

}  // namespace

std::optional<int64_t> parse_iso_date(const std::string& text) {
  if (text.size() < 10) return std::nullopt;
  for (size_t i = 0; i < 10; ++i) {
    if (i == 4 || i == 7) {
      if (text[i] != '-') return std::nullopt;
    } else if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      return std::nullopt;
    }
  }
  int y = std::stoi(text.substr(0, 4));
  int m = std::stoi(text.substr(5, 2));
  int d = std::stoi(text.substr(8, 2));
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return std::nullopt;
  int dmax = days[m - 1] + ((m == 2 && is_leap(y)) ? 1 : 0);
  if (d > dmax) return std::nullopt;
  return static_cast<int64_t>(y) * 10000 + m * 100 + d;
}

std::vector<Article> ingest_jsonl(const std::string& path, IngestStats* stats,
                                  std::vector<std::string>* log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path);

  IngestStats local;
  std::vector<Article> articles;
  std::string line;
  size_t line_no = 0;
  auto note = [&](const std::string& msg) {
    if (log) log->push_back(msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++local.records;
    try {
      json record = json::parse(line);
      if (!record.is_object()) throw DataError("record is not an object");

      Article a;
      if (!record.contains("id")) throw DataError("missing id");
      if (record["id"].is_string()) {
        a.id = record["id"].get<std::string>();
      } else if (record["id"].is_number_integer()) {
        a.id = std::to_string(record["id"].get<int64_t>());
      } else {
        throw DataError("id must be a string or integer");
      }
      a.title = record.value("title", std::string{});

      if (!record.contains("published_at") || !record["published_at"].is_string())
        throw DataError("missing published_at");
      a.published_at = record["published_at"].get<std::string>();
      auto key = parse_iso_date(a.published_at);
      if (!key) throw DataError("published_at is not a valid ISO-8601 date");
      a.date_key = *key;

      a.body_sentences = record.contains("body")
                             ? sentences_from_field(record["body"])
                             : std::vector<std::string>{};
      if (a.body_sentences.empty()) throw DataError("empty body");

      a.abstract_sentences = record.contains("abstract")
                                 ? sentences_from_field(record["abstract"])
                                 : std::vector<std::string>{};
      if (a.abstract_sentences.empty()) {
        ++local.dropped_no_abstract;
        continue;
      }
      ++local.kept;
      articles.push_back(std::move(a));
    } catch (const json::exception& e) {
      ++local.malformed;
      note("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    } catch (const DataError& e) {
      ++local.malformed;
      note("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (stats) *stats = local;
  return articles;
}

void sort_articles(std::vector<Article>& articles) {
  std::stable_sort(articles.begin(), articles.end(),
                   [](const Article& a, const Article& b) {
                     if (a.date_key != b.date_key) return a.date_key < b.date_key;
                     return a.id < b.id;
                   });
}

TaskStream shard_articles(std::vector<Article>& articles, size_t shard_size) {
  if (shard_size < 1) throw std::invalid_argument("shard_size must be >= 1");
  sort_articles(articles);
  TaskStream stream;
  stream.shard_size = shard_size;
  for (size_t begin = 0; begin < articles.size(); begin += shard_size) {
    size_t end = std::min(begin + shard_size, articles.size());
    std::vector<std::string> ids;
    ids.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) ids.push_back(articles[i].id);
    stream.tasks.push_back(std::move(ids));
  }
  return stream;
}

}  // namespace dcsum
