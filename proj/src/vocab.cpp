// SPDX-License-Identifier: Apache-2.0
#include "dcsum/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "dcsum/common.hpp"
#include "dcsum/text.hpp"

namespace dcsum {

namespace {
const std::vector<std::string> kReserved = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
}

Vocabulary::Vocabulary() {
  for (const auto& t : kReserved) {
    ids_[t] = static_cast<int>(tokens_.size());
    tokens_.push_back(t);
  }
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= tokens_.size())
    throw std::invalid_argument("token id out of range");
  return tokens_[id];
}

std::vector<int> Vocabulary::encode_tokens(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kReserved.size())
    throw DataError("vocabulary file is missing reserved tokens");
  for (size_t i = 0; i < kReserved.size(); ++i) {
    if (tokens[i] != kReserved[i])
      throw DataError("vocabulary reserved token mismatch at id " + std::to_string(i));
  }
  Vocabulary v;
  v.tokens_ = std::move(tokens);
  v.ids_.clear();
  for (size_t i = 0; i < v.tokens_.size(); ++i)
    v.ids_[v.tokens_[i]] = static_cast<int>(i);
  return v;
}

Vocabulary Vocabulary::build(const std::vector<Article>& articles,
                             size_t max_size, size_t min_freq) {
  if (max_size < kReserved.size() + 1)
    throw std::invalid_argument("vocab max_size must be at least 5");
  // std::map gives the lexicographic order needed for deterministic ties.
  std::map<std::string, size_t> freq;
  for (const auto& a : articles) {
    for (const auto& s : a.abstract_sentences)
      for (auto& t : tokenize(s)) ++freq[t];
    for (const auto& s : a.body_sentences)
      for (auto& t : tokenize(s)) ++freq[t];
  }
  std::vector<std::pair<std::string, size_t>> ranked;
  ranked.reserve(freq.size());
  for (auto& [token, count] : freq) {
    if (count >= min_freq) ranked.emplace_back(token, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  size_t budget = max_size - kReserved.size();
  for (size_t i = 0; i < ranked.size() && i < budget; ++i) {
    v.ids_[ranked[i].first] = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back(ranked[i].first);
  }
  return v;
}

}  // namespace dcsum
