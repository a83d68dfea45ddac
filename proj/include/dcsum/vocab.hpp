// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "dcsum/corpus.hpp"

namespace dcsum {

// Corpus-built lowercase word vocabulary with reserved control tokens.
// Kept behind this interface so a subword tokenizer can replace it later.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  Vocabulary();

  int id_of(const std::string& token) const;  // [UNK] when absent
  const std::string& token_of(int id) const;
  size_t size() const { return tokens_.size(); }

  std::vector<int> encode_tokens(const std::vector<std::string>& tokens) const;

  void save(const std::string& path) const;  // one token per line, line = id
  static Vocabulary load(const std::string& path);

  // Frequency-ranked tokens from abstracts and bodies; ties broken
  // lexicographically. max_size must fit the 4 reserved tokens.
  static Vocabulary build(const std::vector<Article>& articles, size_t max_size,
                          size_t min_freq);

  const std::vector<std::string>& tokens() const { return tokens_; }
  static Vocabulary from_tokens(std::vector<std::string> tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace dcsum
