// SPDX-License-Identifier: Apache-2.0
#include "dcsum/text.hpp"

#include <cctype>

namespace dcsum {

namespace {

bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::string lowercase_ascii(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  size_t start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    size_t j = i + 1;
    size_t ws = 0;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) {
      ++j;
      ++ws;
    }
    if (ws == 0 || j >= text.size()) continue;
    unsigned char next = text[j];
    if (std::isupper(next) || std::isdigit(next)) {
      sentences.emplace_back(text.substr(start, i + 1 - start));
      start = j;
      i = j - 1;
    }
  }
  if (start < text.size()) sentences.emplace_back(text.substr(start));

  // Trim and drop whitespace-only fragments.
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (auto& s : sentences) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    size_t e = s.find_last_not_of(" \t\r\n");
    out.push_back(s.substr(b, e - b + 1));
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace dcsum
