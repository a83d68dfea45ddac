// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dcsum {

std::string lowercase_ascii(std::string_view text);

// Lowercased word tokens: maximal runs of [a-z0-9] plus any non-ASCII bytes.
// Punctuation and whitespace separate tokens and are dropped.
std::vector<std::string> tokenize(std::string_view text);

// Splits on [.?!] followed by whitespace and an uppercase letter or digit.
// Abbreviations are an accepted error source at this scale.
std::vector<std::string> split_sentences(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace dcsum
