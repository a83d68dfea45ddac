// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcsum/corpus.hpp"
#include "dcsum/oracle.hpp"
#include "dcsum/vocab.hpp"

namespace dcsum {

struct EncodedDocument {
  std::string article_id;
  std::vector<int> token_ids;
  std::vector<size_t> cls_positions;  // strictly increasing, one per sentence
  std::vector<int> segment_ids;       // constant within a sentence, 0/1 alternating
  std::vector<int> attention_mask;    // 1 = real token
  std::vector<int> labels;            // aligned with cls_positions

  size_t length() const { return token_ids.size(); }
  size_t sentence_count() const { return cls_positions.size(); }
};

// Renders each body sentence as [CLS] tokens... [SEP] and appends sentences in
// order until the next whole one would exceed max_sequence_length. Sentences
// are never split; labels of truncated sentences are dropped with them.
// Returns nullopt when even the first sentence does not fit.
std::optional<EncodedDocument> encode_document(const Article& article,
                                               const OracleLabels& labels,
                                               const Vocabulary& vocab,
                                               size_t max_sequence_length);

// Checks the structural invariants (lengths, [CLS] alignment, segment
// alternation); throws DataError naming the first violation.
void validate_encoded(const EncodedDocument& doc, size_t max_sequence_length);

}  // namespace dcsum
