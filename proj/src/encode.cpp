// SPDX-License-Identifier: Apache-2.0
#include "dcsum/encode.hpp"

#include "dcsum/common.hpp"
#include "dcsum/text.hpp"

namespace dcsum {

std::optional<EncodedDocument> encode_document(const Article& article,
                                               const OracleLabels& labels,
                                               const Vocabulary& vocab,
                                               size_t max_sequence_length) {
  EncodedDocument doc;
  doc.article_id = article.id;

  for (size_t s = 0; s < article.body_sentences.size(); ++s) {
    std::vector<int> ids = vocab.encode_tokens(tokenize(article.body_sentences[s]));
    size_t rendered = ids.size() + 2;  // [CLS] ... [SEP]
    if (doc.token_ids.size() + rendered > max_sequence_length) break;

    int segment = static_cast<int>(doc.cls_positions.size() % 2);
    doc.cls_positions.push_back(doc.token_ids.size());
    doc.token_ids.push_back(Vocabulary::kCls);
    doc.segment_ids.push_back(segment);
    for (int id : ids) {
      doc.token_ids.push_back(id);
      doc.segment_ids.push_back(segment);
    }
    doc.token_ids.push_back(Vocabulary::kSep);
    doc.segment_ids.push_back(segment);
    doc.labels.push_back(labels.contains(s) ? 1 : 0);
  }
  if (doc.cls_positions.empty()) return std::nullopt;

  doc.attention_mask.assign(doc.token_ids.size(), 1);
  return doc;
}

void validate_encoded(const EncodedDocument& doc, size_t max_sequence_length) {
  auto fail = [&](const std::string& what) {
    throw DataError("encoded document " + doc.article_id + ": " + what);
  };
  size_t n = doc.token_ids.size();
  if (n == 0) fail("empty token sequence");
  if (n > max_sequence_length) fail("exceeds max_sequence_length");
  if (doc.segment_ids.size() != n) fail("segment_ids length mismatch");
  if (doc.attention_mask.size() != n) fail("attention_mask length mismatch");
  if (doc.labels.size() != doc.cls_positions.size()) fail("labels misaligned");

  size_t cls_seen = 0;
  for (size_t i = 0; i < n; ++i) {
    if (doc.segment_ids[i] != 0 && doc.segment_ids[i] != 1) fail("segment id not 0/1");
    if (doc.attention_mask[i] != 0 && doc.attention_mask[i] != 1) fail("mask not 0/1");
    if (doc.token_ids[i] == Vocabulary::kCls) ++cls_seen;
  }
  if (cls_seen != doc.cls_positions.size())
    fail("[CLS] occurrences do not equal cls_positions");

  for (size_t s = 0; s < doc.cls_positions.size(); ++s) {
    size_t p = doc.cls_positions[s];
    if (p >= n) fail("cls position out of range");
    if (s > 0 && doc.cls_positions[s - 1] >= p) fail("cls positions not increasing");
    if (doc.token_ids[p] != Vocabulary::kCls) fail("cls position does not hold [CLS]");
    if (doc.segment_ids[p] != static_cast<int>(s % 2)) fail("segment ids do not alternate");
    // Constant segment inside the sentence span.
    size_t end = (s + 1 < doc.cls_positions.size()) ? doc.cls_positions[s + 1] : n;
    for (size_t i = p; i < end; ++i) {
      if (doc.segment_ids[i] != doc.segment_ids[p]) fail("segment changes mid-sentence");
    }
  }
}

}  // namespace dcsum
