// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dcsum/common.hpp"
#include "dcsum/corpus.hpp"
#include "dcsum/dataset.hpp"
#include "dcsum/encode.hpp"
#include "dcsum/oracle.hpp"
#include "dcsum/vocab.hpp"

using namespace dcsum;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("dcsum-test-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

Article make_article(const std::string& id, const std::string& date,
                     std::vector<std::string> body,
                     std::vector<std::string> abstract) {
  Article a;
  a.id = id;
  a.published_at = date;
  a.date_key = *parse_iso_date(date);
  a.body_sentences = std::move(body);
  a.abstract_sentences = std::move(abstract);
  return a;
}

}  // namespace

TEST_CASE("iso date parsing accepts real dates and rejects junk") {
  CHECK(*parse_iso_date("2020-03-01") == 20200301);
  CHECK(*parse_iso_date("2020-02-29") == 20200229);        // leap day
  CHECK(*parse_iso_date("2021-06-15T10:00:00Z") == 20210615);  // prefix form
  CHECK_FALSE(parse_iso_date("2021-02-29"));  // not a leap year
  CHECK_FALSE(parse_iso_date("2020-13-01"));
  CHECK_FALSE(parse_iso_date("2020-00-10"));
  CHECK_FALSE(parse_iso_date("2020-1-01"));
  CHECK_FALSE(parse_iso_date("yesterday"));
  CHECK_FALSE(parse_iso_date(""));
}

TEST_CASE("ingest keeps only records with abstracts and counts the rest") {
  fs::path dir = temp_dir("ingest");
  write_file(dir / "three.jsonl",
             R"({"id":"a","published_at":"2020-01-01","abstract":"First point. Second point.","body":"Alpha beta. Gamma delta."}
{"id":"b","published_at":"2020-01-02","body":"No abstract here."}
{"id":"c","published_at":"2020-01-03","abstract":["one line"],"body":["body one","body two"]}
)");
  IngestStats stats;
  std::vector<std::string> log;
  auto articles = ingest_jsonl((dir / "three.jsonl").string(), &stats, &log);
  REQUIRE(articles.size() == 2);
  CHECK(stats.records == 3);
  CHECK(stats.kept == 2);
  CHECK(stats.dropped_no_abstract == 1);
  CHECK(stats.malformed == 0);
  CHECK(articles[0].abstract_sentences.size() == 2);  // raw text sentence-split
  CHECK(articles[0].body_sentences.size() == 2);
  CHECK(articles[1].body_sentences == std::vector<std::string>{"body one", "body two"});
}

TEST_CASE("ingest skips malformed records with a line number and survives") {
  fs::path dir = temp_dir("ingest-bad");
  write_file(dir / "bad.jsonl",
             "{\"id\":\"ok\",\"published_at\":\"2020-01-01\",\"abstract\":\"A point.\",\"body\":\"Some text.\"}\n"
             "not json at all\n"
             "{\"id\":\"nodate\",\"abstract\":\"A.\",\"body\":\"B.\"}\n"
             "{\"id\":\"baddate\",\"published_at\":\"2020-33-01\",\"abstract\":\"A.\",\"body\":\"B.\"}\n");
  IngestStats stats;
  std::vector<std::string> log;
  auto articles = ingest_jsonl((dir / "bad.jsonl").string(), &stats, &log);
  CHECK(articles.size() == 1);
  CHECK(stats.malformed == 3);
  REQUIRE(log.size() == 3);
  CHECK(log[0].find("line 2") != std::string::npos);
}

TEST_CASE("ingest of an empty file returns nothing without error") {
  fs::path dir = temp_dir("ingest-empty");
  write_file(dir / "empty.jsonl", "");
  IngestStats stats;
  auto articles = ingest_jsonl((dir / "empty.jsonl").string(), &stats, nullptr);
  CHECK(articles.empty());
  CHECK(stats.records == 0);
  CHECK(stats.dropped_no_abstract == 0);
}

TEST_CASE("ingest of a missing file is fatal") {
  CHECK_THROWS_AS(ingest_jsonl("/definitely/not/here.jsonl", nullptr, nullptr),
                  DataError);
}

TEST_CASE("sharding sorts by date then id and partitions exactly") {
  std::vector<Article> arts;
  arts.push_back(make_article("late", "2020-03-01", {"x."}, {"x."}));
  arts.push_back(make_article("early", "2019-01-01", {"y."}, {"y."}));
  arts.push_back(make_article("b-tie", "2019-01-01", {"z."}, {"z."}));
  TaskStream stream = shard_articles(arts, 2);
  REQUIRE(stream.tasks.size() == 2);
  CHECK(arts[0].id == "b-tie");  // same date: id decides
  CHECK(arts[1].id == "early");
  CHECK(arts[2].id == "late");
  CHECK(stream.tasks[0] == std::vector<std::string>{"b-tie", "early"});
  CHECK(stream.tasks[1] == std::vector<std::string>{"late"});
}

TEST_CASE("shard sizes follow ceil arithmetic on a large stream") {
  std::vector<Article> arts;
  arts.reserve(12345);
  for (int i = 0; i < 12345; ++i) {
    Article a;
    a.id = "a" + std::to_string(i);
    a.published_at = "2020-01-01";
    a.date_key = 20200101;
    arts.push_back(std::move(a));
  }
  TaskStream stream = shard_articles(arts, 5000);
  REQUIRE(stream.tasks.size() == 3);
  CHECK(stream.tasks[0].size() == 5000);
  CHECK(stream.tasks[1].size() == 5000);
  CHECK(stream.tasks[2].size() == 2345);

  // property: every shard full except possibly the last; total preserved
  Rng rng(seed_chain(5, "shard-prop"));
  for (int trial = 0; trial < 20; ++trial) {
    size_t n = 1 + rng.next_below(40);
    size_t size = 1 + rng.next_below(9);
    std::vector<Article> v(n);
    for (size_t i = 0; i < n; ++i) v[i].id = std::to_string(i);
    TaskStream s = shard_articles(v, size);
    size_t total = 0;
    for (size_t t = 0; t < s.tasks.size(); ++t) {
      total += s.tasks[t].size();
      if (t + 1 < s.tasks.size()) CHECK(s.tasks[t].size() == size);
    }
    CHECK(total == n);
    CHECK(s.tasks.size() == (n + size - 1) / size);
  }
}

TEST_CASE("vocabulary keeps reserved ids and ranks by frequency then spelling") {
  std::vector<Article> arts = {make_article("v", "2020-01-01", {"a a b"}, {"a"})};
  Vocabulary v = Vocabulary::build(arts, 6, 1);
  CHECK(v.size() == 6);
  CHECK(v.id_of("[PAD]") == 0);
  CHECK(v.id_of("[UNK]") == 1);
  CHECK(v.id_of("[CLS]") == 2);
  CHECK(v.id_of("[SEP]") == 3);
  CHECK(v.id_of("a") == 4);  // freq 3 beats freq 1
  CHECK(v.id_of("b") == 5);
  CHECK(v.id_of("zzz") == Vocabulary::kUnk);

  // equal frequencies: lexicographically smaller token gets the smaller id
  std::vector<Article> tie = {make_article("t", "2020-01-01", {"pear apple"}, {"x"})};
  Vocabulary vt = Vocabulary::build(tie, 8, 1);
  CHECK(vt.id_of("apple") < vt.id_of("pear"));

  // min_freq filters singletons to [UNK]
  Vocabulary vf = Vocabulary::build(arts, 6, 2);
  CHECK(vf.id_of("a") == 4);
  CHECK(vf.id_of("b") == Vocabulary::kUnk);

  CHECK_THROWS_AS(Vocabulary::build(arts, 4, 1), std::invalid_argument);
}

TEST_CASE("vocabulary save/load round-trips exactly") {
  std::vector<Article> arts = {
      make_article("v", "2020-01-01", {"storm ridge valley storm"}, {"storm"})};
  Vocabulary v = Vocabulary::build(arts, 10, 1);
  fs::path dir = temp_dir("vocab");
  v.save((dir / "vocab.txt").string());
  Vocabulary loaded = Vocabulary::load((dir / "vocab.txt").string());
  REQUIRE(loaded.size() == v.size());
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    CHECK(loaded.token_of(i) == v.token_of(i));

  write_file(dir / "broken.txt", "[PAD]\n[UNK]\n[CLS]\nwrong\n");
  CHECK_THROWS_AS(Vocabulary::load((dir / "broken.txt").string()), DataError);
}

TEST_CASE("encoding renders cls/sep frames with alternating segments") {
  Article a = make_article("e", "2020-01-01", {"alpha beta", "gamma"}, {"alpha"});
  Vocabulary v = Vocabulary::build({a}, 12, 1);
  OracleLabels labels = build_oracle(a, 2, OracleMetric::kRouge1);
  auto doc = encode_document(a, labels, v, 64);
  REQUIRE(doc.has_value());
  validate_encoded(*doc, 64);
  REQUIRE(doc->sentence_count() == 2);
  // [CLS] alpha beta [SEP] [CLS] gamma [SEP]
  CHECK(doc->token_ids.size() == 7);
  CHECK(doc->cls_positions == std::vector<size_t>{0, 4});
  CHECK(doc->segment_ids == std::vector<int>{0, 0, 0, 0, 1, 1, 1});
  CHECK(doc->labels[0] == 1);  // oracle keeps the overlapping sentence
  CHECK(doc->token_ids[1] == v.id_of("alpha"));
}

TEST_CASE("encoding truncates at whole-sentence boundaries and drops their labels") {
  std::vector<std::string> body;
  for (int i = 0; i < 30; ++i) body.push_back("tok" + std::to_string(i) + " filler");
  Article a = make_article("t", "2020-01-01", body, {body[0], body[25]});
  Vocabulary v = Vocabulary::build({a}, 100, 1);
  OracleLabels labels = build_oracle(a, 20, OracleMetric::kRouge12);
  CHECK(labels.contains(25));

  // each sentence costs 4 tokens; budget 17 keeps exactly 4 sentences
  auto doc = encode_document(a, labels, v, 17);
  REQUIRE(doc.has_value());
  validate_encoded(*doc, 17);
  CHECK(doc->sentence_count() == 4);
  CHECK(doc->labels.size() == 4);  // sentence 25's label went with the sentence
  CHECK(doc->labels[0] == 1);

  // the first sentence alone not fitting skips the document
  CHECK_FALSE(encode_document(a, labels, v, 3).has_value());
}

TEST_CASE("validate_encoded rejects broken structures") {
  Article a = make_article("e", "2020-01-01", {"alpha beta"}, {"alpha"});
  Vocabulary v = Vocabulary::build({a}, 12, 1);
  auto doc = encode_document(a, build_oracle(a, 1, OracleMetric::kRouge1), v, 64);
  REQUIRE(doc.has_value());

  auto broken = *doc;
  broken.segment_ids[2] = 1;  // segment flips mid-sentence
  CHECK_THROWS_AS(validate_encoded(broken, 64), DataError);

  broken = *doc;
  broken.labels.push_back(1);  // labels no longer align with cls positions
  CHECK_THROWS_AS(validate_encoded(broken, 64), DataError);

  broken = *doc;
  broken.token_ids.push_back(Vocabulary::kCls);  // stray [CLS] beyond the list
  broken.segment_ids.push_back(0);
  broken.attention_mask.push_back(1);
  CHECK_THROWS_AS(validate_encoded(broken, 64), DataError);
}

TEST_CASE("dataset build/save/load round-trips with a verified content hash") {
  const std::string fixture = std::string(DCSUM_FIXTURE_DIR) + "/articles.jsonl";
  IngestStats istats;
  auto articles = ingest_jsonl(fixture, &istats, nullptr);
  REQUIRE(articles.size() == 10);

  PrepareConfig prep;
  prep.shard_size = 4;
  prep.max_vocab = 300;
  PrepareStats stats;
  Dataset data = build_dataset(articles, prep, &stats);
  CHECK(data.task_count() == 3);
  CHECK(stats.task_sizes == std::vector<size_t>{4, 4, 2});
  CHECK(data.docs.size() == data.articles.size());
  for (size_t i = 0; i < data.docs.size(); ++i) {
    CHECK(data.docs[i].article_id == data.articles[i].id);
    validate_encoded(data.docs[i], prep.max_sequence_length);
  }

  // held-out split: last tenth, at least one, only for multi-document tasks
  CHECK(data.heldout_indices(0).size() == 1);
  CHECK(data.train_indices(0).size() == 3);
  auto held = data.heldout_indices(0);
  CHECK(held[0] == data.task_docs[0].back());

  fs::path dir = temp_dir("dataset");
  save_dataset(data, dir.string(), &stats);
  Dataset loaded = load_dataset(dir.string());
  CHECK(loaded.dataset_hash == data.dataset_hash);
  CHECK(loaded.task_count() == data.task_count());
  CHECK(loaded.vocab.size() == data.vocab.size());
  REQUIRE(loaded.docs.size() == data.docs.size());
  for (size_t i = 0; i < loaded.docs.size(); ++i) {
    CHECK(loaded.docs[i].token_ids == data.docs[i].token_ids);
    CHECK(loaded.docs[i].labels == data.docs[i].labels);
  }

  // tampering with a stored file breaks the recorded hash
  {
    std::ofstream out(dir / "vocab.txt", std::ios::app);
    out << "smuggled\n";
  }
  CHECK_THROWS_AS(load_dataset(dir.string()), DataError);
}

TEST_CASE("dataset refuses empty input") {
  PrepareConfig prep;
  CHECK_THROWS_AS(build_dataset({}, prep, nullptr), DataError);
}
