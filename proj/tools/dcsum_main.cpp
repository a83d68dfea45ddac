// SPDX-License-Identifier: Apache-2.0
// dcsum: prepare / train / eval / summarize pipeline driver.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcsum/checkpoint.hpp"
#include "dcsum/dataset.hpp"
#include "dcsum/evaluate.hpp"
#include "dcsum/text.hpp"
#include "dcsum/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace dcsum;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> sentences_from_json(const json& value) {
  std::vector<std::string> out;
  if (value.is_string()) {
    out = split_sentences(value.get<std::string>());
  } else if (value.is_array()) {
    for (const json& item : value) {
      if (!item.is_string()) throw DataError("sentence list holds a non-string");
      if (!item.get<std::string>().empty()) out.push_back(item.get<std::string>());
    }
  }
  return out;
}

// ---- prepare -------------------------------------------------------------

struct PrepareArgs {
  std::string raw;
  std::string out;
  PrepareConfig cfg;
  std::string oracle_metric = "rouge12";
  bool force = false;
};

int run_prepare(const PrepareArgs& args) {
  const fs::path out_dir(args.out);
  if (!args.force && fs::exists(out_dir / "manifest.json")) {
    throw DataError("output " + args.out +
                    " already holds a prepared dataset; pass --force to replace it");
  }
  PrepareConfig cfg = args.cfg;
  cfg.oracle_metric = oracle_metric_from_string(args.oracle_metric);

  PrepareStats stats;
  std::vector<std::string> log;
  std::vector<Article> articles = ingest_jsonl(args.raw, &stats.ingest, &log);
  for (const std::string& line : log) std::cerr << "ingest: " << line << "\n";
  if (articles.empty())
    throw DataError("no usable articles with abstracts in " + args.raw);

  Dataset data = build_dataset(std::move(articles), cfg, &stats);
  save_dataset(data, args.out, &stats);

  std::cout << "records " << stats.ingest.records << ", kept " << stats.ingest.kept
            << ", dropped (no abstract) " << stats.ingest.dropped_no_abstract
            << ", malformed " << stats.ingest.malformed << ", unencodable "
            << stats.unencodable << "\n";
  std::cout << "tasks " << stats.task_sizes.size() << " [";
  for (size_t i = 0; i < stats.task_sizes.size(); ++i)
    std::cout << (i ? ", " : "") << stats.task_sizes[i];
  std::cout << "]\n";
  std::cout << "label density " << stats.label_density
            << " selected sentences per document\n";
  std::cout << "dataset hash " << to_hex(data.dataset_hash) << "\n";
  return 0;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string dataset;
  std::string out;
  std::string config_path;
  bool resume = false;
  bool force = false;
  int tasks = -1;
};

uint64_t combined_config_hash(const ModelConfig& mcfg, const TrainConfig& tcfg) {
  return fnv1a(model_config_to_json(mcfg).dump() + train_config_to_json(tcfg).dump());
}

int run_train(const TrainArgs& args) {
  Dataset data = load_dataset(args.dataset);

  TrainConfig tcfg;
  ModelConfig mcfg;
  mcfg.dropout = 0.1;
  if (!args.config_path.empty()) {
    const json j = parse_json_file(args.config_path);
    tcfg = train_config_from_json(j);
    mcfg = model_config_from_json(j);
  }
  mcfg.vocab_size = static_cast<int>(data.vocab.size());
  mcfg.max_sequence_length = static_cast<int>(data.prep.max_sequence_length);
  mcfg.validate();

  const uint64_t config_hash = combined_config_hash(mcfg, tcfg);
  std::cout << "config: "
            << json{{"model", model_config_to_json(mcfg)},
                    {"train", train_config_to_json(tcfg)}}
                   .dump()
            << "\n";

  const fs::path out_dir(args.out);
  const fs::path manifest_path = out_dir / "manifest.json";
  const fs::path reports_path = out_dir / "reports.jsonl";
  const fs::path ckpt_dir = out_dir / "checkpoints";

  DualColumnModel model;
  EwcState ewc;
  int start_task = 0;

  if (args.resume) {
    if (!fs::exists(manifest_path))
      throw DataError("nothing to resume: no manifest at " + manifest_path.string());
    const json manifest = parse_json_file(manifest_path);
    if (manifest.value("dataset_hash", "") != to_hex(data.dataset_hash))
      throw DataError("resume refused: dataset hash changed since this run started");
    if (manifest.value("config_hash", "") != to_hex(config_hash))
      throw DataError("resume refused: config hash changed since this run started");
    start_task = manifest.value("tasks_done", 0);
    if (start_task > 0) {
      const json& ckpts = manifest.at("checkpoints");
      const std::string last = ckpts.at(static_cast<size_t>(start_task - 1));
      Checkpoint ckpt = load_checkpoint((out_dir / last).string());
      model = std::move(ckpt.model);
      ewc = std::move(ckpt.ewc);
    } else {
      model = init_model(mcfg, tcfg.seed);
    }
  } else {
    if (fs::exists(manifest_path) && !args.force)
      throw DataError("output " + args.out +
                      " already holds a run; pass --force or --resume");
    fs::create_directories(ckpt_dir);
    model = init_model(mcfg, tcfg.seed);
    std::error_code ec;
    fs::remove(reports_path, ec);  // --force restarts the report log
    json manifest{{"format_version", 1},
                  {"dataset_hash", to_hex(data.dataset_hash)},
                  {"config_hash", to_hex(config_hash)},
                  {"seed", tcfg.seed},
                  {"tasks_done", 0},
                  {"checkpoints", json::array()}};
    write_text_file(manifest_path, manifest.dump(2) + "\n");
  }
  fs::create_directories(ckpt_dir);

  auto on_task = [&](const TaskReport& report, DualColumnModel& m,
                     const EwcState& state) {
    char name[32];
    std::snprintf(name, sizeof(name), "checkpoints/task_%03d.ckpt",
                  report.task_index);
    Checkpoint ckpt;
    ckpt.model = m;
    ckpt.ewc = state;
    ckpt.vocab_tokens = data.vocab.tokens();
    ckpt.dataset_hash = data.dataset_hash;
    ckpt.config_hash = config_hash;
    save_checkpoint((out_dir / name).string(), ckpt);

    std::ofstream reports(reports_path, std::ios::app);
    if (!reports) throw DataError("cannot append to " + reports_path.string());
    reports << task_report_to_json(report).dump() << "\n";

    json manifest = parse_json_file(manifest_path);
    manifest["tasks_done"] = report.task_index + 1;
    manifest["checkpoints"].push_back(name);
    write_text_file(manifest_path, manifest.dump(2) + "\n");

    std::cout << "task " << report.task_index << ": compress loss "
              << report.compress_loss << ", progress loss " << report.progress_loss
              << " (" << report.wall_seconds << "s)\n";
  };

  run_stream(model, ewc, data, tcfg, start_task, args.tasks, on_task);

  // Forgetting summary over the full report history (including resumed tasks).
  std::vector<TaskReport> history;
  {
    std::istringstream in(read_text_file(reports_path));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) history.push_back(task_report_from_json(json::parse(line)));
    }
  }
  bool complete = !history.empty();
  for (const TaskReport& r : history) {
    complete = complete &&
               r.heldout.size() == static_cast<size_t>(r.task_index) + 1;
  }
  if (complete) {
    std::vector<std::vector<double>> matrix;
    for (const TaskReport& r : history) {
      std::vector<double> row;
      for (const HeldoutEval& h : r.heldout) row.push_back(h.knowledge.r1.f1);
      matrix.push_back(std::move(row));
    }
    const ForgettingReport fr = forgetting_from_matrix(matrix);
    write_text_file(out_dir / "forgetting.json",
                    json{{"metric", "knowledge-path rouge1 f1"},
                         {"matrix", fr.matrix},
                         {"backward_transfer", fr.backward_transfer}}
                            .dump(2) +
                        "\n");
    write_text_file(out_dir / "forgetting.svg", forgetting_svg(fr));
  } else {
    std::cerr << "forgetting summary skipped: some tasks have no held-out slice\n";
  }
  return 0;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string out;
  int k = 20;
  std::string dump_dir;
  std::string plot_path;
  std::string reports_path;
};

json corpus_rouge_json(const CorpusRouge& c) {
  auto one = [](const RougeScore& s) {
    return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  };
  return json{{"rouge1", one(c.r1)},
              {"rouge2", one(c.r2)},
              {"rougeL", one(c.rl)},
              {"documents", c.documents}};
}

int run_eval(const EvalArgs& args) {
  Checkpoint ckpt = load_checkpoint(args.checkpoint);
  Dataset data = load_dataset(args.dataset);
  if (ckpt.dataset_hash != data.dataset_hash)
    throw DataError(
        "checkpoint was trained on a different dataset (hash mismatch); "
        "re-run training against this prepared directory");

  size_t heldout_total = 0;
  for (size_t t = 0; t < data.task_count(); ++t)
    heldout_total += data.heldout_indices(t).size();
  if (heldout_total == 0)
    throw DataError(
        "no held-out split exists (every shard is a single document); "
        "re-prepare with larger shards to evaluate");

  json per_task = json::array();
  std::vector<EvalDoc> pooled;
  for (size_t t = 0; t < data.task_count(); ++t) {
    const std::vector<size_t> held = data.heldout_indices(t);
    if (held.empty()) continue;
    std::vector<EvalDoc> docs;
    for (size_t idx : held)
      docs.push_back(EvalDoc{&data.docs[idx], &data.articles[idx]});
    pooled.insert(pooled.end(), docs.begin(), docs.end());
    per_task.push_back(
        json{{"task", t},
             {"documents", docs.size()},
             {"active", corpus_rouge_json(evaluate_docs(ckpt.model, docs, args.k,
                                                        ScorePath::kActive))},
             {"knowledge",
              corpus_rouge_json(
                  evaluate_docs(ckpt.model, docs, args.k, ScorePath::kKnowledge))}});
  }

  json report{{"checkpoint", args.checkpoint},
              {"tasks_trained", ckpt.model.task_count},
              {"k", args.k},
              {"model_config", model_config_to_json(ckpt.model.config)},
              {"seed", ckpt.model.seed},
              {"dataset_hash", to_hex(ckpt.dataset_hash)},
              {"config_hash", to_hex(ckpt.config_hash)},
              {"per_task", per_task},
              {"corpus",
               {{"active", corpus_rouge_json(evaluate_docs(
                               ckpt.model, pooled, args.k, ScorePath::kActive))},
                {"knowledge",
                 corpus_rouge_json(evaluate_docs(ckpt.model, pooled, args.k,
                                                 ScorePath::kKnowledge))}}}};

  if (!args.dump_dir.empty()) {
    fs::create_directories(args.dump_dir);
    std::ofstream dump(fs::path(args.dump_dir) / "extractions.jsonl",
                       std::ios::binary);
    for (const EvalDoc& ed : pooled) {
      Eigen::VectorXd probs = score_document(*ed.doc, ckpt.model, ScorePath::kActive);
      std::vector<size_t> picked = extract_summary(*ed.doc, probs, args.k);
      std::vector<std::string> sentences;
      for (size_t idx : picked)
        sentences.push_back(join_tokens(tokenize(ed.article->body_sentences[idx])));
      dump << json{{"article_id", ed.article->id},
                   {"selected", picked},
                   {"sentences", sentences}}
                  .dump()
           << "\n";
    }
  }

  if (!args.plot_path.empty()) {
    fs::path reports_file(args.reports_path);
    if (reports_file.empty()) {
      // A checkpoint inside a run directory sits next to its report log.
      reports_file = fs::path(args.checkpoint).parent_path().parent_path() /
                     "reports.jsonl";
    }
    if (!fs::exists(reports_file))
      throw DataError("forgetting plot needs a reports.jsonl (pass --reports)");
    std::vector<std::vector<double>> matrix;
    std::istringstream in(read_text_file(reports_file));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const TaskReport r = task_report_from_json(json::parse(line));
      std::vector<double> row;
      for (const HeldoutEval& h : r.heldout) row.push_back(h.knowledge.r1.f1);
      matrix.push_back(std::move(row));
    }
    write_text_file(args.plot_path, forgetting_svg(forgetting_from_matrix(matrix)));
  }

  write_text_file(args.out, report.dump(2) + "\n");
  std::cout << "wrote " << args.out << " (" << pooled.size()
            << " held-out documents)\n";
  return 0;
}

// ---- summarize -----------------------------------------------------------

struct SummarizeArgs {
  std::string checkpoint;
  std::string article;
  int k = 20;
  size_t index = 0;
};

int run_summarize(const SummarizeArgs& args) {
  Checkpoint ckpt = load_checkpoint(args.checkpoint);
  Vocabulary vocab = Vocabulary::from_tokens(ckpt.vocab_tokens);

  std::istringstream in(read_text_file(args.article));
  std::string line;
  size_t row = 0;
  json record;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row++ == args.index) {
      try {
        record = json::parse(line);
      } catch (const json::exception& e) {
        throw DataError("malformed article record: " + std::string(e.what()));
      }
      found = true;
      break;
    }
  }
  if (!found)
    throw DataError("no record at index " + std::to_string(args.index) + " in " +
                    args.article);

  Article article;
  article.id = record.contains("id") ? record.at("id").dump() : "unnamed";
  if (!record.contains("body")) throw DataError("article record lacks a body");
  article.body_sentences = sentences_from_json(record.at("body"));
  if (article.body_sentences.empty()) throw DataError("article body is empty");

  auto encoded = encode_document(article, OracleLabels{}, vocab,
                                 static_cast<size_t>(
                                     ckpt.model.config.max_sequence_length));
  if (!encoded)
    throw DataError("the first sentence alone exceeds the sequence budget");

  Eigen::VectorXd probs = score_document(*encoded, ckpt.model, ScorePath::kActive);
  for (size_t idx : extract_summary(*encoded, probs, args.k)) {
    std::cout << join_tokens(tokenize(article.body_sentences[idx])) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-column continual extractive summarizer"};
  app.require_subcommand(1);

  PrepareArgs prep_args;
  CLI::App* prep = app.add_subcommand("prepare", "ingest, label, encode and shard");
  prep->add_option("raw", prep_args.raw, "input articles (JSONL)")->required();
  prep->add_option("out", prep_args.out, "output dataset directory")->required();
  prep->add_option("--shard-size", prep_args.cfg.shard_size, "articles per task");
  prep->add_option("--max-vocab", prep_args.cfg.max_vocab, "vocabulary budget");
  prep->add_option("--min-freq", prep_args.cfg.min_freq, "minimum token count");
  prep->add_option("--max-summary-sentences", prep_args.cfg.max_summary_sentences,
                   "oracle selection cap");
  prep->add_option("--max-seq-len", prep_args.cfg.max_sequence_length,
                   "token positions per document");
  prep->add_option("--oracle-metric", prep_args.oracle_metric,
                   "rouge1 | rouge2 | rouge12");
  prep->add_flag("--force", prep_args.force, "replace an existing dataset");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "run the continual task stream");
  train->add_option("dataset", train_args.dataset, "prepared dataset directory")
      ->required();
  train->add_option("out", train_args.out, "run directory")->required();
  train->add_option("--config", train_args.config_path,
                    "JSON config (flat keys; defaults match the training recipe)");
  train->add_flag("--resume", train_args.resume, "continue an interrupted run");
  train->add_flag("--force", train_args.force, "replace an existing run");
  train->add_option("--tasks", train_args.tasks, "train only the first N tasks");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on held-out slices");
  eval->add_option("checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  eval->add_option("dataset", eval_args.dataset, "prepared dataset directory")
      ->required();
  eval->add_option("out", eval_args.out, "report JSON path")->required();
  eval->add_option("--k", eval_args.k, "sentences per extracted summary");
  eval->add_option("--dump", eval_args.dump_dir, "also dump extractions here");
  eval->add_option("--plot", eval_args.plot_path, "write a forgetting-curve SVG");
  eval->add_option("--reports", eval_args.reports_path,
                   "reports.jsonl for the plot (default: next to the checkpoint)");

  SummarizeArgs sum_args;
  CLI::App* summ = app.add_subcommand("summarize", "extract a summary for one article");
  summ->add_option("checkpoint", sum_args.checkpoint, "checkpoint file")->required();
  summ->add_option("article", sum_args.article, "JSONL file with the article")
      ->required();
  summ->add_option("--k", sum_args.k, "sentences to extract");
  summ->add_option("--index", sum_args.index, "record index within the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (prep->parsed()) return run_prepare(prep_args);
    if (train->parsed()) return run_train(train_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (summ->parsed()) return run_summarize(sum_args);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const dcsum::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const dcsum::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
