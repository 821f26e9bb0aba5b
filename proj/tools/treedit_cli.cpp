// treedit — command-line front end for the edit-prediction pipeline.
//
// Subcommands: diff, apply, ingest, train, predict, evaluate, stats.
// Exit codes: 0 success, 1 usage, 2 bad input data, 3 internal error.
// Machine output is line-oriented key=value; --pretty renders tables.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "treedit/ast.hpp"
#include "treedit/augment.hpp"
#include "treedit/dataset.hpp"
#include "treedit/edit_script.hpp"
#include "treedit/errors.hpp"
#include "treedit/gumtree.hpp"
#include "treedit/model/network.hpp"
#include "treedit/model/params.hpp"
#include "treedit/model/train.hpp"
#include "treedit/model/vocab.hpp"
#include "treedit/path_ops.hpp"
#include "treedit/sexpr.hpp"
#include "treedit/toy.hpp"

namespace {

using treedit::ApplyError;
using treedit::CoverageError;
using treedit::DataError;
using treedit::ParseError;
using treedit::UnrepresentableError;

// ====== file helpers ======

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool has_sexp_extension(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".sexp") == 0;
}

struct LoadedTree {
  treedit::ast::Ast tree;
  bool is_toy = true;  // decides the output syntax for edited trees
};

/// ".sexp" files hold the parenthesized interchange form; everything
/// else is parsed as a toy-language program.
LoadedTree load_tree(const std::string& path) {
  std::string text = read_file(path);
  LoadedTree out;
  if (has_sexp_extension(path)) {
    out.tree = treedit::ast::parse_interchange(text);
    out.is_toy = false;
  } else {
    out.tree = treedit::toy::parse_toy(text).tree;
    out.is_toy = true;
  }
  return out;
}

std::string render_tree(const treedit::ast::Ast& tree, bool is_toy) {
  if (!is_toy) return treedit::ast::serialize_interchange(tree) + "\n";
  try {
    return treedit::toy::print_toy(tree);
  } catch (const std::logic_error& e) {
    throw DataError(std::string("edited tree is not a printable program: ") + e.what());
  }
}

// ====== diff ======

int cmd_diff(const std::string& before_path, const std::string& after_path,
             const std::string& format) {
  LoadedTree a = load_tree(before_path);
  LoadedTree b = load_tree(after_path);
  treedit::diff::EditScript script = treedit::diff::diff(a.tree, b.tree);
  if (format == "ops") {
    std::fputs(treedit::diff::serialize_script(script).c_str(), stdout);
    return 0;
  }
  // Path form: operations over the augmented before-tree (no context).
  treedit::paths::AugmentedAst aug = treedit::paths::augment(a.tree, {});
  std::vector<treedit::paths::PathOperation> ops =
      treedit::paths::script_to_path_ops(aug, script, treedit::paths::EncodeMode::Target);
  for (const auto& op : ops)
    std::fprintf(stdout, "%s\n", treedit::paths::path_op_to_string(aug, op).c_str());
  return 0;
}

// ====== apply ======

/// Distinguishes the two script syntaxes by the token after the opcode:
/// tree-level ops continue with a node id, first(...), a quoted value or
/// a subtree, while path operations continue with a kind[index] chain.
bool looks_like_path_ops(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string opcode, rest;
    if (!(ls >> opcode >> rest)) continue;
    char c = rest[0];
    return !(std::isdigit(static_cast<unsigned char>(c)) || c == '"' || c == '(' ||
             rest.rfind("first(", 0) == 0);
  }
  return false;
}

int cmd_apply(const std::string& before_path, const std::string& script_path) {
  LoadedTree before = load_tree(before_path);
  std::string text = read_file(script_path);
  treedit::ast::Ast edited;
  if (looks_like_path_ops(text)) {
    treedit::paths::AugmentedAst aug = treedit::paths::augment(before.tree, {});
    std::vector<treedit::paths::PathOperation> ops;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ops.push_back(treedit::paths::parse_path_op(aug, line));
    }
    edited = treedit::paths::apply_path_ops(aug, ops);
  } else {
    treedit::diff::EditScript script = treedit::diff::parse_script(text);
    edited = treedit::diff::apply_script(before.tree, script);
  }
  std::fputs(render_tree(edited, before.is_toy).c_str(), stdout);
  return 0;
}

// ====== ingest ======

int cmd_ingest(const std::string& corpus_dir, const std::string& out_file,
               const treedit::data::IngestConfig& cfg, bool pretty) {
  treedit::data::IngestResult result = treedit::data::ingest_corpus(corpus_dir, cfg);
  if (result.report.cases == 0)
    throw DataError("no before/after cases under " + corpus_dir);
  treedit::data::save_dataset_file(result.examples, out_file);
  const auto& r = result.report;
  if (pretty) {
    std::fprintf(stdout, "%-24s %6zu\n%-24s %6zu\n", "cases", r.cases, "kept", r.kept);
    for (const auto& [reason, n] : r.dropped)
      std::fprintf(stdout, "dropped: %-15s %6zu\n", reason.c_str(), n);
  } else {
    std::fprintf(stdout, "cases=%zu\nkept=%zu\n", r.cases, r.kept);
    for (const auto& [reason, n] : r.dropped)
      std::fprintf(stdout, "dropped.%s=%zu\n", reason.c_str(), n);
  }
  return 0;
}

// ====== train ======

struct TrainFlags {
  treedit::model::ModelConfig model;
  treedit::model::TrainConfig train;
  std::string val_file;
  size_t min_subtoken_freq = 1;
};

int cmd_train(const std::string& dataset_path, const std::string& checkpoint_path,
              const TrainFlags& flags) {
  std::vector<treedit::data::Example> train_examples =
      treedit::data::load_dataset_file(dataset_path);
  std::vector<treedit::data::Example> val_examples;
  if (!flags.val_file.empty()) val_examples = treedit::data::load_dataset_file(flags.val_file);

  treedit::model::Vocab vocab = treedit::model::Vocab::build(
      treedit::toy::toy_vocab(), treedit::data::collect_subtoken_freq(train_examples),
      flags.min_subtoken_freq);

  std::vector<treedit::model::PreparedExample> train_set, val_set;
  train_set.reserve(train_examples.size());
  for (const auto& ex : train_examples) train_set.push_back(treedit::data::prepare(ex, vocab));
  for (const auto& ex : val_examples) val_set.push_back(treedit::data::prepare(ex, vocab));

  treedit::model::ModelParams params =
      treedit::model::ModelParams::init(flags.model, vocab, flags.train.seed);
  treedit::model::TrainStats stats = treedit::model::train_model(
      params, train_set, val_set.empty() ? train_set : val_set, flags.train, &std::cout);
  treedit::model::save_checkpoint_file(params, checkpoint_path);
  std::fprintf(stdout, "steps=%d\nlast_loss=%.6f\nbest_acc=%.4f\nreached_target=%d\n",
               stats.steps, stats.last_loss, stats.best_acc, stats.reached_target ? 1 : 0);
  return 0;
}

// ====== predict ======

int cmd_predict(const std::string& checkpoint_path, const std::string& example_path,
                const std::string& emit) {
  treedit::model::ModelParams params = treedit::model::load_checkpoint_file(checkpoint_path);
  std::vector<treedit::data::Example> examples = treedit::data::load_dataset_file(example_path);
  if (examples.empty()) throw DataError("no examples in " + example_path);
  for (const auto& ex : examples) {
    treedit::data::PreparedPieces pieces = treedit::data::prepare_pieces(ex);
    treedit::model::PreparedExample prepared = treedit::data::prepare(ex, params.vocab);
    std::vector<int> classes = treedit::model::predict_greedy(params, prepared);
    std::vector<treedit::paths::PathOperation> ops;
    ops.reserve(classes.size());
    for (int c : classes) ops.push_back(pieces.candidates.ops[static_cast<size_t>(c)]);
    std::fprintf(stdout, "example %s %s\n", ex.project.c_str(), ex.case_id.c_str());
    if (emit == "script") {
      for (const auto& op : ops)
        std::fprintf(stdout, "%s\n",
                     treedit::paths::path_op_to_string(pieces.aug_target, op).c_str());
    } else {
      treedit::ast::Ast edited = treedit::paths::apply_path_ops(pieces.aug_target, ops);
      std::fputs(render_tree(edited, /*is_toy=*/true).c_str(), stdout);
    }
    std::fputs("end\n", stdout);
  }
  return 0;
}

// ====== evaluate ======

int cmd_evaluate(const std::string& checkpoint_path, const std::string& dataset_path) {
  treedit::model::ModelParams params = treedit::model::load_checkpoint_file(checkpoint_path);
  std::vector<treedit::data::Example> examples = treedit::data::load_dataset_file(dataset_path);
  if (examples.empty()) throw DataError("empty dataset: " + dataset_path);
  std::vector<treedit::model::PreparedExample> prepared;
  prepared.reserve(examples.size());
  for (const auto& ex : examples) prepared.push_back(treedit::data::prepare(ex, params.vocab));
  double acc = treedit::model::exact_match(params, prepared);
  std::fprintf(stdout, "exact_match=%.4f\nexamples=%zu\n", acc, examples.size());
  return 0;
}

// ====== stats ======

int cmd_stats(const std::string& dataset_path, bool pretty) {
  treedit::data::DatasetStats s =
      treedit::data::compute_stats(treedit::data::load_dataset_file(dataset_path));
  if (pretty) {
    std::fprintf(stdout, "%-22s %10zu\n%-22s %10zu\n", "examples", s.examples, "projects",
                 s.projects);
    std::fprintf(stdout, "%-22s %10.2f\n%-22s %10.2f\n%-22s %10.2f\n", "candidate ops/example",
                 s.avg_candidate_ops, "candidate paths", s.avg_candidate_paths,
                 "target ops/example", s.avg_target_ops);
    std::fprintf(stdout, "%-22s %9.1f%%\n%-22s %9.1f%%\n%-22s %9.1f%%\n%-22s %9.1f%%\n", "MOV",
                 s.pct_mov, "DEL", s.pct_del, "UPD", s.pct_upd, "INS", s.pct_ins);
    std::fprintf(stdout, "%-22s %10.2f\n%-22s %10.2f\n%-22s %10.2f\n", "moved subtree nodes",
                 s.avg_moved_size, "deleted subtree nodes", s.avg_deleted_size,
                 "inserted subtree nodes", s.avg_inserted_size);
  } else {
    std::fprintf(stdout, "examples=%zu\nprojects=%zu\n", s.examples, s.projects);
    std::fprintf(stdout, "avg_candidate_ops=%.4f\navg_candidate_paths=%.4f\navg_target_ops=%.4f\n",
                 s.avg_candidate_ops, s.avg_candidate_paths, s.avg_target_ops);
    std::fprintf(stdout, "pct_mov=%.4f\npct_del=%.4f\npct_upd=%.4f\npct_ins=%.4f\n", s.pct_mov,
                 s.pct_del, s.pct_upd, s.pct_ins);
    std::fprintf(stdout, "avg_moved_size=%.4f\navg_deleted_size=%.4f\navg_inserted_size=%.4f\n",
                 s.avg_moved_size, s.avg_deleted_size, s.avg_inserted_size);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree-edit prediction pipeline"};
  app.require_subcommand(1);

  // diff
  std::string diff_before, diff_after, diff_format = "ops";
  CLI::App* diff = app.add_subcommand("diff", "diff two programs into an edit script");
  diff->add_option("before", diff_before, "program before the change")->required();
  diff->add_option("after", diff_after, "program after the change")->required();
  diff->add_option("--format", diff_format, "output form")
      ->check(CLI::IsMember({"ops", "paths"}))
      ->capture_default_str();

  // apply
  std::string apply_before, apply_script;
  CLI::App* apply = app.add_subcommand("apply", "apply an edit script to a program");
  apply->add_option("before", apply_before, "program to edit")->required();
  apply->add_option("script", apply_script, "edit script (tree ops or path ops)")->required();

  // ingest
  std::string ingest_dir, ingest_out;
  treedit::data::IngestConfig ingest_cfg;
  bool ingest_pretty = false;
  CLI::App* ingest = app.add_subcommand("ingest", "build a dataset from a before/after corpus");
  ingest->add_option("corpus", ingest_dir, "corpus root directory (or TREEDIT_CORPUS)");
  ingest->add_option("out", ingest_out, "dataset file to write");
  ingest->add_option("--radius", ingest_cfg.radius, "context lines around the changed span")
      ->capture_default_str();
  ingest->add_option("--max-nodes", ingest_cfg.max_nodes, "largest target region kept")
      ->capture_default_str();
  ingest->add_flag("--pretty", ingest_pretty, "human-readable report");

  // train
  std::string train_data, train_ckpt;
  TrainFlags tf;
  bool no_context = false;
  CLI::App* train = app.add_subcommand("train", "train a model on a dataset");
  train->add_option("dataset", train_data, "training dataset file")->required();
  train->add_option("checkpoint", train_ckpt, "checkpoint file to write")->required();
  train->add_option("--val", tf.val_file, "held-out dataset for the eval metric");
  train->add_option("--seed", tf.train.seed, "RNG seed")->capture_default_str();
  train->add_flag("--no-context", no_context, "ignore context edits entirely");
  train->add_option("--embed-dim", tf.model.embed_dim, "embedding width")->capture_default_str();
  train->add_option("--hidden-dim", tf.model.hidden_dim, "recurrent width")->capture_default_str();
  train->add_option("--dropout", tf.model.dropout, "dropout rate")->capture_default_str();
  train->add_option("--lr", tf.train.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--batch-size", tf.train.batch_size, "examples per step")
      ->capture_default_str();
  train->add_option("--max-steps", tf.train.max_steps, "step budget")->capture_default_str();
  train->add_option("--eval-interval", tf.train.eval_interval, "steps between evals")
      ->capture_default_str();
  train->add_option("--target-acc", tf.train.target_acc, "stop once eval accuracy reaches this")
      ->capture_default_str();
  train->add_option("--patience", tf.train.patience, "evals without a new best before stopping")
      ->capture_default_str();
  train->add_option("--min-subtoken-freq", tf.min_subtoken_freq,
                    "training-set occurrences needed to enter the vocabulary")
      ->capture_default_str();

  // predict
  std::string pred_ckpt, pred_examples, pred_emit = "script";
  CLI::App* predict = app.add_subcommand("predict", "predict edits for examples");
  predict->add_option("checkpoint", pred_ckpt, "trained checkpoint")->required();
  predict->add_option("examples", pred_examples, "dataset file with examples")->required();
  predict->add_option("--emit", pred_emit, "output form")
      ->check(CLI::IsMember({"script", "code"}))
      ->capture_default_str();

  // evaluate
  std::string eval_ckpt, eval_data;
  CLI::App* evaluate = app.add_subcommand("evaluate", "exact-match accuracy on a dataset");
  evaluate->add_option("checkpoint", eval_ckpt, "trained checkpoint")->required();
  evaluate->add_option("dataset", eval_data, "dataset file")->required();

  // stats
  std::string stats_data;
  bool stats_pretty = false;
  CLI::App* stats = app.add_subcommand("stats", "dataset statistics");
  stats->add_option("dataset", stats_data, "dataset file")->required();
  stats->add_flag("--pretty", stats_pretty, "human-readable table");

  try {
    app.parse(argc, argv);
    if (*diff) return cmd_diff(diff_before, diff_after, diff_format);
    if (*apply) return cmd_apply(apply_before, apply_script);
    if (*ingest) {
      if (ingest_out.empty()) {
        // Only one positional given: it is the output file, the corpus
        // comes from the environment.
        std::swap(ingest_dir, ingest_out);
      }
      if (ingest_out.empty()) throw CLI::RequiredError("out");
      if (ingest_dir.empty()) {
        const char* env = std::getenv("TREEDIT_CORPUS");
        if (env == nullptr || *env == '\0')
          throw CLI::RequiredError("corpus (or TREEDIT_CORPUS)");
        ingest_dir = env;
      }
      return cmd_ingest(ingest_dir, ingest_out, ingest_cfg, ingest_pretty);
    }
    if (*train) {
      tf.model.use_context = !no_context;
      return cmd_train(train_data, train_ckpt, tf);
    }
    if (*predict) return cmd_predict(pred_ckpt, pred_examples, pred_emit);
    if (*evaluate) return cmd_evaluate(eval_ckpt, eval_data);
    if (*stats) return cmd_stats(stats_data, stats_pretty);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems collapse onto exit 1
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ApplyError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnrepresentableError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const CoverageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
