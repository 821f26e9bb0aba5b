// End-to-end acceptance gate for the edit-prediction pipeline. Each
// criterion prints one PASS/FAIL line; the binary exits nonzero if any
// criterion fails. Thresholds and budgets are fixed here, in code.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "treedit/augment.hpp"
#include "treedit/dataset.hpp"
#include "treedit/errors.hpp"
#include "treedit/gumtree.hpp"
#include "treedit/model/network.hpp"
#include "treedit/model/params.hpp"
#include "treedit/model/train.hpp"
#include "treedit/model/vocab.hpp"
#include "treedit/path_ops.hpp"
#include "treedit/sexpr.hpp"
#include "treedit/synth.hpp"
#include "treedit/toy.hpp"

using namespace treedit;
using ast::Ast;
using std::chrono::duration;
using std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-20s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

using ast::isomorphic;

double seconds_since(steady_clock::time_point t0) {
  return duration<double>(steady_clock::now() - t0).count();
}

// Subtoken frequencies good enough for fuzz vocabularies: every token
// the random-program generator can emit.
std::map<std::string, size_t> fuzz_subtokens() {
  std::map<std::string, size_t> freq;
  for (const auto& n : testgen::name_pool()) freq[n] = 100;
  for (int i = 0; i < 10; ++i) freq[std::to_string(i)] = 100;
  for (const char* w : {"true", "false", "null", "s0", "s1", "s2", "s3"}) freq[w] = 100;
  return freq;
}

std::vector<data::Example> family_examples(synth::Family f, int count, uint64_t seed,
                                           bool* all_kept) {
  std::vector<data::Example> out;
  for (const auto& c : synth::generate_cases(f, count, seed)) {
    std::string reason;
    auto ex = data::make_example(c.project, c.name, c.before_text, c.after_text, c.span,
                                 data::IngestConfig{}, &reason);
    if (!ex.has_value()) {
      *all_kept = false;
      continue;
    }
    out.push_back(std::move(*ex));
  }
  return out;
}

std::vector<data::Example> linq_examples(int count, uint64_t seed,
                                         const std::vector<std::string>& pool,
                                         bool* all_kept) {
  std::vector<data::Example> out;
  for (const auto& c : synth::generate_linq_cases(count, seed, pool)) {
    std::string reason;
    auto ex = data::make_example(c.project, c.name, c.before_text, c.after_text, c.span,
                                 data::IngestConfig{}, &reason);
    if (!ex.has_value()) {
      *all_kept = false;
      continue;
    }
    out.push_back(std::move(*ex));
  }
  return out;
}

// ====== 1. diff round-trip ======

void criterion_diff_round_trip() {
  testgen::Rng rng(20240601);
  const int kPairs = 1000;
  const double kBudgetSeconds = 10.0;
  int ok = 0;
  auto t0 = steady_clock::now();
  for (int i = 0; i < kPairs; ++i) {
    auto [a, b] = testgen::rand_tree_pair(rng, 50);
    diff::EditScript s = diff::diff(a, b);
    if (isomorphic(diff::apply_script(a, s), b)) ++ok;
  }
  double elapsed = seconds_since(t0);
  report("diff-round-trip", ok == kPairs && elapsed < kBudgetSeconds,
         fmt("%d/%d pairs reproduce the target, %.2fs (budget %.0fs)", ok, kPairs, elapsed,
             kBudgetSeconds));
}

// ====== 2. identity diffs ======

void criterion_identity() {
  testgen::Rng rng(424242);
  const int kTrees = 500;
  int ok = 0;
  for (int i = 0; i < kTrees; ++i) {
    Ast t = testgen::rand_toy_tree(rng, 50);
    if (diff::diff(t, t).empty()) ++ok;
  }
  report("diff-identity", ok == kTrees, fmt("%d/%d self-diffs are empty", ok, kTrees));
}

// ====== 3. path-operation equivalence ======

void criterion_path_equivalence() {
  testgen::Rng rng(90210);
  const int kWanted = 1000;
  const int kMaxAttempts = 8000;
  int checked = 0, ok = 0, attempts = 0;
  while (checked < kWanted && attempts < kMaxAttempts) {
    ++attempts;
    auto [a, b] = testgen::rand_tree_pair(rng, 40);
    diff::EditScript s = diff::diff(a, b);
    paths::AugmentedAst aug = paths::augment(a, s);
    std::vector<paths::PathOperation> ops;
    try {
      ops = paths::script_to_path_ops(aug, s, paths::EncodeMode::Target);
    } catch (const UnrepresentableError&) {
      continue;
    }
    ++checked;
    if (isomorphic(paths::apply_path_ops(aug, ops), diff::apply_script(a, s))) ++ok;
  }
  report("path-op-equivalence", checked == kWanted && ok == checked,
         fmt("%d/%d representable scripts agree with direct application (%d sampled)", ok,
             checked, attempts));
}

// ====== 4. candidate coverage ======

void criterion_candidate_coverage() {
  bool all_kept = true;
  std::vector<data::Example> exs;
  for (synth::Family f : {synth::Family::MovArg, synth::Family::DelWrap,
                          synth::Family::UpdRename, synth::Family::InsSubtree,
                          synth::Family::Linq}) {
    auto part = family_examples(f, 30, 1337, &all_kept);
    exs.insert(exs.end(), part.begin(), part.end());
  }
  size_t gold_ops = 0, covered = 0;
  for (const auto& ex : exs) {
    data::PreparedPieces pieces = data::prepare_pieces(ex);
    for (const auto& op : pieces.gold) {
      ++gold_ops;
      if (pieces.candidates.index_of(op) >= 0) ++covered;
    }
  }
  report("candidate-coverage",
         all_kept && exs.size() == 150 && gold_ops > 0 && covered == gold_ops,
         fmt("%zu/%zu gold operations enumerable across %zu synthetic examples", covered,
             gold_ops, exs.size()));
}

// ====== 5. gradient check ======

void criterion_gradient_check() {
  const double kEps = 1e-4;
  const int kCoords = 200;
  const double kTolerance = 1e-4;
  bool all_kept = true;
  std::vector<data::Example> exs = family_examples(synth::Family::UpdRename, 1, 7, &all_kept);
  if (!all_kept || exs.empty()) {
    report("gradient-check", false, "could not build a probe example");
    return;
  }
  model::Vocab vocab =
      model::Vocab::build(toy::toy_vocab(), data::collect_subtoken_freq(exs), 1);
  model::ModelConfig cfg;
  cfg.embed_dim = 8;
  cfg.hidden_dim = 8;
  cfg.use_context = true;
  cfg.dropout = 0.0;
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 11);
  model::PreparedExample pe = data::prepare(exs[0], vocab);
  double err = model::grad_check(params, pe, kEps, kCoords, 99);
  report("gradient-check", err < kTolerance,
         fmt("max relative error %.3e over %d coordinates (tolerance %.0e)", err, kCoords,
             kTolerance));
}

// ====== 6. distribution normalization ======

void criterion_normalization() {
  const double kTol = 1e-6;
  model::Vocab vocab = model::Vocab::build(toy::toy_vocab(), fuzz_subtokens(), 1);
  model::ModelConfig cfg;
  cfg.embed_dim = 16;
  cfg.hidden_dim = 16;
  cfg.use_context = true;
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 23);

  testgen::Rng rng(606060);
  int examples = 0;
  size_t dists = 0;
  double worst = 0.0;
  while (examples < 100) {
    auto [a, b] = testgen::rand_tree_pair(rng, 30);
    diff::EditScript s = diff::diff(a, b);
    if (s.empty()) continue;
    paths::AugmentedAst aug = paths::augment(a, s);
    model::PreparedExample pe;
    try {
      std::vector<paths::PathOperation> gold =
          paths::script_to_path_ops(aug, s, paths::EncodeMode::Target);
      std::vector<paths::PathOperation> ctx =
          paths::script_to_path_ops(aug, s, paths::EncodeMode::Context);
      pe = model::prepare_example(vocab, aug, paths::enumerate_candidates(aug), gold, aug, ctx);
    } catch (const UnrepresentableError&) {
      continue;
    } catch (const CoverageError&) {
      continue;
    }
    ++examples;
    model::ForwardTrace trace;
    (void)model::forward_loss(params, pe, nullptr, nullptr, &trace);
    for (const auto& dist : trace.class_probs) {
      worst = std::max(worst, std::abs(dist.sum() - 1.0));
      ++dists;
    }
    for (const auto& alpha : trace.attention_weights) {
      if (alpha.size() == 0) continue;  // step without context attention
      worst = std::max(worst, std::abs(alpha.sum() - 1.0));
      ++dists;
    }
  }
  report("normalization", worst < kTol,
         fmt("%zu distributions over %d examples, max |sum-1| = %.2e (tolerance %.0e)", dists,
             examples, worst, kTol));
}

// ====== 7. memorization ======

void criterion_memorization() {
  const double kTargetAcc = 0.95;
  const double kBudgetSeconds = 900.0;
  bool all_kept = true;
  std::vector<data::Example> exs;
  for (synth::Family f : {synth::Family::MovArg, synth::Family::DelWrap,
                          synth::Family::UpdRename, synth::Family::InsSubtree}) {
    auto part = family_examples(f, 16, 2024, &all_kept);
    exs.insert(exs.end(), part.begin(), part.end());
  }
  if (!all_kept || exs.size() != 64) {
    report("memorization", false, fmt("expected 64 training examples, built %zu", exs.size()));
    return;
  }
  model::Vocab vocab =
      model::Vocab::build(toy::toy_vocab(), data::collect_subtoken_freq(exs), 1);
  std::vector<model::PreparedExample> prepared;
  prepared.reserve(exs.size());
  for (const auto& ex : exs) prepared.push_back(data::prepare(ex, vocab));

  model::ModelConfig cfg;  // d=64, h=128, dropout 0.25: the reference setup
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 20240601);
  model::TrainConfig tc;
  tc.batch_size = 16;
  tc.learning_rate = 1e-3;
  tc.max_steps = 5000;
  tc.eval_interval = 25;
  tc.target_acc = kTargetAcc;
  tc.seed = 7;

  auto t0 = steady_clock::now();
  model::TrainStats stats = model::train_model(params, prepared, prepared, tc, nullptr);
  double elapsed = seconds_since(t0);
  double em = model::exact_match(params, prepared);
  report("memorization",
         stats.reached_target && em >= kTargetAcc && elapsed < kBudgetSeconds,
         fmt("train exact-match %.3f after %d steps, %.0fs (>= %.2f within %d steps, %.0fs)",
             em, stats.steps, elapsed, kTargetAcc, tc.max_steps, kBudgetSeconds));
}

// ====== 8. generalization to unseen identifiers ======

void criterion_generalization() {
  const double kTargetEm = 0.80;
  // Disjoint from both built-in pools and from the toy keywords.
  const std::vector<std::string> extra_pool = {"krill", "lotus", "mango", "nickel",
                                               "onyx",  "pearl", "quill", "raven"};
  bool all_kept = true;
  std::vector<data::Example> train_exs = linq_examples(128, 31, synth::default_id_pool(),
                                                       &all_kept);
  auto extra = linq_examples(32, 32, extra_pool, &all_kept);
  train_exs.insert(train_exs.end(), extra.begin(), extra.end());
  std::vector<data::Example> test_exs =
      linq_examples(100, 33, synth::held_out_id_pool(), &all_kept);
  if (!all_kept || train_exs.size() != 160 || test_exs.size() != 100) {
    report("generalization", false,
           fmt("expected 160 train / 100 test examples, built %zu / %zu", train_exs.size(),
               test_exs.size()));
    return;
  }

  model::Vocab vocab =
      model::Vocab::build(toy::toy_vocab(), data::collect_subtoken_freq(train_exs), 5);
  std::vector<model::PreparedExample> train_set, test_set;
  for (const auto& ex : train_exs) train_set.push_back(data::prepare(ex, vocab));
  for (const auto& ex : test_exs) test_set.push_back(data::prepare(ex, vocab));

  model::ModelConfig cfg;  // d=64, h=128, dropout 0.25
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 314159);
  model::TrainConfig tc;
  tc.batch_size = 16;
  tc.learning_rate = 1e-3;
  tc.max_steps = 5000;
  tc.eval_interval = 25;
  tc.target_acc = 0.98;  // on the training fold; generalization is judged below
  tc.seed = 9;
  model::TrainStats stats = model::train_model(params, train_set, train_set, tc, nullptr);
  double em_train = model::exact_match(params, train_set);
  double em_test = model::exact_match(params, test_set);
  report("generalization", em_test >= kTargetEm,
         fmt("held-out-identifier exact-match %.3f on 100 cases (train %.3f, %d steps)",
             em_test, em_train, stats.steps));
}

// ====== 9. context ablation ======

void criterion_context_ablation() {
  model::Vocab vocab = model::Vocab::build(toy::toy_vocab(), fuzz_subtokens(), 1);
  model::ModelConfig cfg;
  cfg.embed_dim = 16;
  cfg.hidden_dim = 16;
  cfg.use_context = false;
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 77);

  testgen::Rng rng(717171);
  int examples = 0, invariant = 0;
  while (examples < 100) {
    auto [a, b] = testgen::rand_tree_pair(rng, 30);
    diff::EditScript s = diff::diff(a, b);
    if (s.empty()) continue;
    paths::AugmentedAst aug = paths::augment(a, s);
    model::PreparedExample pe;
    try {
      std::vector<paths::PathOperation> gold =
          paths::script_to_path_ops(aug, s, paths::EncodeMode::Target);
      std::vector<paths::PathOperation> ctx =
          paths::script_to_path_ops(aug, s, paths::EncodeMode::Context);
      pe = model::prepare_example(vocab, aug, paths::enumerate_candidates(aug), gold, aug, ctx);
    } catch (const UnrepresentableError&) {
      continue;
    } catch (const CoverageError&) {
      continue;
    }
    if (pe.context.empty()) continue;  // need real context to ablate
    ++examples;

    model::PreparedExample no_ctx = pe;
    no_ctx.context.clear();
    model::PreparedExample reversed = pe;
    std::reverse(reversed.context.begin(), reversed.context.end());

    double l0 = model::forward_loss(params, pe);
    double l1 = model::forward_loss(params, no_ctx);
    double l2 = model::forward_loss(params, reversed);
    bool same_loss = l0 == l1 && l0 == l2;  // bitwise: context must not be touched
    bool same_pred = model::predict_greedy(params, pe) == model::predict_greedy(params, no_ctx) &&
                     model::predict_greedy(params, pe) == model::predict_greedy(params, reversed);
    if (same_loss && same_pred) ++invariant;
  }
  report("context-ablation", invariant == examples,
         fmt("%d/%d fuzz cases give bitwise-identical loss and predictions without context",
             invariant, examples));
}

// ====== 10. determinism ======

void criterion_determinism() {
  bool all_kept = true;
  std::vector<data::Example> exs = family_examples(synth::Family::MovArg, 8, 55, &all_kept);
  if (!all_kept || exs.size() != 8) {
    report("determinism", false, "could not build the 8-example probe set");
    return;
  }
  model::Vocab vocab =
      model::Vocab::build(toy::toy_vocab(), data::collect_subtoken_freq(exs), 1);
  std::vector<model::PreparedExample> prepared;
  for (const auto& ex : exs) prepared.push_back(data::prepare(ex, vocab));

  auto run = [&](std::string* log, std::string* ckpt) {
    model::ModelConfig cfg;
    cfg.embed_dim = 8;
    cfg.hidden_dim = 12;
    model::ModelParams params = model::ModelParams::init(cfg, vocab, 3);
    model::TrainConfig tc;
    tc.batch_size = 4;
    tc.max_steps = 30;
    tc.eval_interval = 5;
    tc.seed = 17;
    std::ostringstream metrics;
    (void)model::train_model(params, prepared, prepared, tc, &metrics);
    *log = metrics.str();
    std::ostringstream saved;
    model::save_checkpoint(params, saved);
    *ckpt = saved.str();
  };
  std::string log_a, ckpt_a, log_b, ckpt_b;
  run(&log_a, &ckpt_a);
  run(&log_b, &ckpt_b);

  std::istringstream in(ckpt_a);
  model::ModelParams reloaded = model::load_checkpoint(in);
  std::ostringstream resaved;
  model::save_checkpoint(reloaded, resaved);

  bool ok = !log_a.empty() && log_a == log_b && ckpt_a == ckpt_b && resaved.str() == ckpt_a;
  report("determinism", ok,
         fmt("same-seed logs %s, checkpoints %s, save/load/save %s",
             log_a == log_b ? "identical" : "DIFFER", ckpt_a == ckpt_b ? "identical" : "DIFFER",
             resaved.str() == ckpt_a ? "byte-stable" : "DRIFTS"));
}

// ====== 11. dataset filters ======

void criterion_dataset_filters() {
  namespace fs = std::filesystem;
  fs::path root = "tmp_acceptance_corpus";
  fs::remove_all(root);

  std::vector<synth::SynthCase> kept_cases;
  for (synth::Family f : {synth::Family::MovArg, synth::Family::DelWrap,
                          synth::Family::UpdRename, synth::Family::InsSubtree,
                          synth::Family::Linq}) {
    auto part = synth::generate_cases(f, 6, 41);
    kept_cases.insert(kept_cases.end(), part.begin(), part.end());
  }
  synth::write_corpus(root.string(), kept_cases);

  auto put = [&](const std::string& rel, const std::string& before, const std::string& after,
                 const std::string& span) {
    fs::path dir = root / rel;
    fs::create_directories(dir);
    std::ofstream(dir / "before.toy") << before;
    std::ofstream(dir / "after.toy") << after;
    std::ofstream(dir / "span.txt") << span;
  };
  auto proj = [](int i) { return "filt-p" + std::to_string(i % 3); };

  // 6x too_large: a 25-argument call is > 50 nodes.
  for (int i = 0; i < 6; ++i) {
    std::string args;
    for (int k = 0; k < 25; ++k) {
      if (k) args += ", ";
      args += "v" + std::to_string(i) + "n" + std::to_string(k);
    }
    put(proj(i) + "/too-large-" + std::to_string(i), "x = big" + std::to_string(i) + "(" +
            args + ");\n", "x = 1;\n", "1 1 1 1");
  }
  // 6x empty_target: nothing changes inside the span.
  for (int i = 0; i < 6; ++i) {
    std::string text = "a" + std::to_string(i) + " = 1;\nb" + std::to_string(i) + " = 2;\n";
    put(proj(i) + "/unchanged-" + std::to_string(i), text, text, "1 1 1 1");
  }
  // 6x delete_only: the spanned statement disappears.
  for (int i = 0; i < 6; ++i) {
    std::string keep = "k" + std::to_string(i) + " = 1;\n";
    put(proj(i) + "/delete-" + std::to_string(i), keep + "gone" + std::to_string(i) + "(0);\n",
        keep, "2 2 2 1");
  }
  // 6x trivial_rename: the context already shows the same rename.
  for (int i = 0; i < 6; ++i) {
    std::string o = "old" + std::to_string(i), n = "new" + std::to_string(i);
    put(proj(i) + "/rename-" + std::to_string(i), o + " = 1;\nuse(" + o + ");\n",
        n + " = 1;\nuse(" + n + ");\n", "2 2 2 2");
  }
  // 4x unrepresentable: wholly novel replacement, no context to copy from.
  for (int i = 0; i < 4; ++i) {
    put(proj(i) + "/novel-" + std::to_string(i), "x = 1;\n",
        "mk" + std::to_string(i) + "(arg" + std::to_string(i) + ");\n", "1 1 1 1");
  }
  // 2x parse_error: one bad program, one bad span file.
  put(proj(0) + "/broken-syntax", "x = ;\n", "x = 1;\n", "1 1 1 1");
  put(proj(1) + "/broken-span", "x = 1;\n", "y = 1;\n", "1 2 3");

  data::IngestResult res = data::ingest_corpus(root.string());
  fs::remove_all(root);

  std::map<std::string, size_t> expected_drops = {
      {"too_large", 6},      {"empty_target", 6},    {"delete_only", 6},
      {"trivial_rename", 6}, {"unrepresentable", 4}, {"parse_error", 2}};
  std::set<std::string> want_kept, got_kept;
  for (const auto& c : kept_cases) want_kept.insert(c.project + "/" + c.name);
  for (const auto& e : res.examples) got_kept.insert(e.project + "/" + e.case_id);

  data::DatasetStats stats = data::compute_stats(res.examples);
  double pct_sum = stats.pct_mov + stats.pct_del + stats.pct_upd + stats.pct_ins;

  bool ok = res.report.cases == 60 && res.report.kept == 30 &&
            res.report.dropped == expected_drops && got_kept == want_kept &&
            std::abs(pct_sum - 100.0) <= 0.1;
  std::string drops;
  for (const auto& [k, v] : res.report.dropped) drops += fmt(" %s=%zu", k.c_str(), v);
  report("dataset-filters", ok,
         fmt("60 cases -> kept %zu, drops%s; op-mix sums to %.3f%%", res.report.kept,
             drops.c_str(), pct_sum));
}

}  // namespace

int main() {
  std::printf("=== treedit acceptance ===\n");
  criterion_diff_round_trip();
  criterion_identity();
  criterion_path_equivalence();
  criterion_candidate_coverage();
  criterion_gradient_check();
  criterion_normalization();
  criterion_memorization();
  criterion_generalization();
  criterion_context_ablation();
  criterion_determinism();
  criterion_dataset_filters();
  if (g_failures != 0) {
    std::printf("=== %d criterion(s) FAILED ===\n", g_failures);
    return 1;
  }
  std::printf("=== all criteria passed ===\n");
  return 0;
}
