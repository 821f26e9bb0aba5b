// Microbenchmarks for the pipeline's hot paths: diffing, candidate
// enumeration, path encoding, and one training step.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "helpers.hpp"
#include "treedit/augment.hpp"
#include "treedit/dataset.hpp"
#include "treedit/gumtree.hpp"
#include "treedit/model/network.hpp"
#include "treedit/model/params.hpp"
#include "treedit/model/vocab.hpp"
#include "treedit/path_ops.hpp"
#include "treedit/synth.hpp"
#include "treedit/toy.hpp"

using namespace treedit;

namespace {

std::vector<std::pair<ast::Ast, ast::Ast>> tree_pairs(int count, int max_nodes) {
  testgen::Rng rng(12345);
  std::vector<std::pair<ast::Ast, ast::Ast>> pairs;
  pairs.reserve(count);
  for (int i = 0; i < count; ++i) pairs.push_back(testgen::rand_tree_pair(rng, max_nodes));
  return pairs;
}

data::Example probe_example() {
  auto cases = synth::generate_cases(synth::Family::UpdRename, 1, 99);
  std::string reason;
  auto ex = data::make_example(cases[0].project, cases[0].name, cases[0].before_text,
                               cases[0].after_text, cases[0].span, data::IngestConfig{}, &reason);
  return *ex;
}

model::Vocab probe_vocab(const data::Example& ex) {
  return model::Vocab::build(toy::toy_vocab(), data::collect_subtoken_freq({ex}), 1);
}

void BM_Diff(benchmark::State& state) {
  auto pairs = tree_pairs(64, static_cast<int>(state.range(0)));
  size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(diff::diff(a, b));
  }
}
BENCHMARK(BM_Diff)->Arg(20)->Arg(50);

void BM_EnumerateCandidates(benchmark::State& state) {
  testgen::Rng rng(777);
  ast::Ast t = testgen::rand_toy_tree(rng, static_cast<int>(state.range(0)));
  paths::AugmentedAst aug = paths::augment(t, {});
  for (auto _ : state) {
    benchmark::DoNotOptimize(paths::enumerate_candidates(aug));
  }
}
BENCHMARK(BM_EnumerateCandidates)->Arg(20)->Arg(50);

void BM_EncodePaths(benchmark::State& state) {
  data::Example ex = probe_example();
  model::Vocab vocab = probe_vocab(ex);
  model::PreparedExample pe = data::prepare(ex, vocab);
  model::ModelConfig cfg;
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::encode_paths(params, pe.paths));
  }
  state.counters["paths"] = static_cast<double>(pe.paths.size());
}
BENCHMARK(BM_EncodePaths);

void BM_TrainStep(benchmark::State& state) {
  data::Example ex = probe_example();
  model::Vocab vocab = probe_vocab(ex);
  model::PreparedExample pe = data::prepare(ex, vocab);
  model::ModelConfig cfg;
  model::ModelParams params = model::ModelParams::init(cfg, vocab, 1);
  model::ModelParams grads = params.zeros_like();
  for (auto _ : state) {
    benchmark::DoNotOptimize(model::forward_loss(params, pe, &grads));
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
