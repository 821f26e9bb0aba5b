#include <cmath>
#include <random>

#include "doctest.h"
#include "treedit/gumtree.hpp"
#include "treedit/model/network.hpp"
#include "treedit/toy.hpp"

using namespace treedit::model;
using treedit::CoverageError;
using treedit::ast::Ast;
using treedit::diff::diff;
using treedit::diff::EditScript;
using treedit::paths::augment;
using treedit::paths::AugmentedAst;
using treedit::paths::CandidateSet;
using treedit::paths::EncodeMode;
using treedit::paths::enumerate_candidates;
using treedit::paths::PathOperation;
using treedit::paths::script_to_path_ops;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Vocab tiny_vocab() {
  return Vocab::build(treedit::toy::toy_vocab(),
                      {{"x", 3}, {"y", 3}, {"foo", 2}, {"1", 1}, {"2", 1}}, 1);
}

ModelParams tiny_params(bool use_context = true, uint64_t seed = 31) {
  ModelConfig cfg;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 5;
  cfg.use_context = use_context;
  cfg.dropout = 0.25;
  return ModelParams::init(cfg, tiny_vocab(), seed);
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Independent scalar-loop LSTM step (gates stacked [i; f; g; o]).
void oracle_lstm(const LstmParams& w, const VectorXd& x, VectorXd& h, VectorXd& c) {
  const int hd = static_cast<int>(h.size());
  VectorXd gates = w.w_ih * x + w.w_hh * h + w.b.col(0);
  VectorXd nh(hd), nc(hd);
  for (int k = 0; k < hd; ++k) {
    double i = sig(gates(k));
    double f = sig(gates(hd + k));
    double g = std::tanh(gates(2 * hd + k));
    double o = sig(gates(3 * hd + k));
    nc(k) = f * c(k) + i * g;
    nh(k) = o * std::tanh(nc(k));
  }
  h = nh;
  c = nc;
}

VectorXd oracle_endpoint(const ModelParams& p, const PathEndpoint& ep) {
  if (!ep.is_value) return encode_node(p, ep.kind_id, ep.index_id);
  return encode_value(p, ep.subtoken_ids);
}

/// Re-derives one path encoding with the scalar LSTM.
VectorXd oracle_encode_path(const ModelParams& p, const PathSpec& sp) {
  const int h = p.cfg.hidden_dim;
  VectorXd hh = VectorXd::Zero(h), cc = VectorXd::Zero(h);
  for (size_t t = 0; t < sp.kind_ids.size(); ++t) {
    oracle_lstm(p.path_lstm, encode_node(p, sp.kind_ids[t], sp.index_ids[t]), hh, cc);
  }
  VectorXd cat(h + 2 * p.cfg.embed_dim);
  cat << hh, oracle_endpoint(p, sp.source), oracle_endpoint(p, sp.target);
  return (p.w_path * cat).array().tanh().matrix();
}

VectorXd oracle_softmax(const VectorXd& v) {
  VectorXd e = (v.array() - v.maxCoeff()).exp().matrix();
  return e / e.sum();
}

PathSpec random_spec(std::mt19937_64& rng, const Vocab& v, int len) {
  std::uniform_int_distribution<int> kind(0, static_cast<int>(v.kinds.size()) - 1);
  std::uniform_int_distribution<int> idx(0, v.max_child_index);
  std::uniform_int_distribution<int> tok(0, static_cast<int>(v.subtokens.size()) - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  PathSpec sp;
  for (int i = 0; i < len; ++i) {
    sp.kind_ids.push_back(kind(rng));
    sp.index_ids.push_back(idx(rng));
  }
  auto ep = [&]() {
    PathEndpoint e;
    if (coin(rng)) {
      e.is_value = true;
      int n = coin(rng) + 1;
      for (int i = 0; i < n; ++i) e.subtoken_ids.push_back(tok(rng));
    } else {
      e.kind_id = kind(rng);
      e.index_id = idx(rng);
    }
    return e;
  };
  sp.source = ep();
  sp.target = ep();
  return sp;
}

/// A small end-to-end example built through the real pipeline, with the
/// edit itself supplied as context.
struct Built {
  AugmentedAst aug;
  CandidateSet cands;
  std::vector<PathOperation> gold_ops, ctx_ops;
  PreparedExample ex;
};

Built build_example(const Vocab& vocab) {
  Ast a = treedit::toy::parse_toy("x = 1;\ny = foo(x);\n").tree;
  Ast b = treedit::toy::parse_toy("y = foo(x);\nx = 2;\n").tree;
  EditScript s = diff(a, b);
  Built out{augment(a, s), {}, {}, {}, {}};
  out.cands = enumerate_candidates(out.aug);
  out.gold_ops = script_to_path_ops(out.aug, s, EncodeMode::Target);
  out.ctx_ops = script_to_path_ops(out.aug, s, EncodeMode::Context);
  out.ex = prepare_example(vocab, out.aug, out.cands, out.gold_ops, out.aug, out.ctx_ops);
  return out;
}

bool grads_equal(const ModelParams& a, const ModelParams& b) {
  bool eq = true;
  std::vector<const MatrixXd*> bt;
  b.visit([&](const char*, const MatrixXd& t) { bt.push_back(&t); });
  size_t i = 0;
  a.visit([&](const char*, const MatrixXd& t) {
    if (t != *bt[i]) eq = false;
    ++i;
  });
  return eq;
}

}  // namespace

TEST_CASE("node and value embeddings follow the additive scheme") {
  ModelParams p = tiny_params();
  CHECK(encode_node(p, 3, 7) == (p.e_kinds.row(3) + p.e_index.row(7)).transpose());
  VectorXd v = encode_value(p, {1, 4, 1});
  VectorXd expect = (p.e_subtokens.row(1) * 2 + p.e_subtokens.row(4)).transpose();
  CHECK((v - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(encode_value(p, {}).isZero(0.0));
}

TEST_CASE("the path encoder matches a scalar step-by-step oracle") {
  ModelParams p = tiny_params();
  std::mt19937_64 rng(12);
  for (int round = 0; round < 20; ++round) {
    PathSpec sp = random_spec(rng, p.vocab, 1 + round % 7);
    MatrixXd z = encode_paths(p, {sp});
    REQUIRE(z.cols() == 1);
    VectorXd want = oracle_encode_path(p, sp);
    CHECK((z.col(0) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("batched path encoding equals one-path-at-a-time encoding") {
  ModelParams p = tiny_params();
  std::mt19937_64 rng(13);
  std::vector<PathSpec> specs;
  std::uniform_int_distribution<int> len(1, 7);
  for (int i = 0; i < 12; ++i) specs.push_back(random_spec(rng, p.vocab, len(rng)));
  MatrixXd all = encode_paths(p, specs);
  REQUIRE(all.cols() == 12);
  for (int j = 0; j < 12; ++j) {
    MatrixXd one = encode_paths(p, {specs[j]});
    CHECK((all.col(j) - one.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(encode_paths(p, {}).cols() == 0);
}

TEST_CASE("context encoding chains LSTM states over path encodings") {
  ModelParams p = tiny_params();
  std::mt19937_64 rng(14);
  std::vector<PathSpec> specs;
  for (int i = 0; i < 5; ++i) specs.push_back(random_spec(rng, p.vocab, 1 + i));
  MatrixXd states = encode_context(p, specs);
  REQUIRE(states.cols() == 5);

  MatrixXd z = encode_paths(p, specs);
  VectorXd hh = VectorXd::Zero(p.cfg.hidden_dim), cc = hh;
  for (int t = 0; t < 5; ++t) {
    oracle_lstm(p.ctx_lstm, z.col(t), hh, cc);
    CHECK((states.col(t) - hh).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("candidate classes are per-kind projections plus a learned EOS") {
  ModelParams p = tiny_params();
  std::mt19937_64 seed(15);
  MatrixXd z = MatrixXd::NullaryExpr(p.cfg.hidden_dim, 3, [&]() {
    return std::uniform_real_distribution<double>(-1, 1)(seed);
  });
  std::vector<CandidateRef> refs = {{0, treedit::paths::PathOpKind::Mov},
                                    {2, treedit::paths::PathOpKind::Upd},
                                    {1, treedit::paths::PathOpKind::Ins},
                                    {0, treedit::paths::PathOpKind::Upd}};
  MatrixXd z_op = encode_candidates(p, z, refs);
  REQUIRE(z_op.cols() == 5);
  CHECK((z_op.col(0) - p.w_mov.transpose() * z.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z_op.col(1) - p.w_upd.transpose() * z.col(2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z_op.col(2) - p.w_ins.transpose() * z.col(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z_op.col(3) - p.w_upd.transpose() * z.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(z_op.col(4) == p.eos_class.col(0));
}

TEST_CASE("attention and pointer produce proper distributions") {
  ModelParams p = tiny_params();
  std::mt19937_64 rng(16);
  auto runif = [&]() { return std::uniform_real_distribution<double>(-2, 2)(rng); };
  for (int round = 0; round < 50; ++round) {
    int nc = 1 + round % 6;
    MatrixXd z_ctx = MatrixXd::NullaryExpr(p.cfg.hidden_dim, nc, runif);
    VectorXd h = VectorXd::NullaryExpr(p.cfg.hidden_dim, runif);
    auto [alpha, mix] = attend(p, z_ctx, h);
    REQUIRE(alpha.size() == nc);
    CHECK(alpha.minCoeff() >= 0.0);
    CHECK(alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((mix - z_ctx * alpha).cwiseAbs().maxCoeff() < 1e-12);
    VectorXd want = oracle_softmax(z_ctx.transpose() * (p.w_attn * h));
    CHECK((alpha - want).cwiseAbs().maxCoeff() < 1e-12);

    int m = 1 + round % 9;
    MatrixXd z_op = MatrixXd::NullaryExpr(p.cfg.hidden_dim, m + 1, runif);
    VectorXd probs = point(p, z_op, h);
    REQUIRE(probs.size() == m + 1);
    CHECK(probs.minCoeff() > 0.0);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
    VectorXd want_p = oracle_softmax(z_op.transpose() * (p.w_point * h));
    CHECK((probs - want_p).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("prepared examples dedupe paths and resolve gold classes") {
  Vocab vocab = tiny_vocab();
  Built b = build_example(vocab);

  CHECK(b.ex.candidates.size() == b.cands.ops.size());
  // MOV/UPD/INS candidates share endpoint pairs, so paths dedupe hard.
  CHECK(b.ex.paths.size() < b.ex.candidates.size());
  for (const CandidateRef& ref : b.ex.candidates) {
    CHECK(ref.path >= 0);
    CHECK(ref.path < static_cast<int>(b.ex.paths.size()));
  }
  // Same path index implies the same feature ids.
  for (size_t j = 0; j < b.ex.candidates.size(); ++j) {
    CHECK(b.ex.paths[b.ex.candidates[j].path].kind_ids ==
          make_path_spec(vocab, b.aug.tree, b.cands.ops[j].path).kind_ids);
  }
  REQUIRE(b.ex.gold.size() == b.gold_ops.size());
  for (size_t i = 0; i < b.ex.gold.size(); ++i) {
    CHECK(b.ex.gold[i] == b.cands.index_of(b.gold_ops[i]));
  }
  CHECK(b.ex.context.size() == b.ctx_ops.size());

  // A gold op outside the candidate set is a coverage failure.
  PathOperation bogus;
  bogus.kind = treedit::paths::PathOpKind::Upd;
  bogus.path = {3, 3};  // UPD onto itself: never enumerated
  CHECK_THROWS_AS((void)prepare_example(vocab, b.aug, b.cands, {bogus}, b.aug, {}),
                  CoverageError);
}

TEST_CASE("terminal endpoints encode values, nonterminals encode kind+index") {
  Vocab vocab = tiny_vocab();
  Ast a = treedit::toy::parse_toy("x = 1;\n").tree;
  AugmentedAst aug = augment(a, {});
  // Path from the "x" Name terminal to the Literal terminal.
  treedit::ast::NodeId name = 0, lit = 0;
  for (auto id : aug.tree.preorder()) {
    if (!aug.is_original(id)) continue;
    if (aug.tree.node(id).kind == "Name") name = id;
    if (aug.tree.node(id).kind == "Literal") lit = id;
  }
  PathSpec sp = make_path_spec(vocab, aug.tree,
                               treedit::ast::path_between(aug.tree, name, lit));
  CHECK(sp.source.is_value);
  CHECK(sp.source.subtoken_ids == vocab.value_ids("x"));
  CHECK(sp.target.is_value);
  CHECK(sp.target.subtoken_ids == vocab.value_ids("1"));
  CHECK(sp.kind_ids.size() == sp.index_ids.size());

  PathSpec sp2 = make_path_spec(
      vocab, aug.tree, treedit::ast::path_between(aug.tree, aug.tree.root(), name));
  CHECK_FALSE(sp2.source.is_value);
  CHECK(sp2.source.kind_id == vocab.kind_id("Unit"));
}

TEST_CASE("forward_loss matches a building-block oracle") {
  Vocab vocab = tiny_vocab();
  Built b = build_example(vocab);

  auto oracle_loss = [&](const ModelParams& p, const PreparedExample& ex) {
    const int m = static_cast<int>(ex.candidates.size());
    MatrixXd z_paths = encode_paths(p, ex.paths);
    bool has_ctx = p.cfg.use_context && !ex.context.empty();
    MatrixXd z_c(p.cfg.hidden_dim, 0);
    if (has_ctx) z_c = encode_context(p, ex.context);
    MatrixXd z_op = encode_candidates(p, z_paths, ex.candidates);

    int denom = static_cast<int>(z_paths.cols() + z_c.cols());
    VectorXd h0 = VectorXd::Zero(p.cfg.hidden_dim);
    if (denom > 0) {
      VectorXd sum = z_paths.rowwise().sum();
      if (has_ctx) sum += z_c.rowwise().sum();
      h0 = sum / denom;
    }
    VectorXd hh = h0, cc = VectorXd::Zero(p.cfg.hidden_dim);
    double loss = 0.0;
    const int steps = static_cast<int>(ex.gold.size()) + 1;
    for (int t = 0; t < steps; ++t) {
      VectorXd x = (t == 0) ? VectorXd(p.dec_start.col(0))
                            : VectorXd(z_op.col(ex.gold[t - 1]));
      oracle_lstm(p.dec_lstm, x, hh, cc);
      VectorXd mix = hh;
      if (has_ctx) {
        VectorXd alpha = oracle_softmax(z_c.transpose() * (p.w_attn * hh));
        mix = z_c * alpha;
      }
      VectorXd probs = oracle_softmax(z_op.transpose() * (p.w_point * mix));
      int y = (t < static_cast<int>(ex.gold.size())) ? ex.gold[t] : m;
      loss -= std::log(probs(y));
    }
    return loss / steps;
  };

  SUBCASE("with context and attention") {
    ModelParams p = tiny_params(true);
    double got = forward_loss(p, b.ex);
    CHECK(got == doctest::Approx(oracle_loss(p, b.ex)).epsilon(1e-10));
    CHECK(got > 0.0);
  }
  SUBCASE("without context") {
    ModelParams p = tiny_params(false);
    double got = forward_loss(p, b.ex);
    CHECK(got == doctest::Approx(oracle_loss(p, b.ex)).epsilon(1e-10));
  }
  SUBCASE("empty gold scores only the EOS step") {
    ModelParams p = tiny_params(true);
    PreparedExample eos_only = b.ex;
    eos_only.gold.clear();
    double got = forward_loss(p, eos_only);
    CHECK(got == doctest::Approx(oracle_loss(p, eos_only)).epsilon(1e-10));
  }
  SUBCASE("the trace exposes per-step distributions") {
    ModelParams p = tiny_params(true);
    ForwardTrace trace;
    (void)forward_loss(p, b.ex, nullptr, nullptr, &trace);
    REQUIRE(trace.class_probs.size() == b.ex.gold.size() + 1);
    REQUIRE(trace.attention_weights.size() == b.ex.gold.size() + 1);
    for (const auto& probs : trace.class_probs) {
      CHECK(probs.size() == static_cast<int>(b.ex.candidates.size()) + 1);
      CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
    for (const auto& alpha : trace.attention_weights) {
      CHECK(alpha.size() == static_cast<int>(b.ex.context.size()));
      CHECK(alpha.sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("analytic gradients agree with central differences") {
  Vocab vocab = tiny_vocab();
  Built b = build_example(vocab);

  SUBCASE("with context") {
    ModelParams p = tiny_params(true);
    CHECK(grad_check(p, b.ex, 1e-4, 120, 7) < 1e-4);
  }
  SUBCASE("without context") {
    ModelParams p = tiny_params(false);
    CHECK(grad_check(p, b.ex, 1e-4, 120, 7) < 1e-4);
  }
  SUBCASE("EOS-only example") {
    ModelParams p = tiny_params(true);
    PreparedExample eos_only = b.ex;
    eos_only.gold.clear();
    CHECK(grad_check(p, eos_only, 1e-4, 80, 7) < 1e-4);
  }
}

TEST_CASE("dropout is seeded and vanishes at rate zero") {
  Vocab vocab = tiny_vocab();
  Built b = build_example(vocab);
  ModelParams p = tiny_params(true);

  std::mt19937_64 r1(100), r2(100), r3(101);
  double l1 = forward_loss(p, b.ex, nullptr, &r1);
  double l2 = forward_loss(p, b.ex, nullptr, &r2);
  double l3 = forward_loss(p, b.ex, nullptr, &r3);
  CHECK(l1 == l2);
  CHECK(l1 != l3);  // a different mask almost surely shifts the loss

  ModelParams q = p;
  q.cfg.dropout = 0.0;
  std::mt19937_64 r4(100);
  CHECK(forward_loss(q, b.ex, nullptr, &r4) == forward_loss(q, b.ex));
}

TEST_CASE("a no-context model is bitwise blind to the context input") {
  Vocab vocab = tiny_vocab();
  Built b = build_example(vocab);
  ModelParams p = tiny_params(false);

  PreparedExample with_ctx = b.ex;
  PreparedExample no_ctx = b.ex;
  no_ctx.context.clear();
  PreparedExample rev_ctx = b.ex;
  std::reverse(rev_ctx.context.begin(), rev_ctx.context.end());

  CHECK(forward_loss(p, with_ctx) == forward_loss(p, no_ctx));
  CHECK(forward_loss(p, with_ctx) == forward_loss(p, rev_ctx));
  CHECK(predict_greedy(p, with_ctx) == predict_greedy(p, no_ctx));

  ModelParams g1 = p.zeros_like(), g2 = p.zeros_like();
  (void)forward_loss(p, with_ctx, &g1);
  (void)forward_loss(p, no_ctx, &g2);
  CHECK(grads_equal(g1, g2));
}

TEST_CASE("greedy decoding follows the argmax chain and respects the cap") {
  Vocab vocab = tiny_vocab();
  Built b = build_example(vocab);
  ModelParams p = tiny_params(true);

  std::vector<int> got = predict_greedy(p, b.ex);
  CHECK(got.size() <= static_cast<size_t>(p.cfg.max_decode_len));
  for (int cls : got) {
    CHECK(cls >= 0);
    CHECK(cls < static_cast<int>(b.ex.candidates.size()));
  }

  // Oracle: re-run the decoder feeding back the argmax class.
  const int m = static_cast<int>(b.ex.candidates.size());
  MatrixXd z_paths = encode_paths(p, b.ex.paths);
  MatrixXd z_c = encode_context(p, b.ex.context);
  MatrixXd z_op = encode_candidates(p, z_paths, b.ex.candidates);
  VectorXd h0 = (z_paths.rowwise().sum() + z_c.rowwise().sum()) /
                static_cast<double>(z_paths.cols() + z_c.cols());
  VectorXd hh = h0, cc = VectorXd::Zero(p.cfg.hidden_dim);
  std::vector<int> want;
  VectorXd x = p.dec_start.col(0);
  for (int t = 0; t < p.cfg.max_decode_len; ++t) {
    oracle_lstm(p.dec_lstm, x, hh, cc);
    VectorXd alpha = oracle_softmax(z_c.transpose() * (p.w_attn * hh));
    VectorXd mix = z_c * alpha;
    VectorXd probs = oracle_softmax(z_op.transpose() * (p.w_point * mix));
    int best = 0;
    probs.maxCoeff(&best);
    if (best == m) break;
    want.push_back(best);
    x = z_op.col(best);
  }
  CHECK(got == want);

  // A tiny cap truncates decoding.
  ModelParams capped = p;
  capped.cfg.max_decode_len = 1;
  CHECK(predict_greedy(capped, b.ex).size() <= 1);
}
