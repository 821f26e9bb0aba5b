#include "treedit/model/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace treedit::model {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sigmoid(const MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

VectorXd sigmoid_v(const VectorXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

VectorXd softmax_stable(const VectorXd& v) {
  VectorXd e = (v.array() - v.maxCoeff()).exp().matrix();
  return e / e.sum();
}

VectorXd embed_endpoint(const ModelParams& p, const PathEndpoint& ep) {
  if (!ep.is_value) {
    return (p.e_kinds.row(ep.kind_id) + p.e_index.row(ep.index_id)).transpose();
  }
  VectorXd e = VectorXd::Zero(p.cfg.embed_dim);
  for (int id : ep.subtoken_ids) e += p.e_subtokens.row(id).transpose();
  return e;
}

void scatter_endpoint(const PathEndpoint& ep, const VectorXd& de, ModelParams& g) {
  if (!ep.is_value) {
    g.e_kinds.row(ep.kind_id) += de.transpose();
    g.e_index.row(ep.index_id) += de.transpose();
    return;
  }
  for (int id : ep.subtoken_ids) g.e_subtokens.row(id) += de.transpose();
}

/// Keeps entry with probability 1-rate, scaling survivors by 1/(1-rate).
/// Draws column by column, rows inner.
MatrixXd dropout_mask(int rows, int cols, double rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = (u(rng) < rate) ? 0.0 : 1.0 / (1.0 - rate);
    }
  }
  return m;
}

// ====== batched path encoder ======
//
// Paths are sorted by length descending, so at every timestep the live
// paths are a prefix of the slots and each step is one GEMM. A finished
// slot's state simply stops being overwritten, which leaves its last
// hidden state in place.

struct PackedPaths {
  const std::vector<PathSpec>* specs = nullptr;
  std::vector<int> order;   // slot -> spec index
  std::vector<int> lens;    // per slot, non-increasing
  std::vector<int> active;  // live slots at each timestep
  int n = 0, max_len = 0;

  // Per-timestep activations over the active prefix (kept for backward).
  std::vector<MatrixXd> x, gi, gf, gg, go, c, tc, hs;
  MatrixXd h_last;  // h x n, slot order
  MatrixXd concat;  // (h + 2d) x n, slot order
  MatrixXd z;       // h x n, slot order

  MatrixXd to_original(const MatrixXd& slots) const {
    MatrixXd out(slots.rows(), n);
    for (int s = 0; s < n; ++s) out.col(order[s]) = slots.col(s);
    return out;
  }
  MatrixXd to_slots(const MatrixXd& orig) const {
    MatrixXd out(orig.rows(), n);
    for (int s = 0; s < n; ++s) out.col(s) = orig.col(order[s]);
    return out;
  }
};

void pack_forward(const ModelParams& p, const std::vector<PathSpec>& specs, bool keep,
                  PackedPaths& pk) {
  const int d = p.cfg.embed_dim;
  const int h = p.cfg.hidden_dim;
  const int n = static_cast<int>(specs.size());
  pk.specs = &specs;
  pk.n = n;
  pk.order.resize(n);
  std::iota(pk.order.begin(), pk.order.end(), 0);
  std::sort(pk.order.begin(), pk.order.end(), [&](int a, int b) {
    size_t la = specs[a].kind_ids.size(), lb = specs[b].kind_ids.size();
    if (la != lb) return la > lb;
    return a < b;
  });
  pk.lens.resize(n);
  for (int s = 0; s < n; ++s) pk.lens[s] = static_cast<int>(specs[pk.order[s]].kind_ids.size());
  pk.max_len = n ? pk.lens[0] : 0;
  pk.active.assign(pk.max_len, 0);

  MatrixXd big_h = MatrixXd::Zero(h, n);
  MatrixXd big_c = MatrixXd::Zero(h, n);
  for (int t = 0; t < pk.max_len; ++t) {
    int nt = 0;
    while (nt < n && pk.lens[nt] > t) ++nt;
    pk.active[t] = nt;
    MatrixXd xt(d, nt);
    for (int s = 0; s < nt; ++s) {
      const PathSpec& sp = specs[pk.order[s]];
      xt.col(s) =
          (p.e_kinds.row(sp.kind_ids[t]) + p.e_index.row(sp.index_ids[t])).transpose();
    }
    MatrixXd gates = p.path_lstm.w_ih * xt + p.path_lstm.w_hh * big_h.leftCols(nt);
    gates.colwise() += p.path_lstm.b.col(0);
    MatrixXd gi = sigmoid(gates.topRows(h));
    MatrixXd gf = sigmoid(gates.middleRows(h, h));
    MatrixXd gg = gates.middleRows(2 * h, h).array().tanh().matrix();
    MatrixXd go = sigmoid(gates.bottomRows(h));
    MatrixXd cn = (gf.array() * big_c.leftCols(nt).array() + gi.array() * gg.array()).matrix();
    MatrixXd tcn = cn.array().tanh().matrix();
    MatrixXd hn = (go.array() * tcn.array()).matrix();
    if (keep) {
      pk.x.push_back(std::move(xt));
      pk.gi.push_back(std::move(gi));
      pk.gf.push_back(std::move(gf));
      pk.gg.push_back(std::move(gg));
      pk.go.push_back(std::move(go));
      pk.c.push_back(cn);
      pk.tc.push_back(std::move(tcn));
      pk.hs.push_back(hn);
    }
    big_h.leftCols(nt) = hn;
    big_c.leftCols(nt) = cn;
  }
  pk.h_last = big_h;
  pk.concat.resize(h + 2 * d, n);
  pk.concat.topRows(h) = big_h;
  for (int s = 0; s < n; ++s) {
    const PathSpec& sp = specs[pk.order[s]];
    pk.concat.block(h, s, d, 1) = embed_endpoint(p, sp.source);
    pk.concat.block(h + d, s, d, 1) = embed_endpoint(p, sp.target);
  }
  pk.z = (p.w_path * pk.concat).array().tanh().matrix();
}

/// dz_slots must be in slot order (use to_slots first).
void pack_backward(const ModelParams& p, const PackedPaths& pk, const MatrixXd& dz_slots,
                   ModelParams& g) {
  if (pk.n == 0) return;
  const int d = p.cfg.embed_dim;
  const int h = p.cfg.hidden_dim;
  const std::vector<PathSpec>& specs = *pk.specs;

  MatrixXd dzraw = (dz_slots.array() * (1.0 - pk.z.array().square())).matrix();
  g.w_path += dzraw * pk.concat.transpose();
  MatrixXd dcat = p.w_path.transpose() * dzraw;
  MatrixXd dh_last = dcat.topRows(h);
  for (int s = 0; s < pk.n; ++s) {
    const PathSpec& sp = specs[pk.order[s]];
    scatter_endpoint(sp.source, dcat.block(h, s, d, 1), g);
    scatter_endpoint(sp.target, dcat.block(h + d, s, d, 1), g);
  }

  MatrixXd dbig_h = MatrixXd::Zero(h, pk.n);
  MatrixXd dbig_c = MatrixXd::Zero(h, pk.n);
  for (int t = pk.max_len - 1; t >= 0; --t) {
    const int nt = pk.active[t];
    const int nt_next = (t + 1 < pk.max_len) ? pk.active[t + 1] : 0;
    // Slots whose last step is t pick up their output gradient here.
    for (int s = nt_next; s < nt; ++s) dbig_h.col(s) += dh_last.col(s);

    const MatrixXd& gi = pk.gi[t];
    const MatrixXd& gf = pk.gf[t];
    const MatrixXd& gg = pk.gg[t];
    const MatrixXd& go = pk.go[t];
    const MatrixXd& tc = pk.tc[t];
    MatrixXd dht = dbig_h.leftCols(nt);
    MatrixXd dct = dbig_c.leftCols(nt);
    MatrixXd do_ = (dht.array() * tc.array()).matrix();
    MatrixXd dcell = dct + (dht.array() * go.array() * (1.0 - tc.array().square())).matrix();
    MatrixXd di = (dcell.array() * gg.array()).matrix();
    MatrixXd dg = (dcell.array() * gi.array()).matrix();
    MatrixXd df;
    if (t > 0) {
      df = (dcell.array() * pk.c[t - 1].leftCols(nt).array()).matrix();
    } else {
      df = MatrixXd::Zero(h, nt);
    }
    dbig_c.leftCols(nt) = (dcell.array() * gf.array()).matrix();

    MatrixXd dgates(4 * h, nt);
    dgates.topRows(h) = (di.array() * gi.array() * (1.0 - gi.array())).matrix();
    dgates.middleRows(h, h) = (df.array() * gf.array() * (1.0 - gf.array())).matrix();
    dgates.middleRows(2 * h, h) = (dg.array() * (1.0 - gg.array().square())).matrix();
    dgates.bottomRows(h) = (do_.array() * go.array() * (1.0 - go.array())).matrix();

    g.path_lstm.w_ih += dgates * pk.x[t].transpose();
    if (t > 0) g.path_lstm.w_hh += dgates * pk.hs[t - 1].leftCols(nt).transpose();
    g.path_lstm.b.col(0) += dgates.rowwise().sum();

    MatrixXd dx = p.path_lstm.w_ih.transpose() * dgates;
    for (int s = 0; s < nt; ++s) {
      const PathSpec& sp = specs[pk.order[s]];
      g.e_kinds.row(sp.kind_ids[t]) += dx.col(s).transpose();
      g.e_index.row(sp.index_ids[t]) += dx.col(s).transpose();
    }
    dbig_h.leftCols(nt) = p.path_lstm.w_hh.transpose() * dgates;
  }
}

// ====== single-stream LSTM (context encoder, decoder) ======

struct LstmStep {
  VectorXd x, i, f, g, o, c, tc, h;
};

void lstm_step(const LstmParams& w, const VectorXd& x, const VectorXd& h_prev,
               const VectorXd& c_prev, int hd, LstmStep& st) {
  VectorXd gates = w.w_ih * x + w.w_hh * h_prev + w.b.col(0);
  st.x = x;
  st.i = sigmoid_v(gates.head(hd));
  st.f = sigmoid_v(gates.segment(hd, hd));
  st.g = gates.segment(2 * hd, hd).array().tanh().matrix();
  st.o = sigmoid_v(gates.tail(hd));
  st.c = (st.f.array() * c_prev.array() + st.i.array() * st.g.array()).matrix();
  st.tc = st.c.array().tanh().matrix();
  st.h = (st.o.array() * st.tc.array()).matrix();
}

/// On entry dh/dc hold the gradients w.r.t. h_t/c_t; on exit they hold
/// the gradients w.r.t. h_{t-1}/c_{t-1}. Returns d loss / d x_t.
VectorXd lstm_step_backward(const LstmParams& w, LstmParams& gw, const LstmStep& st,
                            const VectorXd& h_prev, const VectorXd& c_prev, VectorXd& dh,
                            VectorXd& dc) {
  const int hd = static_cast<int>(st.h.size());
  VectorXd do_ = (dh.array() * st.tc.array()).matrix();
  VectorXd dcell = dc + (dh.array() * st.o.array() * (1.0 - st.tc.array().square())).matrix();
  VectorXd di = (dcell.array() * st.g.array()).matrix();
  VectorXd dg = (dcell.array() * st.i.array()).matrix();
  VectorXd df = (dcell.array() * c_prev.array()).matrix();
  dc = (dcell.array() * st.f.array()).matrix();

  VectorXd dgates(4 * hd);
  dgates.head(hd) = (di.array() * st.i.array() * (1.0 - st.i.array())).matrix();
  dgates.segment(hd, hd) = (df.array() * st.f.array() * (1.0 - st.f.array())).matrix();
  dgates.segment(2 * hd, hd) = (dg.array() * (1.0 - st.g.array().square())).matrix();
  dgates.tail(hd) = (do_.array() * st.o.array() * (1.0 - st.o.array())).matrix();

  gw.w_ih += dgates * st.x.transpose();
  gw.w_hh += dgates * h_prev.transpose();
  gw.b.col(0) += dgates;
  dh = w.w_hh.transpose() * dgates;
  return w.w_ih.transpose() * dgates;
}

// ====== whole-example encoding ======

struct Encoded {
  PackedPaths cand, ctxp;
  MatrixXd z_paths;  // h x np, original order
  bool has_ctx = false;
  MatrixXd mask_ctx;  // empty unless dropout drawn
  MatrixXd z_ctx_in;  // context-LSTM inputs (post dropout)
  std::vector<LstmStep> ctx_steps;
  MatrixXd z_c;   // h x nc context states
  MatrixXd z_op;  // h x (m+1)
  VectorXd h0;
  int denom = 0;
  bool has_mov = false, has_upd = false, has_ins = false;
};

void encode_example(const ModelParams& p, const PreparedExample& ex, bool keep,
                    std::mt19937_64* rng, Encoded& e) {
  const int h = p.cfg.hidden_dim;
  pack_forward(p, ex.paths, keep, e.cand);
  e.z_paths = e.cand.to_original(e.cand.z);
  const int np = static_cast<int>(ex.paths.size());

  int nc = 0;
  if (p.cfg.use_context && !ex.context.empty()) {
    e.has_ctx = true;
    pack_forward(p, ex.context, keep, e.ctxp);
    MatrixXd z_ctx_paths = e.ctxp.to_original(e.ctxp.z);
    nc = static_cast<int>(z_ctx_paths.cols());
    if (rng && p.cfg.dropout > 0.0) {
      e.mask_ctx = dropout_mask(h, nc, p.cfg.dropout, *rng);
      e.z_ctx_in = (z_ctx_paths.array() * e.mask_ctx.array()).matrix();
    } else {
      e.z_ctx_in = std::move(z_ctx_paths);
    }
    e.z_c.resize(h, nc);
    VectorXd hh = VectorXd::Zero(h);
    VectorXd cc = VectorXd::Zero(h);
    for (int t = 0; t < nc; ++t) {
      LstmStep st;
      lstm_step(p.ctx_lstm, e.z_ctx_in.col(t), hh, cc, h, st);
      hh = st.h;
      cc = st.c;
      e.z_c.col(t) = st.h;
      if (keep) e.ctx_steps.push_back(std::move(st));
    }
  } else {
    e.z_c.resize(h, 0);
  }

  for (const CandidateRef& ref : ex.candidates) {
    switch (ref.kind) {
      case paths::PathOpKind::Mov: e.has_mov = true; break;
      case paths::PathOpKind::Upd: e.has_upd = true; break;
      case paths::PathOpKind::Ins: e.has_ins = true; break;
    }
  }
  e.z_op = encode_candidates(p, e.z_paths, ex.candidates);

  e.denom = np + (e.has_ctx ? nc : 0);
  if (e.denom > 0) {
    VectorXd sum = e.z_paths.rowwise().sum();
    if (e.has_ctx) sum += e.z_c.rowwise().sum();
    e.h0 = sum / static_cast<double>(e.denom);
  } else {
    e.h0 = VectorXd::Zero(h);
  }
}

}  // namespace

// ====== feature extraction ======

PathSpec make_path_spec(const Vocab& vocab, const ast::Ast& tree, const ast::AstPath& path) {
  PathSpec sp;
  sp.kind_ids.reserve(path.size());
  sp.index_ids.reserve(path.size());
  for (ast::NodeId id : path) {
    const ast::AstNode& n = tree.node(id);
    sp.kind_ids.push_back(vocab.kind_id(n.kind));
    sp.index_ids.push_back(vocab.index_id(tree.child_index(id)));
  }
  auto endpoint = [&](ast::NodeId id) {
    const ast::AstNode& n = tree.node(id);
    PathEndpoint ep;
    if (n.terminal) {
      ep.is_value = true;
      ep.subtoken_ids = vocab.value_ids(n.value);
    } else {
      ep.kind_id = vocab.kind_id(n.kind);
      ep.index_id = vocab.index_id(tree.child_index(id));
    }
    return ep;
  };
  sp.source = endpoint(path.front());
  sp.target = endpoint(path.back());
  return sp;
}

PreparedExample prepare_example(const Vocab& vocab, const paths::AugmentedAst& aug_target,
                                const paths::CandidateSet& candidates,
                                const std::vector<paths::PathOperation>& gold,
                                const paths::AugmentedAst& aug_context,
                                const std::vector<paths::PathOperation>& context) {
  PreparedExample ex;
  std::map<ast::AstPath, int> seen;
  for (const paths::PathOperation& op : candidates.ops) {
    auto [it, fresh] = seen.emplace(op.path, static_cast<int>(ex.paths.size()));
    if (fresh) ex.paths.push_back(make_path_spec(vocab, aug_target.tree, op.path));
    ex.candidates.push_back({it->second, op.kind});
  }
  for (const paths::PathOperation& op : gold) {
    int ci = candidates.index_of(op);
    if (ci < 0) {
      throw CoverageError("gold operation '" + paths::path_op_to_string(aug_target, op) +
                          "' is not among the candidates");
    }
    ex.gold.push_back(ci);
  }
  for (const paths::PathOperation& op : context) {
    ex.context.push_back(make_path_spec(vocab, aug_context.tree, op.path));
  }
  return ex;
}

// ====== building blocks ======

Eigen::VectorXd encode_node(const ModelParams& p, int kind_id, int index_id) {
  return (p.e_kinds.row(kind_id) + p.e_index.row(index_id)).transpose();
}

Eigen::VectorXd encode_value(const ModelParams& p, const std::vector<int>& subtoken_ids) {
  PathEndpoint ep;
  ep.is_value = true;
  ep.subtoken_ids = subtoken_ids;
  return embed_endpoint(p, ep);
}

Eigen::MatrixXd encode_paths(const ModelParams& p, const std::vector<PathSpec>& specs) {
  PackedPaths pk;
  pack_forward(p, specs, /*keep=*/false, pk);
  return pk.to_original(pk.z);
}

Eigen::MatrixXd encode_context(const ModelParams& p, const std::vector<PathSpec>& specs) {
  const int h = p.cfg.hidden_dim;
  MatrixXd z = encode_paths(p, specs);
  MatrixXd states(h, z.cols());
  VectorXd hh = VectorXd::Zero(h);
  VectorXd cc = VectorXd::Zero(h);
  for (int t = 0; t < z.cols(); ++t) {
    LstmStep st;
    lstm_step(p.ctx_lstm, z.col(t), hh, cc, h, st);
    hh = st.h;
    cc = st.c;
    states.col(t) = st.h;
  }
  return states;
}

Eigen::MatrixXd encode_candidates(const ModelParams& p, const Eigen::MatrixXd& z_paths,
                                  const std::vector<CandidateRef>& candidates) {
  const int h = p.cfg.hidden_dim;
  const int m = static_cast<int>(candidates.size());
  bool has_mov = false, has_upd = false, has_ins = false;
  for (const CandidateRef& ref : candidates) {
    switch (ref.kind) {
      case paths::PathOpKind::Mov: has_mov = true; break;
      case paths::PathOpKind::Upd: has_upd = true; break;
      case paths::PathOpKind::Ins: has_ins = true; break;
    }
  }
  MatrixXd proj_mov, proj_upd, proj_ins;
  if (has_mov) proj_mov = p.w_mov.transpose() * z_paths;
  if (has_upd) proj_upd = p.w_upd.transpose() * z_paths;
  if (has_ins) proj_ins = p.w_ins.transpose() * z_paths;

  MatrixXd z_op(h, m + 1);
  for (int j = 0; j < m; ++j) {
    const CandidateRef& ref = candidates[j];
    switch (ref.kind) {
      case paths::PathOpKind::Mov: z_op.col(j) = proj_mov.col(ref.path); break;
      case paths::PathOpKind::Upd: z_op.col(j) = proj_upd.col(ref.path); break;
      case paths::PathOpKind::Ins: z_op.col(j) = proj_ins.col(ref.path); break;
    }
  }
  z_op.col(m) = p.eos_class.col(0);
  return z_op;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> attend(const ModelParams& p,
                                                   const Eigen::MatrixXd& z_ctx,
                                                   const Eigen::VectorXd& h) {
  VectorXd alpha = softmax_stable(z_ctx.transpose() * (p.w_attn * h));
  return {alpha, z_ctx * alpha};
}

Eigen::VectorXd point(const ModelParams& p, const Eigen::MatrixXd& z_classes,
                      const Eigen::VectorXd& ctx) {
  return softmax_stable(z_classes.transpose() * (p.w_point * ctx));
}

// ====== loss + gradients ======

namespace {

struct DecStep {
  VectorXd x_raw, mask, x;
  VectorXd h_prev, c_prev;
  LstmStep lstm;
  bool attended = false;
  VectorXd alpha, q_att, ctx, q_point, probs;
  int y = -1;
};

}  // namespace

double forward_loss(const ModelParams& p, const PreparedExample& ex, ModelParams* grads,
                    std::mt19937_64* dropout_rng, ForwardTrace* trace) {
  const int h = p.cfg.hidden_dim;
  const int m = static_cast<int>(ex.candidates.size());
  const int steps_total = static_cast<int>(ex.gold.size()) + 1;

  Encoded enc;
  encode_example(p, ex, /*keep=*/grads != nullptr, dropout_rng, enc);

  std::vector<DecStep> steps;
  steps.reserve(steps_total);
  VectorXd hh = enc.h0;
  VectorXd cc = VectorXd::Zero(h);
  double loss = 0.0;
  for (int t = 0; t < steps_total; ++t) {
    DecStep st;
    st.x_raw = (t == 0) ? VectorXd(p.dec_start.col(0)) : VectorXd(enc.z_op.col(ex.gold[t - 1]));
    if (dropout_rng && p.cfg.dropout > 0.0) {
      st.mask = dropout_mask(h, 1, p.cfg.dropout, *dropout_rng).col(0);
      st.x = (st.x_raw.array() * st.mask.array()).matrix();
    } else {
      st.x = st.x_raw;
    }
    st.h_prev = hh;
    st.c_prev = cc;
    lstm_step(p.dec_lstm, st.x, hh, cc, h, st.lstm);
    hh = st.lstm.h;
    cc = st.lstm.c;

    if (enc.has_ctx) {
      st.attended = true;
      st.q_att = p.w_attn * st.lstm.h;
      st.alpha = softmax_stable(enc.z_c.transpose() * st.q_att);
      st.ctx = enc.z_c * st.alpha;
    } else {
      st.ctx = st.lstm.h;
    }
    st.q_point = p.w_point * st.ctx;
    VectorXd logits = enc.z_op.transpose() * st.q_point;
    double mx = logits.maxCoeff();
    VectorXd shifted = (logits.array() - mx).exp().matrix();
    double z = shifted.sum();
    st.probs = shifted / z;
    st.y = (t < static_cast<int>(ex.gold.size())) ? ex.gold[t] : m;
    loss += std::log(z) + mx - logits(st.y);
    if (trace) {
      trace->class_probs.push_back(st.probs);
      trace->attention_weights.push_back(st.attended ? st.alpha : VectorXd());
    }
    steps.push_back(std::move(st));
  }
  loss /= steps_total;
  if (!grads) return loss;

  // ====== backward ======
  ModelParams& g = *grads;
  const int np = static_cast<int>(ex.paths.size());
  const int nc = static_cast<int>(enc.z_c.cols());
  MatrixXd dz_op = MatrixXd::Zero(h, m + 1);
  MatrixXd dz_c = MatrixXd::Zero(h, nc);
  MatrixXd dz_paths = MatrixXd::Zero(h, np);
  VectorXd dh = VectorXd::Zero(h);
  VectorXd dc = VectorXd::Zero(h);
  for (int t = steps_total - 1; t >= 0; --t) {
    DecStep& st = steps[t];
    VectorXd dlogits = st.probs;
    dlogits(st.y) -= 1.0;
    dlogits /= static_cast<double>(steps_total);

    dz_op += st.q_point * dlogits.transpose();
    VectorXd dq = enc.z_op * dlogits;
    g.w_point += dq * st.ctx.transpose();
    VectorXd dctx = p.w_point.transpose() * dq;

    if (st.attended) {
      VectorXd dalpha = enc.z_c.transpose() * dctx;
      dz_c += dctx * st.alpha.transpose();
      double dot = st.alpha.dot(dalpha);
      VectorXd da = (st.alpha.array() * (dalpha.array() - dot)).matrix();
      VectorXd dq_a = enc.z_c * da;
      g.w_attn += dq_a * st.lstm.h.transpose();
      dz_c += st.q_att * da.transpose();
      dh += p.w_attn.transpose() * dq_a;
    } else {
      dh += dctx;
    }

    VectorXd dx = lstm_step_backward(p.dec_lstm, g.dec_lstm, st.lstm, st.h_prev, st.c_prev, dh, dc);
    VectorXd dx_raw = st.mask.size() ? VectorXd((dx.array() * st.mask.array()).matrix()) : dx;
    if (t == 0) {
      g.dec_start.col(0) += dx_raw;
    } else {
      dz_op.col(ex.gold[t - 1]) += dx_raw;
    }
  }
  // dh now carries d loss / d h0 (c0 is the zero constant).
  if (enc.denom > 0) {
    VectorXd dh0 = dh / static_cast<double>(enc.denom);
    dz_paths.colwise() += dh0;
    if (enc.has_ctx) dz_c.colwise() += dh0;
  }

  g.eos_class.col(0) += dz_op.col(m);
  MatrixXd dp_mov, dp_upd, dp_ins;
  if (enc.has_mov) dp_mov = MatrixXd::Zero(h, np);
  if (enc.has_upd) dp_upd = MatrixXd::Zero(h, np);
  if (enc.has_ins) dp_ins = MatrixXd::Zero(h, np);
  for (int j = 0; j < m; ++j) {
    const CandidateRef& ref = ex.candidates[j];
    switch (ref.kind) {
      case paths::PathOpKind::Mov: dp_mov.col(ref.path) += dz_op.col(j); break;
      case paths::PathOpKind::Upd: dp_upd.col(ref.path) += dz_op.col(j); break;
      case paths::PathOpKind::Ins: dp_ins.col(ref.path) += dz_op.col(j); break;
    }
  }
  if (enc.has_mov) {
    g.w_mov += enc.z_paths * dp_mov.transpose();
    dz_paths += p.w_mov * dp_mov;
  }
  if (enc.has_upd) {
    g.w_upd += enc.z_paths * dp_upd.transpose();
    dz_paths += p.w_upd * dp_upd;
  }
  if (enc.has_ins) {
    g.w_ins += enc.z_paths * dp_ins.transpose();
    dz_paths += p.w_ins * dp_ins;
  }

  if (enc.has_ctx) {
    MatrixXd dz_in(h, nc);
    VectorXd dhh = VectorXd::Zero(h);
    VectorXd dcc = VectorXd::Zero(h);
    for (int t = nc - 1; t >= 0; --t) {
      dhh += dz_c.col(t);
      VectorXd h_prev = (t > 0) ? enc.ctx_steps[t - 1].h : VectorXd(VectorXd::Zero(h));
      VectorXd c_prev = (t > 0) ? enc.ctx_steps[t - 1].c : VectorXd(VectorXd::Zero(h));
      dz_in.col(t) =
          lstm_step_backward(p.ctx_lstm, g.ctx_lstm, enc.ctx_steps[t], h_prev, c_prev, dhh, dcc);
    }
    MatrixXd dz_ctx_paths =
        enc.mask_ctx.size() ? MatrixXd((dz_in.array() * enc.mask_ctx.array()).matrix()) : dz_in;
    pack_backward(p, enc.ctxp, enc.ctxp.to_slots(dz_ctx_paths), g);
  }
  pack_backward(p, enc.cand, enc.cand.to_slots(dz_paths), g);
  return loss;
}

std::vector<int> predict_greedy(const ModelParams& p, const PreparedExample& ex) {
  const int h = p.cfg.hidden_dim;
  const int m = static_cast<int>(ex.candidates.size());
  Encoded enc;
  encode_example(p, ex, /*keep=*/false, nullptr, enc);

  std::vector<int> out;
  VectorXd hh = enc.h0;
  VectorXd cc = VectorXd::Zero(h);
  VectorXd x = p.dec_start.col(0);
  for (int t = 0; t < p.cfg.max_decode_len; ++t) {
    LstmStep st;
    lstm_step(p.dec_lstm, x, hh, cc, h, st);
    hh = st.h;
    cc = st.c;
    VectorXd ctx;
    if (enc.has_ctx) {
      VectorXd alpha = softmax_stable(enc.z_c.transpose() * (p.w_attn * st.h));
      ctx = enc.z_c * alpha;
    } else {
      ctx = st.h;
    }
    VectorXd logits = enc.z_op.transpose() * (p.w_point * ctx);
    Eigen::Index best = 0;
    logits.maxCoeff(&best);
    if (static_cast<int>(best) == m) break;
    out.push_back(static_cast<int>(best));
    x = enc.z_op.col(best);
  }
  return out;
}

double grad_check(const ModelParams& p, const PreparedExample& ex, double epsilon, int coords,
                  uint64_t seed) {
  ModelParams work = p;
  ModelParams analytic = p.zeros_like();
  forward_loss(work, ex, &analytic);

  std::vector<Eigen::MatrixXd*> wt, gt;
  work.visit([&](const char*, Eigen::MatrixXd& t) { wt.push_back(&t); });
  analytic.visit([&](const char*, Eigen::MatrixXd& t) { gt.push_back(&t); });
  size_t total = 0;
  for (auto* t : wt) total += static_cast<size_t>(t->size());

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, total - 1);
  double worst = 0.0;
  for (int k = 0; k < coords; ++k) {
    size_t flat = pick(rng);
    size_t ti = 0;
    while (flat >= static_cast<size_t>(wt[ti]->size())) {
      flat -= static_cast<size_t>(wt[ti]->size());
      ++ti;
    }
    double* slot = wt[ti]->data() + flat;
    const double orig = *slot;
    *slot = orig + epsilon;
    double lp = forward_loss(work, ex);
    *slot = orig - epsilon;
    double lm = forward_loss(work, ex);
    *slot = orig;
    double numeric = (lp - lm) / (2.0 * epsilon);
    double a = gt[ti]->data()[flat];
    // The denominator floor absorbs central-difference noise: with a loss
    // of order 1, the numeric derivative carries ~1e-11 of absolute error,
    // which would dominate the ratio on coordinates whose true gradient is
    // near zero. Real backward bugs surface on the many coordinates whose
    // gradients sit far above the floor.
    double rel = std::abs(a - numeric) / std::max(1e-4, std::abs(a) + std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace treedit::model
