#include "treedit/path_ops.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

namespace treedit::paths {

using diff::EditOp;
using diff::EditScript;
using diff::Gap;
using diff::OpKind;

const char* path_op_name(PathOpKind k) {
  switch (k) {
    case PathOpKind::Mov: return "MOV";
    case PathOpKind::Upd: return "UPD";
    case PathOpKind::Ins: return "INS";
  }
  return "?";
}

namespace {

[[noreturn]] void unrepresentable(const std::string& why) {
  throw UnrepresentableError("not representable: " + why);
}

/// Compares a subtree of the augmented tree to plain content, skipping
/// Placeholder children on the augmented side.
bool plain_isomorphic(const Ast& at, NodeId an, const Ast& pt, NodeId pn) {
  const auto& a = at.node(an);
  const auto& p = pt.node(pn);
  if (a.kind != p.kind || a.terminal != p.terminal || a.value != p.value) {
    return false;
  }
  std::vector<NodeId> akids;
  for (NodeId c : a.children) {
    if (at.node(c).kind != kPlaceholderKind) akids.push_back(c);
  }
  if (akids.size() != p.children.size()) return false;
  for (size_t i = 0; i < akids.size(); ++i) {
    if (!plain_isomorphic(at, akids[i], pt, p.children[i])) return false;
  }
  return true;
}

/// Resolves a script gap to the augmented node that acts as the path
/// target: the left-sibling anchor itself, or the parent's Placeholder.
/// Liveness is checked against `w`, the tree as it stands when the op
/// will be applied.
NodeId gap_target(const AugmentedAst& aug, const Ast& w, const Gap& gap) {
  if (!gap.leftmost) {
    if (!aug.is_original(gap.anchor) || !w.alive(gap.anchor)) {
      unrepresentable("gap anchor " + std::to_string(gap.anchor) +
                      " is not an original node");
    }
    return gap.anchor;
  }
  auto it = aug.placeholder_of.find(gap.anchor);
  if (it == aug.placeholder_of.end() || !w.alive(it->second)) {
    unrepresentable("gap parent " + std::to_string(gap.anchor) +
                    " has no placeholder");
  }
  return it->second;
}

NodeId original_node(const AugmentedAst& aug, const Ast& w, NodeId id,
                     const char* what) {
  if (!aug.is_original(id) || !w.alive(id)) {
    unrepresentable(std::string(what) + " " + std::to_string(id) +
                    " is not an original node");
  }
  return id;
}

PathOperation make_op(const AugmentedAst& aug, PathOpKind kind, NodeId src,
                      NodeId tgt) {
  PathOperation op;
  op.kind = kind;
  op.path = ast::path_between(aug.tree, src, tgt);
  return op;
}

Ast copy_subtree(const Ast& t, NodeId root) {
  Ast out;
  struct Item {
    NodeId from;
    NodeId to_parent;
  };
  std::vector<Item> stack{{root, ast::kNoNode}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const auto& s = t.node(it.from);
    NodeId nid = out.add_node(s.kind, it.to_parent, s.terminal, s.value);
    for (auto ch = s.children.rbegin(); ch != s.children.rend(); ++ch) {
      stack.push_back({*ch, nid});
    }
  }
  return out;
}


/// Applies one path operation to `t`, a working copy of aug.tree that
/// earlier operations may already have edited. Shared by application
/// and by the conversion's replay so both see identical state.
void apply_one(const AugmentedAst& aug, Ast& t, const PathOperation& op) {
  auto special = [&](NodeId id) {
    return id == aug.del_node || id == aug.upd_node || id == aug.ins_node;
  };
  auto in_upd_zone = [&](NodeId id) {
    return t.alive(aug.upd_node) && t.is_ancestor(aug.upd_node, id);
  };
  auto in_ins_zone = [&](NodeId id) {
    return t.alive(aug.ins_node) && t.is_ancestor(aug.ins_node, id);
  };
  auto check_endpoint = [&](NodeId id, const char* what) {
    if (!t.alive(id)) {
      throw ApplyError(std::string(what) + ": endpoint " + std::to_string(id) +
                       " is no longer in the tree");
    }
  };
  // Validates a landing target and returns its parent.
  auto landing_parent = [&](NodeId tgt, const char* what) -> NodeId {
    const auto& n = t.node(tgt);
    if (n.parent == ast::kNoNode) {
      throw ApplyError(std::string(what) + ": the root cannot be a target");
    }
    if (special(tgt) || in_upd_zone(tgt) || in_ins_zone(tgt)) {
      throw ApplyError(std::string(what) + ": target " + std::to_string(tgt) +
                       " lies in the synthetic zone");
    }
    return n.parent;
  };

  if (op.path.empty()) throw ApplyError("empty path");
  NodeId src = op.source();
  NodeId tgt = op.target();
  switch (op.kind) {
    case PathOpKind::Mov: {
      check_endpoint(src, "MOV");
      check_endpoint(tgt, "MOV");
      if (src == t.root()) throw ApplyError("MOV: cannot move the root");
      if (t.node(src).kind == kPlaceholderKind || special(src) ||
          in_upd_zone(src) || in_ins_zone(src)) {
        throw ApplyError("MOV: source is a synthetic node");
      }
      if (tgt == aug.del_node) {
        t.erase(src);
        break;
      }
      if (t.is_ancestor(src, tgt)) {
        throw ApplyError("MOV: target lies inside the moved subtree");
      }
      NodeId parent = landing_parent(tgt, "MOV");
      t.detach(src);
      t.attach(src, parent, static_cast<size_t>(t.child_index(tgt)) + 1);
      break;
    }
    case PathOpKind::Upd: {
      check_endpoint(src, "UPD");
      check_endpoint(tgt, "UPD");
      if (!t.node(src).terminal || !t.node(tgt).terminal) {
        throw ApplyError("UPD: endpoints must be terminals");
      }
      if (special(tgt) || in_upd_zone(tgt) || in_ins_zone(tgt)) {
        throw ApplyError("UPD: target is a synthetic node");
      }
      t.set_value(tgt, t.node(src).value);
      break;
    }
    case PathOpKind::Ins: {
      check_endpoint(src, "INS");
      check_endpoint(tgt, "INS");
      if (tgt == aug.del_node) {
        throw ApplyError("INS: DEL is not a valid target");
      }
      if (special(src) || t.node(src).kind == kPlaceholderKind ||
          in_upd_zone(src)) {
        throw ApplyError("INS: source cannot provide a subtree");
      }
      NodeId parent = landing_parent(tgt, "INS");
      Ast snapshot = copy_subtree(t, src);
      t.graft(snapshot, snapshot.root(), parent,
              static_cast<size_t>(t.child_index(tgt)) + 1);
      break;
    }
  }
}

}  // namespace

std::vector<PathOperation> script_to_path_ops(const AugmentedAst& aug,
                                              const EditScript& script,
                                              EncodeMode mode) {
  std::vector<PathOperation> out;
  out.reserve(script.size());
  const Ast& t0 = aug.tree;  // paths and candidate identity live here
  Ast w = aug.tree;          // evolves as converted ops are replayed
  size_t ins_seen = 0;

  // Carriers sit in the synthetic zone, which no operation can edit, so
  // they can be read from the initial tree throughout.
  auto upd_carrier = [&](const std::string& value) -> NodeId {
    for (NodeId c : t0.node(aug.upd_node).children) {
      if (t0.node(c).value == value) return c;
    }
    return ast::kNoNode;
  };

  for (const EditOp& op : script) {
    PathOperation pop;
    switch (op.kind) {
      case OpKind::Mov: {
        NodeId src = original_node(aug, w, op.src, "moved node");
        pop = make_op(aug, PathOpKind::Mov, src, gap_target(aug, w, op.gap));
        break;
      }
      case OpKind::Del: {
        NodeId src = original_node(aug, w, op.src, "deleted node");
        pop = make_op(aug, PathOpKind::Mov, src, aug.del_node);
        break;
      }
      case OpKind::Upd: {
        NodeId tgt = original_node(aug, w, op.tgt, "updated node");
        // The source must hold the replacement value when this op runs,
        // not merely in the initial tree: an earlier UPD may have
        // rewritten it. `w` is exactly that state.
        NodeId src = ast::kNoNode;
        if (mode == EncodeMode::Context) {
          src = upd_carrier(op.value);
        } else {
          for (NodeId id : t0.preorder()) {
            if (!aug.is_original(id) || !w.alive(id)) continue;
            if (w.node(id).terminal && w.node(id).value == op.value &&
                id != tgt) {
              src = id;
              break;
            }
          }
          if (src == ast::kNoNode) src = upd_carrier(op.value);
        }
        if (src == ast::kNoNode) {
          unrepresentable("no node carries the value " + op.value);
        }
        pop = make_op(aug, PathOpKind::Upd, src, tgt);
        break;
      }
      case OpKind::Ins: {
        ++ins_seen;
        if (mode == EncodeMode::Context) {
          const auto& kids = t0.node(aug.ins_node).children;
          if (ins_seen > kids.size()) unrepresentable("INS carrier missing");
          pop = make_op(aug, PathOpKind::Ins, aug.ins_node,
                        kids[ins_seen - 1]);
          break;
        }
        NodeId tgt = gap_target(aug, w, op.gap);
        // Prefer an original subtree matching the inserted content as it
        // stands when this op runs (the snapshot is taken then). Sources
        // containing the landing site are skipped because enumeration
        // skips them too; the INS carriers are the fallback.
        NodeId src = ast::kNoNode;
        for (NodeId id : t0.preorder()) {
          if (!aug.is_original(id) || !w.alive(id)) continue;
          if (t0.is_ancestor(id, tgt)) continue;
          if (plain_isomorphic(w, id, op.subtree, op.subtree.root())) {
            src = id;
            break;
          }
        }
        if (src == ast::kNoNode) {
          for (NodeId c : t0.node(aug.ins_node).children) {
            if (plain_isomorphic(t0, c, op.subtree, op.subtree.root())) {
              src = c;
              break;
            }
          }
        }
        if (src == ast::kNoNode) {
          unrepresentable("inserted subtree appears nowhere in the tree");
        }
        pop = make_op(aug, PathOpKind::Ins, src, tgt);
        break;
      }
    }
    out.push_back(pop);
    if (mode == EncodeMode::Target) {
      try {
        apply_one(aug, w, out.back());
      } catch (const ApplyError& e) {
        unrepresentable(std::string("operation cannot replay: ") + e.what());
      }
    }
  }
  return out;
}

// ====== application ======

Ast apply_path_ops(const AugmentedAst& aug,
                   const std::vector<PathOperation>& ops) {
  Ast t = aug.tree;
  for (const PathOperation& op : ops) apply_one(aug, t, op);
  return strip(aug, t);
}

// ====== candidates ======

CandidateSet enumerate_candidates(const AugmentedAst& aug) {
  const Ast& t = aug.tree;
  std::unordered_map<NodeId, int> rank;
  {
    int i = 0;
    for (NodeId id : t.preorder()) rank[id] = i++;
  }

  std::vector<NodeId> originals;
  std::vector<NodeId> original_terminals;
  for (NodeId id : t.preorder()) {
    if (aug.is_original(id)) {
      originals.push_back(id);
      if (t.node(id).terminal) original_terminals.push_back(id);
    }
  }

  // Targets for MOV: original non-root nodes, placeholders, and DEL.
  std::vector<NodeId> mov_targets;
  for (NodeId id : t.preorder()) {
    if ((aug.is_original(id) && id != t.root()) || aug.is_placeholder(id) ||
        id == aug.del_node) {
      mov_targets.push_back(id);
    }
  }

  struct Triple {
    PathOpKind kind;
    NodeId src, tgt;
  };
  std::vector<Triple> triples;

  for (NodeId src : originals) {
    if (src == t.root()) continue;
    for (NodeId tgt : mov_targets) {
      if (t.is_ancestor(src, tgt)) continue;
      triples.push_back({PathOpKind::Mov, src, tgt});
    }
  }

  std::vector<NodeId> upd_sources = original_terminals;
  for (NodeId c : t.node(aug.upd_node).children) upd_sources.push_back(c);
  for (NodeId src : upd_sources) {
    for (NodeId tgt : original_terminals) {
      if (t.node(src).value == t.node(tgt).value) continue;
      triples.push_back({PathOpKind::Upd, src, tgt});
    }
  }

  std::vector<NodeId> ins_sources = originals;
  for (NodeId c : t.node(aug.ins_node).children) ins_sources.push_back(c);
  for (NodeId src : ins_sources) {
    for (NodeId tgt : mov_targets) {
      if (tgt == aug.del_node) continue;
      if (t.is_ancestor(src, tgt)) continue;
      triples.push_back({PathOpKind::Ins, src, tgt});
    }
  }

  auto kind_rank = [](PathOpKind k) {
    switch (k) {
      case PathOpKind::Mov: return 0;
      case PathOpKind::Upd: return 1;
      case PathOpKind::Ins: return 2;
    }
    return 3;
  };
  std::sort(triples.begin(), triples.end(),
            [&](const Triple& x, const Triple& y) {
              if (rank.at(x.src) != rank.at(y.src)) {
                return rank.at(x.src) < rank.at(y.src);
              }
              if (rank.at(x.tgt) != rank.at(y.tgt)) {
                return rank.at(x.tgt) < rank.at(y.tgt);
              }
              return kind_rank(x.kind) < kind_rank(y.kind);
            });

  CandidateSet set;
  set.ops.reserve(triples.size());
  for (const Triple& tr : triples) {
    set.ops.push_back(make_op(aug, tr.kind, tr.src, tr.tgt));
  }
  return set;
}

int CandidateSet::index_of(const PathOperation& op) const {
  for (size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind == op.kind && ops[i].source() == op.source() &&
        ops[i].target() == op.target()) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

// ====== text form ======

std::string path_op_to_string(const AugmentedAst& aug,
                              const PathOperation& op) {
  std::string out = path_op_name(op.kind);
  out.push_back(' ');
  bool first = true;
  for (NodeId id : op.path) {
    if (!first) out += " -> ";
    first = false;
    out += aug.tree.node(id).kind;
    out.push_back('[');
    out += std::to_string(aug.tree.child_index(id));
    out.push_back(']');
  }
  out += " # ";
  out += std::to_string(op.source());
  out += " -> ";
  out += std::to_string(op.target());
  return out;
}

PathOperation parse_path_op(const AugmentedAst& aug, const std::string& line) {
  auto bad = [&](const std::string& why) -> ParseError {
    return ParseError("path op: " + why, 1, 1);
  };
  size_t sp = line.find(' ');
  if (sp == std::string::npos) throw bad("missing op kind");
  std::string kind_str = line.substr(0, sp);
  PathOpKind kind;
  if (kind_str == "MOV") {
    kind = PathOpKind::Mov;
  } else if (kind_str == "UPD") {
    kind = PathOpKind::Upd;
  } else if (kind_str == "INS") {
    kind = PathOpKind::Ins;
  } else {
    throw bad("unknown kind '" + kind_str + "'");
  }
  size_t hash = line.rfind('#');
  if (hash == std::string::npos) throw bad("missing '#' endpoint suffix");
  std::string suffix = line.substr(hash + 1);
  size_t arrow = suffix.find("->");
  if (arrow == std::string::npos) throw bad("missing '->' in suffix");
  auto to_id = [&](std::string s) -> NodeId {
    size_t b = s.find_first_not_of(' ');
    if (b == std::string::npos) throw bad("missing endpoint id");
    size_t e = s.find_last_not_of(' ');
    s = s.substr(b, e - b + 1);
    NodeId v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw bad("bad endpoint id '" + s + "'");
    }
    return v;
  };
  NodeId src = to_id(suffix.substr(0, arrow));
  NodeId tgt = to_id(suffix.substr(arrow + 2));
  if (!aug.tree.alive(src) || !aug.tree.alive(tgt)) {
    throw bad("endpoint id not in the augmented tree");
  }
  return make_op(aug, kind, src, tgt);
}

}  // namespace treedit::paths
