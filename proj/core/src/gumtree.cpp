#include "treedit/gumtree.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace treedit::diff {

namespace {

uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

uint64_t hash_str(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Structural hash of every subtree, indexed by node id.
std::unordered_map<NodeId, uint64_t> subtree_hashes(const Ast& t) {
  std::unordered_map<NodeId, uint64_t> out;
  for (NodeId id : t.postorder()) {
    const auto& n = t.node(id);
    uint64_t h = mix(hash_str(n.kind), n.terminal ? 0x74ULL : 0x6eULL);
    if (n.terminal) h = mix(h, hash_str(n.value));
    for (NodeId ch : n.children) h = mix(h, out.at(ch));
    out.emplace(id, h);
  }
  return out;
}

bool same_label(const Ast& a, NodeId x, const Ast& b, NodeId y) {
  const auto& na = a.node(x);
  const auto& nb = b.node(y);
  return na.kind == nb.kind && na.terminal == nb.terminal;
}

}  // namespace

void Mapping::add(NodeId a, NodeId b) {
  assert(a2b_.count(a) == 0 && b2a_.count(b) == 0);
  a2b_.emplace(a, b);
  b2a_.emplace(b, a);
}

void Mapping::remove_a(NodeId a) {
  auto it = a2b_.find(a);
  if (it == a2b_.end()) return;
  b2a_.erase(it->second);
  a2b_.erase(it);
}

Mapping anchors_topdown(const Ast& a, const Ast& b) {
  Mapping m;
  if (a.empty() || b.empty()) return m;
  auto ha = subtree_hashes(a);
  auto hb = subtree_hashes(b);

  // Pre-order ranks for deterministic tie-breaking.
  std::unordered_map<NodeId, int> rank_a, rank_b;
  {
    int i = 0;
    for (NodeId id : a.preorder()) rank_a[id] = i++;
    i = 0;
    for (NodeId id : b.preorder()) rank_b[id] = i++;
  }

  std::unordered_set<NodeId> covered_a, covered_b;

  // Nodes of each height, tallest first. Heights of all nodes at once.
  std::map<int, std::vector<NodeId>, std::greater<int>> by_height_a,
      by_height_b;
  for (NodeId id : a.preorder()) by_height_a[a.height(id)].push_back(id);
  for (NodeId id : b.preorder()) by_height_b[b.height(id)].push_back(id);

  for (auto& [h, list_a] : by_height_a) {
    auto itb = by_height_b.find(h);
    if (itb == by_height_b.end()) continue;

    // Bucket uncovered subtrees by structural hash.
    std::unordered_map<uint64_t, std::vector<NodeId>> buckets_a, buckets_b;
    for (NodeId id : list_a) {
      if (!covered_a.count(id)) buckets_a[ha.at(id)].push_back(id);
    }
    for (NodeId id : itb->second) {
      if (!covered_b.count(id)) buckets_b[hb.at(id)].push_back(id);
    }

    // Deterministic bucket order: by the first a-side pre-order rank.
    std::vector<uint64_t> keys;
    for (auto& [key, v] : buckets_a) {
      if (buckets_b.count(key)) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end(), [&](uint64_t x, uint64_t y) {
      return rank_a.at(buckets_a.at(x).front()) <
             rank_a.at(buckets_a.at(y).front());
    });

    for (uint64_t key : keys) {
      auto& va = buckets_a.at(key);
      auto& vb = buckets_b.at(key);
      std::sort(va.begin(), va.end(),
                [&](NodeId x, NodeId y) { return rank_a.at(x) < rank_a.at(y); });
      std::sort(vb.begin(), vb.end(),
                [&](NodeId x, NodeId y) { return rank_b.at(x) < rank_b.at(y); });

      // The roots may only pair with each other; drop mixed pairings by
      // pulling roots to the front of both lists or removing them.
      auto root_a = std::find(va.begin(), va.end(), a.root());
      auto root_b = std::find(vb.begin(), vb.end(), b.root());
      std::vector<std::pair<NodeId, NodeId>> pairs;
      if (root_a != va.end() && root_b != vb.end()) {
        pairs.emplace_back(a.root(), b.root());
      }
      std::vector<NodeId> rest_a, rest_b;
      for (NodeId id : va) {
        if (id != a.root()) rest_a.push_back(id);
      }
      for (NodeId id : vb) {
        if (id != b.root()) rest_b.push_back(id);
      }
      size_t k = std::min(rest_a.size(), rest_b.size());
      for (size_t i = 0; i < k; ++i) pairs.emplace_back(rest_a[i], rest_b[i]);

      for (auto [x, y] : pairs) {
        if (!isomorphic(a, x, b, y)) continue;  // hash collision guard
        auto pa = a.preorder(x);
        auto pb = b.preorder(y);
        for (size_t i = 0; i < pa.size(); ++i) {
          m.add(pa[i], pb[i]);
          covered_a.insert(pa[i]);
          covered_b.insert(pb[i]);
        }
      }
    }
  }
  return m;
}

Mapping containers_bottomup(const Ast& a, const Ast& b, Mapping anchors) {
  Mapping m = std::move(anchors);
  if (a.empty() || b.empty()) return m;

  std::unordered_map<NodeId, int> rank_b;
  {
    int i = 0;
    for (NodeId id : b.preorder()) rank_b[id] = i++;
  }

  for (NodeId n1 : a.postorder()) {
    if (m.has_a(n1) || a.node(n1).terminal) continue;
    if (n1 == a.root()) continue;  // roots couple below

    auto desc1 = a.preorder(n1);
    // Strict descendants only.
    std::vector<NodeId> mapped_desc;
    for (size_t i = 1; i < desc1.size(); ++i) {
      if (m.has_a(desc1[i])) mapped_desc.push_back(desc1[i]);
    }
    if (mapped_desc.empty()) continue;
    size_t desc1_count = desc1.size() - 1;

    // Candidate containers: unmapped same-label ancestors of the partners.
    std::vector<NodeId> candidates;
    std::unordered_set<NodeId> seen;
    for (NodeId d : mapped_desc) {
      for (NodeId anc = b.node(m.from_a(d)).parent; anc != ast::kNoNode;
           anc = b.node(anc).parent) {
        if (!seen.insert(anc).second) break;  // ancestors above already seen
        if (anc == b.root()) continue;
        if (!m.has_b(anc) && same_label(a, n1, b, anc)) {
          candidates.push_back(anc);
        }
      }
    }

    NodeId best = ast::kNoNode;
    double best_sim = 0.0;
    for (NodeId n2 : candidates) {
      auto desc2 = b.preorder(n2);
      std::unordered_set<NodeId> in2(desc2.begin() + 1, desc2.end());
      size_t shared = 0;
      for (NodeId d : mapped_desc) {
        if (in2.count(m.from_a(d))) ++shared;
      }
      double sim = static_cast<double>(shared) /
                   static_cast<double>(std::max(desc1_count, desc2.size() - 1));
      if (sim > best_sim ||
          (sim == best_sim && best != ast::kNoNode &&
           rank_b.at(n2) < rank_b.at(best))) {
        best_sim = sim;
        best = n2;
      }
    }
    if (best != ast::kNoNode && best_sim >= 0.5) m.add(n1, best);
  }

  if (!m.has_a(a.root()) && !m.has_b(b.root()) &&
      same_label(a, a.root(), b, b.root())) {
    m.add(a.root(), b.root());
  }
  return m;
}

Mapping recover_descendants(const Ast& a, const Ast& b, Mapping m) {
  if (a.empty() || b.empty()) return m;
  auto ha = subtree_hashes(a);
  auto hb = subtree_hashes(b);

  // Innermost containers first: post-order over a.
  for (NodeId n1 : a.postorder()) {
    if (!m.has_a(n1) || a.node(n1).terminal) continue;
    NodeId n2 = m.from_a(n1);

    auto desc1 = a.preorder(n1);
    auto desc2 = b.preorder(n2);
    std::vector<NodeId> free1, free2;
    for (size_t i = 1; i < desc1.size(); ++i) {
      if (!m.has_a(desc1[i])) free1.push_back(desc1[i]);
    }
    for (size_t i = 1; i < desc2.size(); ++i) {
      if (!m.has_b(desc2[i])) free2.push_back(desc2[i]);
    }
    if (free1.empty() || free2.empty()) continue;

    // Group by (kind, terminal); within a group, first pair identical
    // subtrees by position, then the rest by position. Any same-label
    // pairing is admissible, so per-group min-count is a maximum matching.
    std::map<std::pair<std::string, bool>, std::pair<std::vector<NodeId>,
                                                     std::vector<NodeId>>>
        groups;
    for (NodeId d : free1) {
      groups[{a.node(d).kind, a.node(d).terminal}].first.push_back(d);
    }
    for (NodeId d : free2) {
      groups[{b.node(d).kind, b.node(d).terminal}].second.push_back(d);
    }
    for (auto& [label, fr] : groups) {
      auto& [f1, f2] = fr;
      std::vector<char> used1(f1.size(), 0), used2(f2.size(), 0);
      // Identical-subtree pass.
      for (size_t i = 0; i < f1.size(); ++i) {
        for (size_t j = 0; j < f2.size(); ++j) {
          if (used2[j] || ha.at(f1[i]) != hb.at(f2[j])) continue;
          if (!isomorphic(a, f1[i], b, f2[j])) continue;
          m.add(f1[i], f2[j]);
          used1[i] = used2[j] = 1;
          break;
        }
      }
      // Positional pass for the remainder.
      size_t j = 0;
      for (size_t i = 0; i < f1.size(); ++i) {
        if (used1[i]) continue;
        while (j < f2.size() && used2[j]) ++j;
        if (j == f2.size()) break;
        m.add(f1[i], f2[j]);
        used1[i] = used2[j] = 1;
      }
    }
  }
  return m;
}

// ====== script generation ======

EditScript generate_script(const Ast& a, const Ast& b, const Mapping& m) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("generate_script: empty tree");
  }
  if (!m.has_a(a.root()) || m.from_a(a.root()) != b.root()) {
    throw std::invalid_argument(
        "generate_script: mapping must pair the two roots");
  }

  EditScript script;
  Ast w = a;  // working tree, mutated alongside the emitted ops

  // Live correspondence between w and b, shrinking as inserts displace
  // mapped originals.
  std::unordered_map<NodeId, NodeId> w2b, b2w;
  for (auto [x, y] : m.a_to_b()) {
    w2b.emplace(x, y);
    b2w.emplace(y, x);
  }

  // Value updates first, in pre-order of a.
  for (NodeId x : a.preorder()) {
    auto it = w2b.find(x);
    if (it == w2b.end()) continue;
    const auto& nx = a.node(x);
    const auto& ny = b.node(it->second);
    if (nx.terminal && ny.terminal && nx.value != ny.value) {
      script.push_back(EditOp::upd(ny.value, x));
      w.set_value(x, ny.value);
    }
  }

  // Structure pass: realize b's shape top-down.
  std::unordered_set<NodeId> covered;   // b-nodes supplied by an INS copy
  std::unordered_set<NodeId> inserted;  // w-nodes created by INS
  std::unordered_map<NodeId, NodeId> last_placed;  // b-parent -> w child

  std::deque<NodeId> queue{b.root()};
  while (!queue.empty()) {
    NodeId y = queue.front();
    queue.pop_front();
    if (covered.count(y)) continue;
    for (NodeId ch : b.node(y).children) queue.push_back(ch);
    if (y == b.root()) continue;

    NodeId py = b.node(y).parent;
    NodeId pw = b2w.at(py);
    auto placed_it = last_placed.find(py);
    NodeId prev = placed_it == last_placed.end() ? ast::kNoNode
                                                 : placed_it->second;
    size_t desired =
        prev == ast::kNoNode ? 0 : static_cast<size_t>(w.child_index(prev)) + 1;
    Gap gap = prev == ast::kNoNode ? Gap::first(pw) : Gap::after(prev);

    auto it = b2w.find(y);
    if (it != b2w.end()) {
      NodeId x = it->second;
      if (w.node(x).parent != pw ||
          static_cast<size_t>(w.child_index(x)) != desired) {
        script.push_back(EditOp::mov(x, gap));
        w.detach(x);
        size_t index =
            prev == ast::kNoNode ? 0
                                 : static_cast<size_t>(w.child_index(prev)) + 1;
        w.attach(x, pw, index);
      }
      last_placed[py] = x;
    } else {
      // Copy the whole b-subtree; originals mapped under it become garbage.
      Ast content;
      {
        Ast tmp;
        struct Item {
          NodeId from;
          NodeId to_parent;
        };
        std::vector<Item> stack{{y, ast::kNoNode}};
        while (!stack.empty()) {
          Item itx = stack.back();
          stack.pop_back();
          const auto& s = b.node(itx.from);
          NodeId nid = tmp.add_node(s.kind, itx.to_parent, s.terminal, s.value);
          for (auto ch = s.children.rbegin(); ch != s.children.rend(); ++ch) {
            stack.push_back({*ch, nid});
          }
        }
        content = std::move(tmp);
      }
      script.push_back(EditOp::ins(content, gap));
      NodeId wid = w.graft(content, content.root(), pw, desired);
      for (NodeId wn : w.preorder(wid)) inserted.insert(wn);
      for (NodeId z : b.preorder(y)) {
        covered.insert(z);
        auto zit = b2w.find(z);
        if (zit != b2w.end()) {
          w2b.erase(zit->second);
          b2w.erase(zit);
        }
      }
      last_placed[py] = wid;
    }
  }

  // Whatever is neither mapped nor freshly inserted is garbage; delete
  // maximal garbage subtrees bottom-up.
  std::vector<NodeId> doomed;
  for (NodeId x : w.postorder()) {
    if (w2b.count(x) || inserted.count(x)) continue;
    NodeId p = w.node(x).parent;
    bool parent_doomed =
        p != ast::kNoNode && !w2b.count(p) && !inserted.count(p);
    if (!parent_doomed) doomed.push_back(x);
  }
  for (NodeId x : doomed) {
    script.push_back(EditOp::del(x));
    w.erase(x);
  }

  assert(isomorphic(w, b));
  return script;
}

EditScript diff(const Ast& a, const Ast& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("diff: empty tree");
  }
  if (!same_label(a, a.root(), b, b.root())) {
    throw std::invalid_argument(
        "diff: root kinds differ; no edit script can change the root");
  }
  Mapping m = anchors_topdown(a, b);
  m = containers_bottomup(a, b, std::move(m));
  m = recover_descendants(a, b, std::move(m));
  return generate_script(a, b, m);
}

}  // namespace treedit::diff
