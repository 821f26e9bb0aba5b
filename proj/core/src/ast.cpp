#include "treedit/ast.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <stdexcept>

namespace treedit::ast {

void Ast::check_alive(NodeId id, const char* what) const {
  if (!alive(id)) {
    throw std::out_of_range(std::string(what) + ": no live node with id " +
                            std::to_string(id));
  }
}

NodeId Ast::add_node(std::string kind, NodeId parent, bool terminal,
                     std::string value) {
  if (parent == kNoNode && root_ != kNoNode) {
    throw std::logic_error("add_node: tree already has a root");
  }
  if (parent != kNoNode) check_alive(parent, "add_node");
  NodeId id = static_cast<NodeId>(nodes_.size());
  AstNode n;
  n.id = id;
  n.kind = std::move(kind);
  n.terminal = terminal;
  n.value = std::move(value);
  n.parent = parent;
  nodes_.push_back(std::move(n));
  alive_.push_back(1);
  ++live_count_;
  if (parent == kNoNode) {
    root_ = id;
  } else {
    nodes_[parent].children.push_back(id);
  }
  return id;
}

NodeId Ast::graft(const Ast& src, NodeId src_root, NodeId parent,
                  size_t index) {
  src.check_alive(src_root, "graft");
  check_alive(parent, "graft");
  if (index > nodes_[parent].children.size()) {
    throw std::out_of_range("graft: child index out of range");
  }
  // Copy in pre-order so fresh ids come out in pre-order of the subtree.
  struct Item {
    NodeId from;
    NodeId to_parent;
  };
  std::vector<Item> stack{{src_root, kNoNode}};
  NodeId copy_root = kNoNode;
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const AstNode& s = src.node(it.from);
    NodeId id = static_cast<NodeId>(nodes_.size());
    AstNode n;
    n.id = id;
    n.kind = s.kind;
    n.terminal = s.terminal;
    n.value = s.value;
    n.parent = it.to_parent;
    nodes_.push_back(std::move(n));
    alive_.push_back(1);
    ++live_count_;
    if (it.to_parent == kNoNode) {
      copy_root = id;
    } else {
      nodes_[it.to_parent].children.push_back(id);
    }
    for (auto ch = s.children.rbegin(); ch != s.children.rend(); ++ch) {
      stack.push_back({*ch, id});
    }
  }
  nodes_[copy_root].parent = parent;
  auto& kids = nodes_[parent].children;
  kids.insert(kids.begin() + static_cast<ptrdiff_t>(index), copy_root);
  return copy_root;
}

const AstNode& Ast::node(NodeId id) const {
  check_alive(id, "node");
  return nodes_[id];
}

int Ast::child_index(NodeId id) const {
  check_alive(id, "child_index");
  NodeId p = nodes_[id].parent;
  if (p == kNoNode) return 0;
  const auto& kids = nodes_[p].children;
  auto it = std::find(kids.begin(), kids.end(), id);
  assert(it != kids.end());
  return static_cast<int>(it - kids.begin());
}

int Ast::depth(NodeId id) const {
  check_alive(id, "depth");
  int d = 0;
  for (NodeId cur = nodes_[id].parent; cur != kNoNode;
       cur = nodes_[cur].parent) {
    ++d;
  }
  return d;
}

std::vector<NodeId> Ast::preorder(NodeId id) const {
  std::vector<NodeId> out;
  if (id == kNoNode) return out;
  check_alive(id, "preorder");
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& kids = nodes_[cur].children;
    for (auto ch = kids.rbegin(); ch != kids.rend(); ++ch) stack.push_back(*ch);
  }
  return out;
}

std::vector<NodeId> Ast::postorder(NodeId id) const {
  std::vector<NodeId> out;
  if (id == kNoNode) return out;
  check_alive(id, "postorder");
  // Two-stack scheme: reverse of (pre-order with children visited
  // right-to-left) is post-order.
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    for (NodeId ch : nodes_[cur].children) stack.push_back(ch);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

size_t Ast::subtree_size(NodeId id) const { return preorder(id).size(); }

int Ast::height(NodeId id) const {
  check_alive(id, "height");
  const auto& kids = nodes_[id].children;
  int best = 0;
  for (NodeId ch : kids) best = std::max(best, height(ch));
  return best + 1;
}

bool Ast::is_ancestor(NodeId anc, NodeId desc) const {
  check_alive(anc, "is_ancestor");
  check_alive(desc, "is_ancestor");
  for (NodeId cur = desc; cur != kNoNode; cur = nodes_[cur].parent) {
    if (cur == anc) return true;
  }
  return false;
}

void Ast::set_value(NodeId id, std::string value) {
  check_alive(id, "set_value");
  if (!nodes_[id].terminal) {
    throw std::logic_error("set_value: node is not a terminal");
  }
  nodes_[id].value = std::move(value);
}

void Ast::detach(NodeId id) {
  check_alive(id, "detach");
  NodeId p = nodes_[id].parent;
  if (p == kNoNode) throw std::logic_error("detach: cannot detach the root");
  auto& kids = nodes_[p].children;
  kids.erase(std::remove(kids.begin(), kids.end(), id), kids.end());
  nodes_[id].parent = kNoNode;
}

void Ast::attach(NodeId id, NodeId parent, size_t index) {
  check_alive(id, "attach");
  check_alive(parent, "attach");
  if (nodes_[id].parent != kNoNode) {
    throw std::logic_error("attach: node is still attached");
  }
  if (is_ancestor(id, parent)) {
    throw std::logic_error("attach: parent lies inside the subtree");
  }
  auto& kids = nodes_[parent].children;
  if (index > kids.size()) {
    throw std::out_of_range("attach: child index out of range");
  }
  kids.insert(kids.begin() + static_cast<ptrdiff_t>(index), id);
  nodes_[id].parent = parent;
}

void Ast::erase(NodeId id) {
  check_alive(id, "erase");
  if (nodes_[id].parent != kNoNode) detach(id);
  for (NodeId n : preorder(id)) {
    alive_[n] = 0;
    --live_count_;
  }
  if (id == root_) root_ = kNoNode;
}

Ast Ast::with_preorder_ids() const {
  Ast out;
  if (root_ == kNoNode) return out;
  struct Item {
    NodeId from;
    NodeId to_parent;
  };
  std::vector<Item> stack{{root_, kNoNode}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const AstNode& s = nodes_[it.from];
    NodeId id = out.add_node(s.kind, it.to_parent, s.terminal, s.value);
    for (auto ch = s.children.rbegin(); ch != s.children.rend(); ++ch) {
      stack.push_back({*ch, id});
    }
  }
  return out;
}

bool operator==(const Ast& a, const Ast& b) {
  if (a.live_count_ != b.live_count_) return false;
  if ((a.root_ == kNoNode) != (b.root_ == kNoNode)) return false;
  if (a.root_ == kNoNode) return true;
  auto pa = a.preorder();
  auto pb = b.preorder();
  if (pa.size() != pb.size()) return false;
  for (size_t i = 0; i < pa.size(); ++i) {
    const AstNode& na = a.nodes_[pa[i]];
    const AstNode& nb = b.nodes_[pb[i]];
    if (na.id != nb.id || na.kind != nb.kind || na.terminal != nb.terminal ||
        na.value != nb.value || na.children.size() != nb.children.size()) {
      return false;
    }
  }
  return true;
}

bool isomorphic(const Ast& a, NodeId ra, const Ast& b, NodeId rb) {
  const AstNode& na = a.node(ra);
  const AstNode& nb = b.node(rb);
  if (na.kind != nb.kind || na.terminal != nb.terminal ||
      na.value != nb.value || na.children.size() != nb.children.size()) {
    return false;
  }
  for (size_t i = 0; i < na.children.size(); ++i) {
    if (!isomorphic(a, na.children[i], b, nb.children[i])) return false;
  }
  return true;
}

bool isomorphic(const Ast& a, const Ast& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return isomorphic(a, a.root(), b, b.root());
}

AstPath path_between(const Ast& tree, NodeId from, NodeId to) {
  if (from == to) return {from};
  int df = tree.depth(from);
  int dt = tree.depth(to);
  std::vector<NodeId> up;    // from -> ... -> lca
  std::vector<NodeId> down;  // to -> ... -> just below lca, reversed later
  NodeId x = from;
  NodeId y = to;
  while (df > dt) {
    up.push_back(x);
    x = tree.node(x).parent;
    --df;
  }
  while (dt > df) {
    down.push_back(y);
    y = tree.node(y).parent;
    --dt;
  }
  while (x != y) {
    up.push_back(x);
    down.push_back(y);
    x = tree.node(x).parent;
    y = tree.node(y).parent;
  }
  up.push_back(x);  // the lca
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

bool is_valid_path(const Ast& tree, const AstPath& path) {
  if (path.empty()) return false;
  std::unordered_set<NodeId> seen;
  for (NodeId id : path) {
    if (!tree.alive(id) || !seen.insert(id).second) return false;
  }
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    NodeId a = path[i];
    NodeId b = path[i + 1];
    if (tree.node(a).parent != b && tree.node(b).parent != a) return false;
  }
  return true;
}

bool GrammarVocab::contains(const std::string& kind) const {
  return std::find(symbols.begin(), symbols.end(), kind) != symbols.end();
}

std::vector<std::string> split_subtokens(const std::string& word) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  auto lower = [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  };
  size_t n = word.size();
  for (size_t i = 0; i < n; ++i) {
    unsigned char c = word[i];
    if (c == '_') {
      flush();
      continue;
    }
    bool boundary = false;
    if (!cur.empty() && i > 0) {
      unsigned char prev = word[i - 1];
      if (std::islower(prev) && std::isupper(c)) boundary = true;
      if (std::isdigit(prev) != std::isdigit(c) &&
          (std::isalnum(prev) && std::isalnum(c))) {
        boundary = true;
      }
      // End of an acronym run: "HTTPResponse" splits before "Response".
      if (std::isupper(prev) && std::isupper(c) && i + 1 < n &&
          std::islower(static_cast<unsigned char>(word[i + 1]))) {
        boundary = true;
      }
    }
    if (boundary) flush();
    if (std::isalnum(c)) {
      cur.push_back(lower(c));
    } else {
      flush();  // other punctuation separates like an underscore
    }
  }
  flush();
  return out;
}

}  // namespace treedit::ast
