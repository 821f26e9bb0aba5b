#pragma once

/**
 * Ordered labeled trees with stable node ids.
 *
 * Every node carries a kind symbol; terminals additionally carry a string
 * value and never have children. Ids are assigned in pre-order when a tree
 * is built by a parser and stay attached to their node across edits, so a
 * script can keep referring to a node after it has been moved. Deleting a
 * subtree retires its ids; freshly inserted nodes receive ids above every
 * id ever used in the tree.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace treedit::ast {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

struct AstNode {
  NodeId id = kNoNode;
  std::string kind;
  bool terminal = false;
  std::string value;  // meaningful only for terminals
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
};

/// A path is the unique simple node sequence between two nodes; consecutive
/// entries are parent/child in one direction or the other.
using AstPath = std::vector<NodeId>;

class Ast {
public:
  Ast() = default;

  // ====== construction ======

  /// Adds a node. parent == kNoNode makes it the root (allowed once).
  /// Children are appended in call order. Returns the new id.
  NodeId add_node(std::string kind, NodeId parent, bool terminal = false,
                  std::string value = {});

  /// Copies the subtree of `src_root` in `src` into this tree under
  /// `parent` at child position `index`. Fresh ids are assigned in
  /// pre-order of the copied subtree. Returns the id of the copy's root.
  NodeId graft(const Ast& src, NodeId src_root, NodeId parent, size_t index);

  // ====== access ======

  bool alive(NodeId id) const {
    return id >= 0 && id < static_cast<NodeId>(nodes_.size()) && alive_[id];
  }
  const AstNode& node(NodeId id) const;
  NodeId root() const { return root_; }
  bool empty() const { return root_ == kNoNode; }

  /// Number of live nodes.
  size_t size() const { return live_count_; }

  /// Position of `id` in its parent's child list; 0 for the root.
  int child_index(NodeId id) const;

  int depth(NodeId id) const;

  /// Live node ids of the subtree rooted at `id`, in pre-order.
  std::vector<NodeId> preorder(NodeId id) const;
  std::vector<NodeId> preorder() const { return preorder(root_); }

  std::vector<NodeId> postorder(NodeId id) const;
  std::vector<NodeId> postorder() const { return postorder(root_); }

  size_t subtree_size(NodeId id) const;

  /// Height of the subtree at `id`: 1 for a leaf.
  int height(NodeId id) const;

  bool is_ancestor(NodeId anc, NodeId desc) const;

  /// Next id that add_node/graft would hand out.
  NodeId next_id() const { return static_cast<NodeId>(nodes_.size()); }

  // ====== mutation (used by script application) ======

  void set_value(NodeId id, std::string value);

  /// Unlinks `id` from its parent without retiring ids. The detached
  /// subtree stays addressable until reattached or erased.
  void detach(NodeId id);

  /// Attaches a previously detached subtree under `parent` at `index`.
  void attach(NodeId id, NodeId parent, size_t index);

  /// Permanently removes the subtree at `id` and retires its ids.
  void erase(NodeId id);

  // ====== whole-tree helpers ======

  /// A copy of this tree with ids reassigned in pre-order from 0.
  Ast with_preorder_ids() const;

  friend bool operator==(const Ast& a, const Ast& b);

private:
  void check_alive(NodeId id, const char* what) const;

  std::vector<AstNode> nodes_;
  std::vector<char> alive_;
  NodeId root_ = kNoNode;
  size_t live_count_ = 0;
};

/// Structural equality ignoring ids: same kinds, values, and child order.
bool isomorphic(const Ast& a, const Ast& b);
bool isomorphic(const Ast& a, NodeId ra, const Ast& b, NodeId rb);

/// Unique simple path from `from` to `to` through their lowest common
/// ancestor. path_between(x, x) == {x}.
AstPath path_between(const Ast& tree, NodeId from, NodeId to);

/// True iff consecutive entries are parent/child in either direction and
/// no node repeats.
bool is_valid_path(const Ast& tree, const AstPath& path);

/// Grammar symbol table: ordered kind symbols, which of them are terminal,
/// and the largest child index the index embedding distinguishes.
struct GrammarVocab {
  std::vector<std::string> symbols;
  std::unordered_set<std::string> terminals;
  int max_child_index = 31;

  bool contains(const std::string& kind) const;
  bool is_terminal(const std::string& kind) const {
    return terminals.count(kind) > 0;
  }
};

/// Splits an identifier into lowercase subtokens on camelCase humps,
/// underscores, and letter/digit boundaries. Idempotent on its output.
std::vector<std::string> split_subtokens(const std::string& word);

}  // namespace treedit::ast
