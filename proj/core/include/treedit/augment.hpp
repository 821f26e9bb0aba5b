#pragma once

/**
 * Augmented trees: the playing field for path operations.
 *
 * augment() copies a tree (ids preserved) and adds synthetic nodes:
 *   - a Placeholder as the leftmost child of every original nonterminal,
 *     so "insert as leftmost child" is expressible as "right of the
 *     Placeholder";
 *   - DEL, UPD, and INS nodes appended as children of the root, in that
 *     order. Deleting a subtree is expressed as moving it to DEL.
 *   - under UPD, one terminal carrier (UPD "v") per distinct replacement
 *     value in the supplied context script, in first-appearance order;
 *   - under INS, one copy of each subtree the context script inserts, in
 *     script order.
 *
 * Original nodes keep their ids; synthetic nodes get fresh ids above
 * them. strip() removes every synthetic node; strip(augment(t, s)) == t.
 */

#include <unordered_map>

#include "treedit/edit_script.hpp"

namespace treedit::paths {

using ast::Ast;
using ast::NodeId;

inline constexpr const char* kPlaceholderKind = "Placeholder";
inline constexpr const char* kDelKind = "DEL";
inline constexpr const char* kUpdKind = "UPD";
inline constexpr const char* kInsKind = "INS";

struct AugmentedAst {
  Ast tree;
  NodeId original_count = 0;  // ids below this are original nodes
  NodeId del_node = ast::kNoNode;
  NodeId upd_node = ast::kNoNode;
  NodeId ins_node = ast::kNoNode;
  std::unordered_map<NodeId, NodeId> placeholder_of;  // nonterminal -> leaf

  bool is_original(NodeId id) const { return id < original_count; }
  bool is_placeholder(NodeId id) const {
    return tree.alive(id) && tree.node(id).kind == kPlaceholderKind;
  }
  /// True for DEL/UPD/INS and everything beneath UPD and INS.
  bool in_special_zone(NodeId id) const;
};

/// `tree` must have pre-order ids 0..size-1 (as parsers produce).
AugmentedAst augment(const Ast& tree, const diff::EditScript& context);

/// Removes placeholders and the DEL/UPD/INS subtrees from a (possibly
/// edited) augmented tree. Surviving nodes keep their ids.
Ast strip(const AugmentedAst& aug);
Ast strip(const AugmentedAst& aug, const Ast& edited);

}  // namespace treedit::paths
