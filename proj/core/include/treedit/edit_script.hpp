#pragma once

/**
 * Tree edit scripts.
 *
 * Four operations transform one tree into another:
 *   MOV src gap    relocate the subtree at src
 *   DEL src        remove the subtree at src
 *   UPD "v" tgt    replace the value of terminal tgt with v
 *   INS sexpr gap  insert a copy of the given subtree
 *
 * A gap names a position in the evolving tree: `after(n)` puts the
 * arriving subtree immediately to the right of node n (n becomes its left
 * sibling), `first(p)` makes it the leftmost child of p.
 *
 * Node ids in a script refer to the tree the script is applied to: ids of
 * the original nodes are their pre-order ids at script start, and nodes
 * inserted by INS receive fresh ids (above every id used so far, assigned
 * in pre-order of the inserted subtree), which later ops may reference.
 *
 * Text form, one op per line:
 *   MOV 5 7        MOV 5 first(2)
 *   UPD "bar" 9
 *   INS (Arg (Name "x")) 4
 *   DEL 3
 */

#include <string>
#include <vector>

#include "treedit/ast.hpp"
#include "treedit/errors.hpp"

namespace treedit::diff {

using ast::Ast;
using ast::NodeId;

enum class OpKind { Mov, Del, Upd, Ins };

const char* op_name(OpKind k);

struct Gap {
  NodeId anchor = ast::kNoNode;
  bool leftmost = false;  // true: leftmost child of anchor; false: right of anchor

  static Gap after(NodeId sibling) { return {sibling, false}; }
  static Gap first(NodeId parent) { return {parent, true}; }
  friend bool operator==(const Gap&, const Gap&) = default;
};

struct EditOp {
  OpKind kind = OpKind::Del;
  NodeId src = ast::kNoNode;  // Mov/Del subject
  std::string value;          // Upd replacement value
  NodeId tgt = ast::kNoNode;  // Upd subject
  Ast subtree;                // Ins content
  Gap gap;                    // Mov/Ins destination

  static EditOp mov(NodeId src, Gap g);
  static EditOp del(NodeId src);
  static EditOp upd(std::string value, NodeId tgt);
  static EditOp ins(Ast subtree, Gap g);
};

using EditScript = std::vector<EditOp>;

bool same_op(const EditOp& a, const EditOp& b);

/// Applies `script` to a working copy of `tree` and returns the result.
/// Node ids stay attached to their nodes; the result is generally not
/// pre-order numbered. Throws ApplyError on a dangling reference, a move
/// into the subtree being moved, an UPD of a nonterminal, a destination
/// under a terminal, or an op against the root that cannot exist.
Ast apply_script(const Ast& tree, const EditScript& script);

std::string serialize_script(const EditScript& script);
EditScript parse_script(const std::string& text);

}  // namespace treedit::diff
