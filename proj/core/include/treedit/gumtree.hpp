#pragma once

/**
 * Three-phase tree matching and script generation.
 *
 * 1. anchors_topdown     greedy height-ordered pairing of maximal
 *                        isomorphic subtrees
 * 2. containers_bottomup pairs same-kind internal nodes whose descendants
 *                        share enough already-mapped nodes
 * 3. recover_descendants pairs leftover same-kind descendants inside each
 *                        container pair, innermost first
 *
 * generate_script then derives a valid (not necessarily minimal) edit
 * script from the mapping; diff composes all four. Worst case O(n^2).
 */

#include <unordered_map>

#include "treedit/edit_script.hpp"

namespace treedit::diff {

/// One-to-one node correspondence between two trees. Mapped pairs always
/// agree on kind and terminal flag.
class Mapping {
public:
  void add(NodeId a, NodeId b);
  void remove_a(NodeId a);

  bool has_a(NodeId a) const { return a2b_.count(a) > 0; }
  bool has_b(NodeId b) const { return b2a_.count(b) > 0; }
  NodeId from_a(NodeId a) const { return a2b_.at(a); }
  NodeId from_b(NodeId b) const { return b2a_.at(b); }

  size_t size() const { return a2b_.size(); }
  const std::unordered_map<NodeId, NodeId>& a_to_b() const { return a2b_; }

private:
  std::unordered_map<NodeId, NodeId> a2b_;
  std::unordered_map<NodeId, NodeId> b2a_;
};

/// Pairs maximal isomorphic subtrees, tallest first, ties by pre-order
/// position. The roots pair only with each other.
Mapping anchors_topdown(const Ast& a, const Ast& b);

/// Extends `anchors` with container pairs: an unmapped internal a-node
/// pairs with the same-kind unmapped b-node maximizing
///   |descendant pairs already mapped across the two| / max(|desc a|,|desc b|)
/// when that ratio reaches 0.5. Same-kind roots always pair.
Mapping containers_bottomup(const Ast& a, const Ast& b, Mapping anchors);

/// For each mapped pair with unmapped descendants (innermost first), adds
/// a maximum-size same-kind pairing of the still-unmapped descendants.
Mapping recover_descendants(const Ast& a, const Ast& b, Mapping m);

/// Derives a script s with apply_script(a, s) isomorphic to b. Requires
/// m to map the roots to each other. UPD ops come first, then INS/MOV
/// top-down, then DEL bottom-up.
EditScript generate_script(const Ast& a, const Ast& b, const Mapping& m);

/// anchors -> containers -> recovery -> script. Throws
/// std::invalid_argument when the root kinds differ (no script under
/// these operations can change the root).
EditScript diff(const Ast& a, const Ast& b);

}  // namespace treedit::diff
