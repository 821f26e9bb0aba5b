#include "treedit/augment.hpp"

#include <stdexcept>
#include <unordered_set>

namespace treedit::paths {

bool AugmentedAst::in_special_zone(NodeId id) const {
  if (!tree.alive(id)) return false;
  if (id == del_node) return true;
  return tree.is_ancestor(upd_node, id) || tree.is_ancestor(ins_node, id);
}

AugmentedAst augment(const Ast& tree, const diff::EditScript& context) {
  if (tree.empty()) throw std::invalid_argument("augment: empty tree");
  if (tree.next_id() != static_cast<NodeId>(tree.size())) {
    throw std::invalid_argument("augment: tree ids must be 0..size-1");
  }
  AugmentedAst aug;
  aug.tree = tree;
  aug.original_count = static_cast<NodeId>(tree.size());
  NodeId root = aug.tree.root();

  aug.del_node = aug.tree.add_node(kDelKind, root);
  aug.upd_node = aug.tree.add_node(kUpdKind, root);

  // One terminal carrier per distinct replacement value, script order.
  std::unordered_set<std::string> seen_values;
  for (const auto& op : context) {
    if (op.kind != diff::OpKind::Upd) continue;
    if (!seen_values.insert(op.value).second) continue;
    aug.tree.add_node(kUpdKind, aug.upd_node, true, op.value);
  }

  aug.ins_node = aug.tree.add_node(kInsKind, root);
  for (const auto& op : context) {
    if (op.kind != diff::OpKind::Ins) continue;
    aug.tree.graft(op.subtree, op.subtree.root(), aug.ins_node,
                   aug.tree.node(aug.ins_node).children.size());
  }

  // Placeholders under every original nonterminal, pre-order. They are
  // childless nonterminals so paths encode them by kind, not value.
  for (NodeId id : tree.preorder()) {
    if (tree.node(id).terminal) continue;
    NodeId ph = aug.tree.add_node(kPlaceholderKind, id);
    aug.tree.detach(ph);
    aug.tree.attach(ph, id, 0);
    aug.placeholder_of.emplace(id, ph);
  }
  return aug;
}

Ast strip(const AugmentedAst& aug, const Ast& edited) {
  Ast out = edited;
  for (NodeId special : {aug.del_node, aug.upd_node, aug.ins_node}) {
    if (out.alive(special)) out.erase(special);
  }
  // Placeholders are identified by kind so copies made by path inserts
  // disappear as well.
  std::vector<NodeId> drop;
  for (NodeId id : out.preorder()) {
    if (out.node(id).kind == kPlaceholderKind) drop.push_back(id);
  }
  for (NodeId id : drop) out.erase(id);
  return out;
}

Ast strip(const AugmentedAst& aug) { return strip(aug, aug.tree); }

}  // namespace treedit::paths
