#pragma once

/**
 * Edit operations as paths through an augmented tree.
 *
 * Every operation is a pair of endpoints joined by the unique simple
 * path between them: the source is the first node, the target the last.
 * The moved/copied/read subtree arrives immediately to the RIGHT of the
 * target node; a Placeholder target therefore means "leftmost child of
 * the Placeholder's parent", and the DEL node as target deletes the
 * source subtree. Three kinds remain at this level: MOV, UPD, INS
 * (deletion is MOV to DEL).
 *
 * Text form (ids after '#' resolve the endpoints; the arrow chain shows
 * kind[childIndex] along the path):
 *   MOV Name[1] -> Call[1] -> ArgList[2] -> Placeholder[0] # 4 -> 17
 */

#include <string>
#include <vector>

#include "treedit/augment.hpp"

namespace treedit::paths {

enum class PathOpKind { Mov, Upd, Ins };

const char* path_op_name(PathOpKind k);

struct PathOperation {
  PathOpKind kind = PathOpKind::Mov;
  ast::AstPath path;  // front() = source, back() = target

  NodeId source() const { return path.front(); }
  NodeId target() const { return path.back(); }
  friend bool operator==(const PathOperation&, const PathOperation&) = default;
};

/// How script_to_path_ops encodes operations.
///  Target:  the script edits the augmented tree itself; sources are
///           located in the tree (UPD/INS fall back to the carriers).
///  Context: the script is the context edit being described; UPD reads
///           from its carrier and INS is the two-node path from the INS
///           node to its copied subtree.
enum class EncodeMode { Target, Context };

/// Converts a tree-level script into path operations over `aug`. Throws
/// UnrepresentableError when an op references a node that does not exist
/// in the augmented tree (e.g. a target created mid-script) or inserts a
/// subtree that appears neither in the tree nor under INS.
std::vector<PathOperation> script_to_path_ops(const AugmentedAst& aug,
                                              const diff::EditScript& script,
                                              EncodeMode mode);

/// Applies path operations in order to a copy of `aug`, strips the
/// augmentation, and returns the edited plain tree (ids are stable, not
/// re-numbered). Endpoints are re-resolved by node identity before each
/// op; a dead endpoint raises ApplyError.
Ast apply_path_ops(const AugmentedAst& aug,
                   const std::vector<PathOperation>& ops);

/// Every operation the model may point at, in deterministic order:
/// sorted by source pre-order position, then target position, then
/// MOV < UPD < INS. The index into `ops` is the candidate's class index.
///   MOV: any original non-root source; targets outside its subtree
///        among original non-root nodes, Placeholders, and DEL.
///   UPD: terminal source (original or UPD carrier) and original
///        terminal target with a different value.
///   INS: any original subtree root or INS carrier child as source;
///        MOV's targets minus DEL.
struct CandidateSet {
  std::vector<PathOperation> ops;

  /// Index of an equivalent op (same kind and endpoints) or -1.
  int index_of(const PathOperation& op) const;
};

CandidateSet enumerate_candidates(const AugmentedAst& aug);

/// Renders "KIND kind[i] -> ... -> kind[j] # src -> tgt".
std::string path_op_to_string(const AugmentedAst& aug,
                              const PathOperation& op);

/// Parses the text form back; endpoints come from the '#' suffix and the
/// path is recomputed, so stale arrow chains are tolerated.
PathOperation parse_path_op(const AugmentedAst& aug, const std::string& line);

}  // namespace treedit::paths
