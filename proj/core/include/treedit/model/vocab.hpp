#pragma once

/**
 * Closed model vocabulary: node kinds (grammar symbols plus the synthetic
 * Placeholder/DEL/UPD/INS and a PAD slot), clamped child indices, and a
 * frequency-filtered subtoken inventory with UNK and PAD entries.
 */

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "treedit/ast.hpp"
#include "treedit/errors.hpp"

namespace treedit::model {

inline constexpr const char* kUnkSubtoken = "<unk>";
inline constexpr const char* kPadSubtoken = "<pad>";
inline constexpr const char* kPadKind = "PAD";

struct Vocab {
  std::vector<std::string> kinds;
  std::vector<std::string> subtokens;  // [0]=<unk>, [1]=<pad>
  int max_child_index = 31;

  std::unordered_map<std::string, int> kind_ids;
  std::unordered_map<std::string, int> subtoken_ids;

  /// Throws DataError for a kind outside the closed vocabulary.
  int kind_id(const std::string& kind) const;

  /// Clamps to [0, max_child_index].
  int index_id(int child_index) const;

  /// Subtoken ids of a value; unknown subtokens map to UNK. An empty
  /// value yields no ids (its embedding sum is the zero vector).
  std::vector<int> value_ids(const std::string& value) const;

  /// Grammar symbols + specials; subtokens seen at least `min_freq`
  /// times, most frequent first (ties lexicographic), after UNK and PAD.
  static Vocab build(const ast::GrammarVocab& grammar,
                     const std::map<std::string, size_t>& subtoken_freq,
                     size_t min_freq);

  bool operator==(const Vocab& other) const {
    return kinds == other.kinds && subtokens == other.subtokens &&
           max_child_index == other.max_child_index;
  }
};

}  // namespace treedit::model
