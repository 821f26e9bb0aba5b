#include "treedit/model/vocab.hpp"

#include <algorithm>

#include "treedit/augment.hpp"

namespace treedit::model {

int Vocab::kind_id(const std::string& kind) const {
  auto it = kind_ids.find(kind);
  if (it == kind_ids.end()) {
    throw DataError("unknown node kind '" + kind + "' (vocabulary is closed)");
  }
  return it->second;
}

int Vocab::index_id(int child_index) const {
  if (child_index < 0) return 0;
  return std::min(child_index, max_child_index);
}

std::vector<int> Vocab::value_ids(const std::string& value) const {
  std::vector<int> out;
  for (const std::string& tok : ast::split_subtokens(value)) {
    auto it = subtoken_ids.find(tok);
    out.push_back(it == subtoken_ids.end() ? 0 : it->second);
  }
  return out;
}

Vocab Vocab::build(const ast::GrammarVocab& grammar,
                   const std::map<std::string, size_t>& subtoken_freq,
                   size_t min_freq) {
  Vocab v;
  v.max_child_index = grammar.max_child_index;
  v.kinds = grammar.symbols;
  for (const char* special : {paths::kPlaceholderKind, paths::kDelKind,
                              paths::kUpdKind, paths::kInsKind, kPadKind}) {
    if (std::find(v.kinds.begin(), v.kinds.end(), special) == v.kinds.end()) {
      v.kinds.push_back(special);
    }
  }

  v.subtokens = {kUnkSubtoken, kPadSubtoken};
  std::vector<std::pair<std::string, size_t>> kept;
  for (const auto& [tok, n] : subtoken_freq) {
    if (n >= min_freq) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, n] : kept) v.subtokens.push_back(tok);

  for (size_t i = 0; i < v.kinds.size(); ++i) v.kind_ids[v.kinds[i]] = static_cast<int>(i);
  for (size_t i = 0; i < v.subtokens.size(); ++i) {
    v.subtoken_ids[v.subtokens[i]] = static_cast<int>(i);
  }
  return v;
}

}  // namespace treedit::model
