#pragma once

/**
 * Synthetic corpora: small before/after programs whose target change
 * mirrors a nearby context change. Five families:
 *
 *   mov_arg      the context swaps two call arguments; the target
 *                rotates its last argument to the front (MOV).
 *   del_wrap     both sides unwrap a nested call: the inner argument
 *                moves up and the wrapper is deleted (MOV + DEL).
 *   upd_rename   the context renames a variable (and swaps arguments
 *                elsewhere, so it is not update-only); the target
 *                adopts the new name (UPD via the context's carrier).
 *   ins_subtree  the context appends an argument; the target appends
 *                the same one (INS pointing at the context's carrier).
 *   linq         query chains q.where(p) / r.select(x[, y]): the
 *                context appends an argument to `where`, the target
 *                appends it to `select`. Structure is fixed per
 *                variant while identifiers come from a pool, so a
 *                model trained on one pool can be tested on unseen
 *                identifiers.
 *
 * Generation is deterministic in (family, count, seed, pool).
 */

#include <cstdint>
#include <string>
#include <vector>

#include "treedit/dataset.hpp"

namespace treedit::synth {

struct SynthCase {
  std::string project;
  std::string name;
  std::string before_text;
  std::string after_text;
  data::ChangedSpan span;
};

enum class Family { MovArg, DelWrap, UpdRename, InsSubtree, Linq };

const char* family_name(Family f);

/// Cases are spread round-robin over `projects` synthetic projects
/// named <family>-p0.. so project-level splits stay possible.
std::vector<SynthCase> generate_cases(Family family, int count, uint64_t seed, int projects = 4);

/// The linq family with an explicit identifier pool (>= 8 names).
std::vector<SynthCase> generate_linq_cases(int count, uint64_t seed,
                                           const std::vector<std::string>& id_pool,
                                           int projects = 4);

/// 24 everyday identifiers, free of toy keywords.
const std::vector<std::string>& default_id_pool();

/// 12 identifiers disjoint from default_id_pool().
const std::vector<std::string>& held_out_id_pool();

/// Writes <dir>/<project>/<name>/{before.toy, after.toy, span.txt}.
void write_corpus(const std::string& dir, const std::vector<SynthCase>& cases);

}  // namespace treedit::synth
