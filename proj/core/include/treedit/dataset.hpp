#pragma once

/**
 * Corpus ingestion and example management.
 *
 * A corpus directory holds one case per leaf directory:
 *   <corpus>/<project>/<case...>/before.toy
 *                                after.toy
 *                                span.txt      "<bf> <bl> <af> <al>"
 * span.txt gives the changed line range in each version, 1-based and
 * inclusive; an empty range is written with last < first (e.g. "4 3").
 *
 * From one case we cut two regions out of each file, by whole top-level
 * statements:
 *   target  P: statements whose lines intersect the span;
 *   context C: statements within `radius` lines of the span that are
 *              not part of P.
 * The target script is diff(P_before, P_after); the context script is
 * diff(C_before, C_after). A case is dropped (first matching reason
 * wins) when:
 *   too_large       P_before exceeds max_nodes nodes,
 *   empty_target    the target script is empty,
 *   delete_only     the target script is all DEL,
 *   trivial_rename  both scripts are UPD-only and every (old, new)
 *                   value pair of the target appears in the context,
 *   unrepresentable either script has no path-operation form (the
 *                   target over augment(P_before, ctx), the context
 *                   over augment(C_before, ctx)).
 *
 * Examples serialize to a line-oriented record stream (one s-expression
 * or script op per line) that round-trips exactly.
 */

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "treedit/edit_script.hpp"
#include "treedit/model/network.hpp"
#include "treedit/path_ops.hpp"
#include "treedit/toy.hpp"

namespace treedit::data {

struct Example {
  std::string project;
  std::string case_id;
  ast::Ast p_before;                // target region before the change
  ast::Ast c_before;                // context region before
  ast::Ast c_after;                 // context region after
  diff::EditScript target_script;   // edits p_before
  diff::EditScript context_script;  // edits c_before
};

struct ChangedSpan {
  int before_first = 1, before_last = 0;  // 1-based inclusive; last < first = empty
  int after_first = 1, after_last = 0;
};

struct IngestConfig {
  int radius = 10;     // context window, in lines around the span
  int max_nodes = 50;  // upper bound on target-region size
};

struct IngestReport {
  size_t cases = 0;
  size_t kept = 0;
  std::map<std::string, size_t> dropped;  // reason -> count
};

struct IngestResult {
  std::vector<Example> examples;
  IngestReport report;
};

/// Builds a Unit holding copies of the statements that intersect
/// [first_line, last_line] (and, when `exclude` is given, do not
/// intersect it). Ids are pre-order.
ast::Ast extract_region(const toy::ToyProgram& program, int first_line, int last_line);
ast::Ast extract_region_excluding(const toy::ToyProgram& program, int first_line, int last_line,
                                  int excl_first, int excl_last);

/// Runs one case through the pipeline. Returns the example or, when a
/// filter fires, nullopt with the reason name in *drop_reason. Throws
/// ParseError/DataError on malformed inputs.
std::optional<Example> make_example(const std::string& project, const std::string& case_id,
                                    const std::string& before_text, const std::string& after_text,
                                    const ChangedSpan& span, const IngestConfig& cfg,
                                    std::string* drop_reason = nullptr);

/// Walks the corpus directory (cases sorted by path) and applies
/// make_example to each. Throws DataError when the directory does not
/// exist, holds no cases, or a case file is missing/malformed.
IngestResult ingest_corpus(const std::string& corpus_dir, const IngestConfig& cfg = {});

// ====== persistence ======

void save_dataset(const std::vector<Example>& examples, std::ostream& out);
void save_dataset_file(const std::vector<Example>& examples, const std::string& path);
std::vector<Example> load_dataset(std::istream& in);
std::vector<Example> load_dataset_file(const std::string& path);

// ====== splits ======

struct SplitConfig {
  double train = 0.8, val = 0.1, test = 0.1;
  uint64_t seed = 1;
};

struct Split {
  std::vector<Example> train, val, test;
};

/// Assigns whole projects to folds: projects ordered by example count
/// (ties by a seed-keyed hash of the name), each placed in the fold
/// with the largest remaining deficit against its quota. Requires at
/// least 3 distinct projects (DataError otherwise). No project spans
/// two folds.
Split split_by_project(const std::vector<Example>& examples, const SplitConfig& cfg);

// ====== statistics ======

struct DatasetStats {
  size_t examples = 0;
  size_t projects = 0;
  double avg_candidate_ops = 0.0;    // classes per example
  double avg_candidate_paths = 0.0;  // unique paths per example
  double avg_target_ops = 0.0;       // target script length
  double pct_mov = 0.0, pct_del = 0.0, pct_upd = 0.0, pct_ins = 0.0;
  double avg_moved_size = 0.0;     // subtree nodes at application time
  double avg_deleted_size = 0.0;
  double avg_inserted_size = 0.0;
};

DatasetStats compute_stats(const std::vector<Example>& examples);

// ====== model glue ======

/// Subtoken counts over every terminal value in the example trees
/// (used to build the model vocabulary from the training fold).
std::map<std::string, size_t> collect_subtoken_freq(const std::vector<Example>& examples);

/// Augments, converts both scripts to path operations, enumerates
/// candidates, and assembles the feature view. Throws
/// UnrepresentableError/CoverageError only on examples that bypassed
/// the ingest filters.
model::PreparedExample prepare(const Example& ex, const model::Vocab& vocab);

/// The pieces `prepare` is built from, for callers that need the trees
/// and operations themselves (prediction, inspection).
struct PreparedPieces {
  paths::AugmentedAst aug_target;
  paths::CandidateSet candidates;
  std::vector<paths::PathOperation> gold;
  paths::AugmentedAst aug_context;
  std::vector<paths::PathOperation> context;
};

PreparedPieces prepare_pieces(const Example& ex);

}  // namespace treedit::data
