#include "treedit/dataset.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "treedit/gumtree.hpp"
#include "treedit/sexpr.hpp"

namespace treedit::data {

namespace fs = std::filesystem;

namespace {

bool spans_intersect(int a_first, int a_last, int b_first, int b_last) {
  return a_first <= b_last && b_first <= a_last;
}

ast::Ast region_from(const toy::ToyProgram& program, int first, int last, bool exclude,
                     int excl_first, int excl_last) {
  ast::Ast unit;
  ast::NodeId root = unit.add_node("Unit", ast::kNoNode);
  const ast::Ast& tree = program.tree;
  const auto& stmts = tree.node(tree.root()).children;
  int index = 0;
  for (size_t i = 0; i < stmts.size(); ++i) {
    const toy::LineSpan& span = program.stmt_spans[i];
    if (!spans_intersect(span.first, span.last, first, last)) continue;
    if (exclude && spans_intersect(span.first, span.last, excl_first, excl_last)) continue;
    unit.graft(tree, stmts[i], root, index++);
  }
  return unit;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.generic_string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ChangedSpan parse_span(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  ChangedSpan s;
  if (!(is >> s.before_first >> s.before_last >> s.after_first >> s.after_last)) {
    throw DataError("bad span file (want 4 integers) in " + where);
  }
  std::string extra;
  if (is >> extra) throw DataError("trailing content in span file in " + where);
  return s;
}

bool all_kind(const diff::EditScript& s, diff::OpKind k) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [&](const diff::EditOp& op) { return op.kind == k; });
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

}  // namespace

ast::Ast extract_region(const toy::ToyProgram& program, int first_line, int last_line) {
  return region_from(program, first_line, last_line, false, 0, 0);
}

ast::Ast extract_region_excluding(const toy::ToyProgram& program, int first_line, int last_line,
                                  int excl_first, int excl_last) {
  return region_from(program, first_line, last_line, true, excl_first, excl_last);
}

std::optional<Example> make_example(const std::string& project, const std::string& case_id,
                                    const std::string& before_text, const std::string& after_text,
                                    const ChangedSpan& span, const IngestConfig& cfg,
                                    std::string* drop_reason) {
  toy::ToyProgram before = toy::parse_toy(before_text);
  toy::ToyProgram after = toy::parse_toy(after_text);

  // Context window: `radius` lines around the changed span (the span's
  // first line anchors an empty range).
  int b_hi = std::max(span.before_first, span.before_last);
  int a_hi = std::max(span.after_first, span.after_last);
  ast::Ast p_before = extract_region(before, span.before_first, span.before_last);
  ast::Ast p_after = extract_region(after, span.after_first, span.after_last);
  ast::Ast c_before = extract_region_excluding(before, span.before_first - cfg.radius,
                                               b_hi + cfg.radius, span.before_first,
                                               span.before_last);
  ast::Ast c_after = extract_region_excluding(after, span.after_first - cfg.radius,
                                              a_hi + cfg.radius, span.after_first, span.after_last);

  auto fail = [&](const char* reason) -> std::optional<Example> {
    if (drop_reason) *drop_reason = reason;
    return std::nullopt;
  };

  if (static_cast<int>(p_before.size()) > cfg.max_nodes) return fail("too_large");

  diff::EditScript target_script = diff::diff(p_before, p_after);
  diff::EditScript context_script = diff::diff(c_before, c_after);

  if (target_script.empty()) return fail("empty_target");
  if (all_kind(target_script, diff::OpKind::Del)) return fail("delete_only");

  if (all_kind(target_script, diff::OpKind::Upd) && all_kind(context_script, diff::OpKind::Upd)) {
    auto value_pairs = [](const ast::Ast& base, const diff::EditScript& s) {
      std::set<std::pair<std::string, std::string>> pairs;
      for (const diff::EditOp& op : s) pairs.emplace(base.node(op.tgt).value, op.value);
      return pairs;
    };
    auto tgt_pairs = value_pairs(p_before, target_script);
    auto ctx_pairs = value_pairs(c_before, context_script);
    if (std::includes(ctx_pairs.begin(), ctx_pairs.end(), tgt_pairs.begin(), tgt_pairs.end())) {
      return fail("trivial_rename");
    }
  }

  try {
    paths::AugmentedAst aug_p = paths::augment(p_before, context_script);
    auto gold = paths::script_to_path_ops(aug_p, target_script, paths::EncodeMode::Target);
    paths::CandidateSet cands = paths::enumerate_candidates(aug_p);
    for (const paths::PathOperation& op : gold) {
      if (cands.index_of(op) < 0) return fail("unrepresentable");
    }
    paths::AugmentedAst aug_c = paths::augment(c_before, context_script);
    paths::script_to_path_ops(aug_c, context_script, paths::EncodeMode::Context);
  } catch (const UnrepresentableError&) {
    return fail("unrepresentable");
  }

  Example ex;
  ex.project = project;
  ex.case_id = case_id;
  ex.p_before = std::move(p_before);
  ex.c_before = std::move(c_before);
  ex.c_after = std::move(c_after);
  ex.target_script = std::move(target_script);
  ex.context_script = std::move(context_script);
  return ex;
}

IngestResult ingest_corpus(const std::string& corpus_dir, const IngestConfig& cfg) {
  fs::path root(corpus_dir);
  if (!fs::is_directory(root)) throw DataError("corpus directory not found: " + corpus_dir);

  std::vector<fs::path> case_dirs;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    const fs::path& p = entry.path();
    if (fs::is_regular_file(p / "before.toy") && fs::is_regular_file(p / "after.toy") &&
        fs::is_regular_file(p / "span.txt")) {
      case_dirs.push_back(p);
    }
  }
  std::sort(case_dirs.begin(), case_dirs.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.generic_string() < b.generic_string();
            });
  if (case_dirs.empty()) throw DataError("no cases found under " + corpus_dir);

  IngestResult res;
  for (const fs::path& dir : case_dirs) {
    fs::path rel = fs::relative(dir, root);
    std::vector<std::string> parts;
    for (const auto& part : rel) parts.push_back(part.generic_string());
    if (parts.size() < 2) {
      throw DataError("case " + rel.generic_string() +
                      " must sit inside a project directory (<corpus>/<project>/<case>)");
    }
    std::string project = parts.front();
    std::string case_id = parts[1];
    for (size_t i = 2; i < parts.size(); ++i) case_id += "/" + parts[i];

    ++res.report.cases;
    std::string reason;
    std::optional<Example> ex;
    try {
      ChangedSpan span = parse_span(read_file(dir / "span.txt"), rel.generic_string());
      ex = make_example(project, case_id, read_file(dir / "before.toy"),
                        read_file(dir / "after.toy"), span, cfg, &reason);
    } catch (const ParseError&) {
      // A pair that does not parse is dropped, not fatal to the run.
      reason = "parse_error";
      ex.reset();
    } catch (const DataError&) {
      reason = "parse_error";
      ex.reset();
    }
    if (ex) {
      res.examples.push_back(std::move(*ex));
      ++res.report.kept;
    } else {
      ++res.report.dropped[reason];
    }
  }
  return res;
}

// ====== persistence ======

namespace {

std::string one_line_sexpr(const ast::Ast& tree, const char* what) {
  std::string s = ast::serialize_interchange(tree);
  if (s.find('\n') != std::string::npos) {
    throw DataError(std::string(what) + " contains a newline inside a value; "
                    "the record format is line-oriented");
  }
  return s;
}

void write_script(std::ostream& out, const char* label, const diff::EditScript& script) {
  std::vector<std::string> lines = split_lines(diff::serialize_script(script));
  out << label << ' ' << lines.size() << '\n';
  for (const std::string& l : lines) out << l << '\n';
}

}  // namespace

void save_dataset(const std::vector<Example>& examples, std::ostream& out) {
  for (const Example& ex : examples) {
    if (ex.project.empty() || ex.project.find_first_of(" \t\n") != std::string::npos ||
        ex.case_id.empty() || ex.case_id.find_first_of(" \t\n") != std::string::npos) {
      throw DataError("project/case ids must be nonempty and free of whitespace");
    }
    out << "example " << ex.project << ' ' << ex.case_id << '\n';
    out << "p_before " << one_line_sexpr(ex.p_before, "p_before") << '\n';
    out << "c_before " << one_line_sexpr(ex.c_before, "c_before") << '\n';
    out << "c_after " << one_line_sexpr(ex.c_after, "c_after") << '\n';
    write_script(out, "target", ex.target_script);
    write_script(out, "context", ex.context_script);
    out << "end\n";
  }
}

void save_dataset_file(const std::vector<Example>& examples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open dataset file for writing: " + path);
  save_dataset(examples, out);
  if (!out) throw DataError("failed writing dataset file: " + path);
}

namespace {

class RecordReader {
 public:
  explicit RecordReader(std::istream& in) : in_(in) {}

  bool next_nonblank(std::string& line) {
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next_nonblank(line)) {
      throw DataError("dataset: unexpected end of stream, expected " + std::string(what));
    }
    return line;
  }

  std::string require_prefixed(const std::string& prefix) {
    std::string line = require(("'" + prefix + " ...'").c_str());
    if (line.rfind(prefix + " ", 0) != 0) {
      throw DataError("dataset line " + std::to_string(lineno_) + ": expected '" + prefix +
                      " ...', found '" + line + "'");
    }
    return line.substr(prefix.size() + 1);
  }

  int lineno() const { return lineno_; }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

}  // namespace

std::vector<Example> load_dataset(std::istream& in) {
  std::vector<Example> out;
  RecordReader rd(in);
  std::string line;
  while (rd.next_nonblank(line)) {
    std::istringstream hdr(line);
    std::string word, project, case_id;
    if (!(hdr >> word >> project >> case_id) || word != "example") {
      throw DataError("dataset line " + std::to_string(rd.lineno()) +
                      ": expected 'example <project> <case>', found '" + line + "'");
    }
    Example ex;
    ex.project = project;
    ex.case_id = case_id;
    ex.p_before = ast::parse_interchange(rd.require_prefixed("p_before"));
    ex.c_before = ast::parse_interchange(rd.require_prefixed("c_before"));
    ex.c_after = ast::parse_interchange(rd.require_prefixed("c_after"));
    auto read_script = [&](const char* label) {
      std::string count_text = rd.require_prefixed(label);
      size_t pos = 0;
      int n = std::stoi(count_text, &pos);
      if (pos != count_text.size() || n < 0) {
        throw DataError("dataset line " + std::to_string(rd.lineno()) + ": bad op count '" +
                        count_text + "'");
      }
      std::string joined;
      for (int i = 0; i < n; ++i) joined += rd.require("a script op") + "\n";
      return diff::parse_script(joined);
    };
    ex.target_script = read_script("target");
    ex.context_script = read_script("context");
    if (rd.require("'end'") != "end") {
      throw DataError("dataset line " + std::to_string(rd.lineno()) + ": expected 'end'");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return load_dataset(in);
}

// ====== splits ======

Split split_by_project(const std::vector<Example>& examples, const SplitConfig& cfg) {
  if (cfg.train < 0 || cfg.val < 0 || cfg.test < 0 || cfg.train + cfg.val + cfg.test <= 0) {
    throw DataError("split ratios must be nonnegative with a positive sum");
  }
  std::map<std::string, size_t> counts;
  for (const Example& ex : examples) ++counts[ex.project];
  if (counts.size() < 3) {
    throw DataError("project split needs at least 3 projects, found " +
                    std::to_string(counts.size()));
  }

  auto name_hash = [&](const std::string& name) {
    uint64_t h = 1469598103934665603ull ^ (cfg.seed * 0x9E3779B97F4A7C15ull);
    for (unsigned char c : name) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  };

  std::vector<std::pair<std::string, size_t>> order(counts.begin(), counts.end());
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    uint64_t ha = name_hash(a.first), hb = name_hash(b.first);
    if (ha != hb) return ha < hb;
    return a.first < b.first;
  });

  const double total = static_cast<double>(examples.size());
  const double ratio_sum = cfg.train + cfg.val + cfg.test;
  std::array<double, 3> quota = {cfg.train / ratio_sum * total, cfg.val / ratio_sum * total,
                                 cfg.test / ratio_sum * total};
  std::array<double, 3> used = {0.0, 0.0, 0.0};
  std::map<std::string, int> fold_of;
  for (const auto& [name, count] : order) {
    int best = -1;
    double best_deficit = -1e300;
    for (int f = 0; f < 3; ++f) {
      if (quota[f] <= 0.0) continue;
      double deficit = (quota[f] - used[f]) / quota[f];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = f;
      }
    }
    fold_of[name] = best;
    used[best] += static_cast<double>(count);
  }

  Split split;
  for (const Example& ex : examples) {
    switch (fold_of[ex.project]) {
      case 0: split.train.push_back(ex); break;
      case 1: split.val.push_back(ex); break;
      default: split.test.push_back(ex); break;
    }
  }
  return split;
}

// ====== statistics ======

DatasetStats compute_stats(const std::vector<Example>& examples) {
  DatasetStats st;
  st.examples = examples.size();
  std::set<std::string> projects;
  size_t cand_ops = 0, cand_paths = 0, tgt_ops = 0;
  size_t n_mov = 0, n_del = 0, n_upd = 0, n_ins = 0;
  size_t sz_mov = 0, sz_del = 0, sz_ins = 0;

  for (const Example& ex : examples) {
    projects.insert(ex.project);
    paths::AugmentedAst aug = paths::augment(ex.p_before, ex.context_script);
    paths::CandidateSet cands = paths::enumerate_candidates(aug);
    cand_ops += cands.ops.size();
    std::set<ast::AstPath> unique_paths;
    for (const paths::PathOperation& op : cands.ops) unique_paths.insert(op.path);
    cand_paths += unique_paths.size();

    tgt_ops += ex.target_script.size();
    ast::Ast w = ex.p_before;
    for (const diff::EditOp& op : ex.target_script) {
      switch (op.kind) {
        case diff::OpKind::Mov:
          ++n_mov;
          sz_mov += static_cast<size_t>(w.subtree_size(op.src));
          break;
        case diff::OpKind::Del:
          ++n_del;
          sz_del += static_cast<size_t>(w.subtree_size(op.src));
          break;
        case diff::OpKind::Upd:
          ++n_upd;
          break;
        case diff::OpKind::Ins:
          ++n_ins;
          sz_ins += static_cast<size_t>(op.subtree.size());
          break;
      }
      w = diff::apply_script(w, {op});
    }
  }

  st.projects = projects.size();
  if (!examples.empty()) {
    st.avg_candidate_ops = static_cast<double>(cand_ops) / examples.size();
    st.avg_candidate_paths = static_cast<double>(cand_paths) / examples.size();
    st.avg_target_ops = static_cast<double>(tgt_ops) / examples.size();
  }
  if (tgt_ops > 0) {
    st.pct_mov = 100.0 * n_mov / tgt_ops;
    st.pct_del = 100.0 * n_del / tgt_ops;
    st.pct_upd = 100.0 * n_upd / tgt_ops;
    st.pct_ins = 100.0 * n_ins / tgt_ops;
  }
  if (n_mov) st.avg_moved_size = static_cast<double>(sz_mov) / n_mov;
  if (n_del) st.avg_deleted_size = static_cast<double>(sz_del) / n_del;
  if (n_ins) st.avg_inserted_size = static_cast<double>(sz_ins) / n_ins;
  return st;
}

// ====== model glue ======

std::map<std::string, size_t> collect_subtoken_freq(const std::vector<Example>& examples) {
  std::map<std::string, size_t> freq;
  auto add_tree = [&](const ast::Ast& t) {
    if (t.empty()) return;
    for (ast::NodeId id : t.preorder(t.root())) {
      const ast::AstNode& n = t.node(id);
      if (!n.terminal) continue;
      for (const std::string& tok : ast::split_subtokens(n.value)) ++freq[tok];
    }
  };
  for (const Example& ex : examples) {
    add_tree(ex.p_before);
    add_tree(ex.c_before);
    add_tree(ex.c_after);
  }
  return freq;
}

PreparedPieces prepare_pieces(const Example& ex) {
  PreparedPieces p;
  p.aug_target = paths::augment(ex.p_before, ex.context_script);
  p.candidates = paths::enumerate_candidates(p.aug_target);
  p.gold = paths::script_to_path_ops(p.aug_target, ex.target_script, paths::EncodeMode::Target);
  p.aug_context = paths::augment(ex.c_before, ex.context_script);
  p.context =
      paths::script_to_path_ops(p.aug_context, ex.context_script, paths::EncodeMode::Context);
  return p;
}

model::PreparedExample prepare(const Example& ex, const model::Vocab& vocab) {
  PreparedPieces p = prepare_pieces(ex);
  return model::prepare_example(vocab, p.aug_target, p.candidates, p.gold, p.aug_context,
                                p.context);
}

}  // namespace treedit::data
