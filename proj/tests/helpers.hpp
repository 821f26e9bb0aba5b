#pragma once

// Shared generators for the test suites: random toy programs, random
// mutations of them, and small generic trees for structural tests.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "treedit/ast.hpp"
#include "treedit/toy.hpp"

namespace testgen {

using Rng = std::mt19937_64;

inline int pick(Rng& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

// ====== toy-program text generation ======

inline const std::vector<std::string>& name_pool() {
  static const std::vector<std::string> pool = {
      "a", "b", "c", "d", "x", "y", "z", "foo", "bar", "baz", "get", "put", "run", "len"};
  return pool;
}

inline std::string rand_name(Rng& rng) {
  return name_pool()[static_cast<size_t>(pick(rng, 0, static_cast<int>(name_pool().size()) - 1))];
}

inline std::string rand_literal(Rng& rng) {
  switch (pick(rng, 0, 4)) {
    case 0: return std::to_string(pick(rng, 0, 9));
    case 1: return "true";
    case 2: return "false";
    case 3: return "null";
    default: return "\"s" + std::to_string(pick(rng, 0, 3)) + "\"";
  }
}

inline std::string rand_expr(Rng& rng, int depth) {
  if (depth <= 0 || chance(rng, 0.45)) {
    return chance(rng, 0.5) ? rand_name(rng) : rand_literal(rng);
  }
  switch (pick(rng, 0, 3)) {
    case 0:
      return rand_name(rng) + "." + rand_name(rng);
    case 1: {  // call with 0..3 args
      std::string s = rand_name(rng) + "(";
      int n = pick(rng, 0, 3);
      for (int i = 0; i < n; ++i) {
        if (i) s += ", ";
        s += rand_expr(rng, depth - 1);
      }
      return s + ")";
    }
    case 2: {
      static const char* ops[] = {"+", "-", "*", "<", "=="};
      return rand_expr(rng, depth - 1) + " " + ops[pick(rng, 0, 4)] + " " +
             rand_expr(rng, depth - 1);
    }
    default:
      return rand_name(rng) + "." + rand_name(rng) + "(" + rand_expr(rng, depth - 1) + ")";
  }
}

inline std::string rand_statement(Rng& rng, int depth = 2) {
  switch (pick(rng, 0, 5)) {
    case 0:
    case 1:
      return rand_name(rng) + " = " + rand_expr(rng, depth) + ";";
    case 2:
      return rand_name(rng) + "." + rand_name(rng) + " = " + rand_expr(rng, depth - 1) + ";";
    case 3:
      return rand_name(rng) + "(" + rand_expr(rng, depth - 1) + ");";
    case 4:
      return chance(rng, 0.3) ? "return;" : "return " + rand_expr(rng, depth) + ";";
    default: {
      std::string body = rand_statement(rng, 1);
      if (chance(rng, 0.4)) {
        return "if (" + rand_expr(rng, 1) + ") { " + body + " }";
      }
      return "if (" + rand_expr(rng, 1) + ") { " + body + " } else { " +
             rand_statement(rng, 1) + " }";
    }
  }
}

inline std::vector<std::string> rand_statements(Rng& rng, int count) {
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(rand_statement(rng));
  return out;
}

inline std::string join_lines(const std::vector<std::string>& stmts) {
  std::string text;
  for (const auto& s : stmts) {
    text += s;
    text += '\n';
  }
  return text;
}

/// A random toy program whose tree stays at or below `max_nodes`.
/// Statements are dropped from the tail until the budget holds.
inline treedit::ast::Ast rand_toy_tree(Rng& rng, int max_nodes) {
  std::vector<std::string> stmts = rand_statements(rng, pick(rng, 1, 5));
  for (;;) {
    treedit::ast::Ast t = treedit::toy::parse_toy(join_lines(stmts)).tree;
    if (static_cast<int>(t.size()) <= max_nodes || stmts.size() == 1) return t;
    stmts.pop_back();
  }
}

/// Random list-level and token-level edits of a statement list, giving
/// before/after pairs that share structure (so diffs produce real MOV,
/// UPD, INS and DEL mixes rather than wholesale rewrites).
inline std::vector<std::string> mutate_statements(Rng& rng, std::vector<std::string> stmts) {
  int edits = pick(rng, 1, 3);
  for (int e = 0; e < edits; ++e) {
    int which = pick(rng, 0, 4);
    int n = static_cast<int>(stmts.size());
    if (which == 0 && n > 1) {  // delete one
      stmts.erase(stmts.begin() + pick(rng, 0, n - 1));
    } else if (which == 1) {  // insert one
      stmts.insert(stmts.begin() + pick(rng, 0, n), rand_statement(rng));
    } else if (which == 2 && n > 1) {  // move one
      int from = pick(rng, 0, n - 1);
      std::string s = stmts[static_cast<size_t>(from)];
      stmts.erase(stmts.begin() + from);
      stmts.insert(stmts.begin() + pick(rng, 0, n - 2), s);
    } else if (which == 3) {  // replace one
      stmts[static_cast<size_t>(pick(rng, 0, n - 1))] = rand_statement(rng);
    } else {  // rename a token inside one statement
      std::string& s = stmts[static_cast<size_t>(pick(rng, 0, n - 1))];
      const std::string from = rand_name(rng), to = rand_name(rng);
      size_t at = s.find(from);
      bool boundary = at != std::string::npos &&
                      (at + from.size() == s.size() ||
                       !std::isalnum(static_cast<unsigned char>(s[at + from.size()]))) &&
                      (at == 0 || !std::isalnum(static_cast<unsigned char>(s[at - 1])));
      if (boundary) s = s.substr(0, at) + to + s.substr(at + from.size());
    }
  }
  return stmts;
}

/// A before/after pair: either independent programs or a mutation of a
/// shared base, both capped at `max_nodes`.
inline std::pair<treedit::ast::Ast, treedit::ast::Ast> rand_tree_pair(Rng& rng, int max_nodes) {
  if (chance(rng, 0.4)) {
    return {rand_toy_tree(rng, max_nodes), rand_toy_tree(rng, max_nodes)};
  }
  std::vector<std::string> base = rand_statements(rng, pick(rng, 1, 5));
  std::vector<std::string> after = mutate_statements(rng, base);
  for (;;) {
    treedit::ast::Ast a = treedit::toy::parse_toy(join_lines(base)).tree;
    treedit::ast::Ast b = treedit::toy::parse_toy(join_lines(after)).tree;
    if (static_cast<int>(a.size()) <= max_nodes && static_cast<int>(b.size()) <= max_nodes)
      return {std::move(a), std::move(b)};
    if (base.size() > 1) base.pop_back();
    if (after.size() > 1) after.pop_back();
    if (base.size() == 1 && after.size() == 1) {
      return {treedit::toy::parse_toy(join_lines(base)).tree,
              treedit::toy::parse_toy(join_lines(after)).tree};
    }
  }
}

// ====== generic (non-toy) trees ======

/// A random tree over a tiny alphabet, for structural tests that do not
/// care about the toy grammar. Terminal kinds carry values.
inline treedit::ast::Ast rand_generic_tree(Rng& rng, int node_budget) {
  using treedit::ast::Ast;
  using treedit::ast::NodeId;
  static const char* nonterminals[] = {"N0", "N1", "N2"};
  static const char* terminals[] = {"T0", "T1"};
  static const char* values[] = {"u", "v", "w"};
  Ast t;
  NodeId root = t.add_node("N0", treedit::ast::kNoNode);
  std::vector<NodeId> open = {root};
  int made = 1;
  while (made < node_budget && !open.empty()) {
    NodeId parent = open[static_cast<size_t>(pick(rng, 0, static_cast<int>(open.size()) - 1))];
    if (chance(rng, 0.35)) {
      t.add_node(terminals[pick(rng, 0, 1)], parent, true, values[pick(rng, 0, 2)]);
    } else {
      open.push_back(t.add_node(nonterminals[pick(rng, 0, 2)], parent));
    }
    ++made;
    if (open.size() > 4 && chance(rng, 0.5))
      open.erase(open.begin() + pick(rng, 0, static_cast<int>(open.size()) - 1));
  }
  return t;
}

}  // namespace testgen
