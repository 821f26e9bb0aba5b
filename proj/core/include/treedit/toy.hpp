#pragma once

/**
 * A miniature imperative language used as the tree source.
 *
 * Statements: assignment, return, if/else, expression statements.
 * Expressions: calls with argument lists, names, literals, binary
 * operators, member navigation. Parentheses group but produce no node.
 *
 * Shapes (s-expression view):
 *   a.b(x);      (Expr (Call (Navigation (Name "a") (Name "b"))
 *                            (ArgList (Arg (Name "x")))))
 *   v = 1 + w;   (Assign (Name "v") (Binary (Literal "1") (Operator "+")
 *                                           (Name "w")))
 *   return f(x); (Return (Call (Name "f") (ArgList (Arg (Name "x")))))
 *   if (c) { } else { }   (If (Name "c") (Block) (Block))
 */

#include <string>
#include <vector>

#include "treedit/ast.hpp"
#include "treedit/errors.hpp"

namespace treedit::toy {

using ast::Ast;
using ast::GrammarVocab;

/// 1-based inclusive source line span of one top-level statement.
struct LineSpan {
  int first = 0;
  int last = 0;
};

struct ToyProgram {
  Ast tree;  // root kind Unit, ids in pre-order
  std::vector<LineSpan> stmt_spans;  // parallel to the root's children
};

/// Parses a whole program. Throws ParseError with 1-based position.
ToyProgram parse_toy(const std::string& text);

/// Renders a tree back to source, one statement per line, blocks
/// indented. parse_toy(print_toy(t)).tree is isomorphic to t.
std::string print_toy(const Ast& tree);

/// The fixed grammar symbol table (11 nonterminals, 3 terminals).
const GrammarVocab& toy_vocab();

}  // namespace treedit::toy
