#pragma once

/**
 * S-expression interchange format for trees.
 *
 *   node   := "(" KIND (STRING | node*) ")"
 *   KIND   := [A-Za-z][A-Za-z0-9_]*
 *   STRING := double-quoted; backslash escapes quote and backslash
 *
 * A node with a STRING is a terminal; anything else is a nonterminal
 * (possibly with zero children). Whitespace including newlines is
 * insignificant outside strings and significant inside them. Text is
 * treated as UTF-8 and passed through byte for byte.
 *
 * The canonical serialization puts the whole tree on one line with a
 * single space between siblings: (Call (Name "f") (ArgList)).
 */

#include <string>

#include "treedit/ast.hpp"
#include "treedit/errors.hpp"

namespace treedit::ast {

/// Parses one tree; node ids come out in pre-order. Rejects trailing
/// content after the closing paren. If `vocab` is given, unknown kinds
/// and terminal/nonterminal mismatches are parse errors.
Ast parse_interchange(const std::string& text,
                      const GrammarVocab* vocab = nullptr);

/// Canonical single-space form; parse_interchange(serialize(t)) == t
/// whenever t's ids are in pre-order.
std::string serialize_interchange(const Ast& tree);

/// Serializes the subtree rooted at `id`.
std::string serialize_interchange(const Ast& tree, NodeId id);

/// Appends one string literal with escaping, including the quotes.
void append_quoted(std::string& out, const std::string& value);

}  // namespace treedit::ast
