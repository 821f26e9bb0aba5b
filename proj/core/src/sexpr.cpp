#include "treedit/sexpr.hpp"

#include <cctype>

namespace treedit::ast {

namespace {

class Scanner {
public:
  explicit Scanner(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col_);
  }

  bool eof() const { return pos_ >= text_.size(); }

  char peek() const { return text_[pos_]; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) take();
  }

  void expect(char c) {
    if (eof() || peek() != c) {
      fail(std::string("expected '") + c + "'");
    }
    take();
  }

private:
  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

bool kind_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c));
}
bool kind_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string scan_kind(Scanner& s) {
  if (s.eof() || !kind_start(s.peek())) s.fail("expected a kind symbol");
  std::string kind;
  kind.push_back(s.take());
  while (!s.eof() && kind_char(s.peek())) kind.push_back(s.take());
  return kind;
}

std::string scan_string(Scanner& s) {
  s.expect('"');
  std::string value;
  while (true) {
    if (s.eof()) s.fail("unterminated string");
    char c = s.take();
    if (c == '"') break;
    if (c == '\\') {
      if (s.eof()) s.fail("unterminated escape");
      char e = s.take();
      if (e != '"' && e != '\\') s.fail("unknown escape");
      value.push_back(e);
    } else {
      value.push_back(c);
    }
  }
  return value;
}

NodeId parse_node(Scanner& s, Ast& tree, NodeId parent,
                  const GrammarVocab* vocab) {
  s.skip_ws();
  s.expect('(');
  s.skip_ws();
  std::string kind = scan_kind(s);
  s.skip_ws();
  if (!s.eof() && s.peek() == '"') {
    std::string value = scan_string(s);
    s.skip_ws();
    s.expect(')');
    if (vocab) {
      if (!vocab->contains(kind)) s.fail("unknown kind: " + kind);
      if (!vocab->is_terminal(kind)) {
        s.fail("nonterminal kind used with a value: " + kind);
      }
    }
    return tree.add_node(std::move(kind), parent, true, std::move(value));
  }
  if (vocab) {
    if (!vocab->contains(kind)) s.fail("unknown kind: " + kind);
    if (vocab->is_terminal(kind)) {
      s.fail("terminal kind used without a value: " + kind);
    }
  }
  NodeId id = tree.add_node(std::move(kind), parent);
  while (true) {
    s.skip_ws();
    if (s.eof()) s.fail("unterminated node");
    if (s.peek() == ')') {
      s.take();
      return id;
    }
    parse_node(s, tree, id, vocab);
  }
}

void serialize_node(const Ast& tree, NodeId id, std::string& out) {
  const AstNode& n = tree.node(id);
  out.push_back('(');
  out += n.kind;
  if (n.terminal) {
    out.push_back(' ');
    append_quoted(out, n.value);
  } else {
    for (NodeId ch : n.children) {
      out.push_back(' ');
      serialize_node(tree, ch, out);
    }
  }
  out.push_back(')');
}

}  // namespace

void append_quoted(std::string& out, const std::string& value) {
  out.push_back('"');
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

Ast parse_interchange(const std::string& text, const GrammarVocab* vocab) {
  Scanner s(text);
  Ast tree;
  parse_node(s, tree, kNoNode, vocab);
  s.skip_ws();
  if (!s.eof()) s.fail("trailing content after tree");
  return tree;
}

std::string serialize_interchange(const Ast& tree, NodeId id) {
  std::string out;
  serialize_node(tree, id, out);
  return out;
}

std::string serialize_interchange(const Ast& tree) {
  if (tree.empty()) throw std::logic_error("serialize: empty tree");
  return serialize_interchange(tree, tree.root());
}

}  // namespace treedit::ast
