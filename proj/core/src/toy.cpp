#include "treedit/toy.hpp"

#include <cctype>

namespace treedit::toy {

using ast::kNoNode;
using ast::NodeId;

namespace {

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& cur() const { return cur_; }

  void advance() {
    skip_ws();
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= text_.size()) {
      cur_.type = Tok::End;
      cur_.text.clear();
      return;
    }
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      cur_.type = Tok::Ident;
      cur_.text.clear();
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        cur_.text.push_back(take());
      }
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur_.type = Tok::Number;
      cur_.text.clear();
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '.')) {
        cur_.text.push_back(take());
      }
      return;
    }
    if (c == '"') {
      cur_.type = Tok::String;
      cur_.text.clear();
      cur_.text.push_back(take());
      while (true) {
        if (pos_ >= text_.size()) fail("unterminated string literal");
        char d = take();
        cur_.text.push_back(d);
        if (d == '\\') {
          if (pos_ >= text_.size()) fail("unterminated escape");
          cur_.text.push_back(take());
        } else if (d == '"') {
          break;
        }
      }
      return;
    }
    cur_.type = Tok::Punct;
    cur_.text.clear();
    cur_.text.push_back(take());
    if ((cur_.text[0] == '=' || cur_.text[0] == '!' || cur_.text[0] == '<' ||
         cur_.text[0] == '>') &&
        pos_ < text_.size() && text_[pos_] == '=') {
      cur_.text.push_back(take());
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, cur_.line, cur_.col);
  }

private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      take();
    }
  }

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

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token cur_;
};

bool is_keyword(const std::string& s) {
  return s == "return" || s == "if" || s == "else" || s == "true" ||
         s == "false" || s == "null";
}

class Parser {
public:
  explicit Parser(const std::string& text) : lx_(text) {}

  ToyProgram parse() {
    ToyProgram prog;
    NodeId unit = prog.tree.add_node("Unit", kNoNode);
    while (lx_.cur().type != Tok::End) {
      int first = lx_.cur().line;
      stmt(prog.tree, unit);
      prog.stmt_spans.push_back({first, last_line_});
    }
    return prog;
  }

private:
  bool at_punct(const char* p) const {
    return lx_.cur().type == Tok::Punct && lx_.cur().text == p;
  }
  bool at_ident(const char* k) const {
    return lx_.cur().type == Tok::Ident && lx_.cur().text == k;
  }

  void eat() {
    last_line_ = lx_.cur().line;
    lx_.advance();
  }

  void expect(const char* p) {
    if (!at_punct(p)) lx_.fail(std::string("expected '") + p + "'");
    eat();
  }

  void stmt(Ast& t, NodeId parent) {
    if (at_ident("return")) {
      eat();
      NodeId ret = t.add_node("Return", parent);
      if (!at_punct(";")) expr(t, ret);
      expect(";");
      return;
    }
    if (at_ident("if")) {
      eat();
      NodeId iff = t.add_node("If", parent);
      expect("(");
      expr(t, iff);
      expect(")");
      block(t, iff);
      if (at_ident("else")) {
        eat();
        block(t, iff);
      }
      return;
    }
    // Assignment or expression statement: parse the expression first and
    // decide on the '=' that may follow.
    Ast scratch;
    NodeId sroot = scratch.add_node("Holder", kNoNode);
    expr(scratch, sroot);
    if (at_punct("=")) {
      NodeId lv = scratch.node(sroot).children[0];
      const std::string& k = scratch.node(lv).kind;
      if (k != "Name" && k != "Navigation") {
        lx_.fail("left side of '=' must be a name or member");
      }
      eat();
      NodeId asg = t.add_node("Assign", parent);
      t.graft(scratch, lv, asg, 0);
      expr(t, asg);
      expect(";");
      return;
    }
    NodeId es = t.add_node("Expr", parent);
    t.graft(scratch, scratch.node(sroot).children[0], es, 0);
    expect(";");
  }

  void block(Ast& t, NodeId parent) {
    expect("{");
    NodeId blk = t.add_node("Block", parent);
    while (!at_punct("}")) {
      if (lx_.cur().type == Tok::End) lx_.fail("unterminated block");
      stmt(t, blk);
    }
    expect("}");
  }

  // expr := cmp ; cmp := add (cmpop add)* ; add := mul (addop mul)* ;
  // mul := postfix (mulop postfix)*. All left-associative.
  void expr(Ast& t, NodeId parent) { binary(t, parent, 0); }

  bool at_level_op(int level) const {
    if (lx_.cur().type != Tok::Punct) return false;
    const std::string& s = lx_.cur().text;
    switch (level) {
      case 0:
        return s == "==" || s == "!=" || s == "<" || s == ">" || s == "<=" ||
               s == ">=";
      case 1:
        return s == "+" || s == "-";
      default:
        return s == "*" || s == "/";
    }
  }

  void binary(Ast& t, NodeId parent, int level) {
    if (level > 2) {
      postfix(t, parent);
      return;
    }
    // Build into a scratch holder so a later operator can wrap the lhs.
    Ast scratch;
    NodeId hold = scratch.add_node("Holder", kNoNode);
    binary(scratch, hold, level + 1);
    while (at_level_op(level)) {
      std::string op = lx_.cur().text;
      eat();
      Ast next;
      NodeId h2 = next.add_node("Holder", kNoNode);
      NodeId bin = next.add_node("Binary", h2);
      next.graft(scratch, scratch.node(hold).children[0], bin, 0);
      next.add_node("Operator", bin, true, op);
      binary(next, bin, level + 1);
      scratch = std::move(next);
      hold = h2;
    }
    t.graft(scratch, scratch.node(hold).children[0], parent,
            t.node(parent).children.size());
  }

  void postfix(Ast& t, NodeId parent) {
    Ast scratch;
    NodeId hold = scratch.add_node("Holder", kNoNode);
    primary(scratch, hold);
    while (at_punct(".") || at_punct("(")) {
      Ast next;
      NodeId h2 = next.add_node("Holder", kNoNode);
      if (at_punct(".")) {
        eat();
        if (lx_.cur().type != Tok::Ident || is_keyword(lx_.cur().text)) {
          lx_.fail("expected a member name after '.'");
        }
        NodeId nav = next.add_node("Navigation", h2);
        next.graft(scratch, scratch.node(hold).children[0], nav, 0);
        next.add_node("Name", nav, true, lx_.cur().text);
        eat();
      } else {
        eat();
        NodeId call = next.add_node("Call", h2);
        next.graft(scratch, scratch.node(hold).children[0], call, 0);
        NodeId args = next.add_node("ArgList", call);
        if (!at_punct(")")) {
          while (true) {
            NodeId arg = next.add_node("Arg", args);
            expr(next, arg);
            if (at_punct(",")) {
              eat();
              continue;
            }
            break;
          }
        }
        expect(")");
      }
      scratch = std::move(next);
      hold = h2;
    }
    t.graft(scratch, scratch.node(hold).children[0], parent,
            t.node(parent).children.size());
  }

  void primary(Ast& t, NodeId parent) {
    const Token& tk = lx_.cur();
    if (tk.type == Tok::Ident) {
      if (tk.text == "true" || tk.text == "false" || tk.text == "null") {
        t.add_node("Literal", parent, true, tk.text);
        eat();
        return;
      }
      if (is_keyword(tk.text)) lx_.fail("unexpected keyword " + tk.text);
      t.add_node("Name", parent, true, tk.text);
      eat();
      return;
    }
    if (tk.type == Tok::Number || tk.type == Tok::String) {
      t.add_node("Literal", parent, true, tk.text);
      eat();
      return;
    }
    if (at_punct("(")) {
      eat();
      expr(t, parent);
      expect(")");
      return;
    }
    lx_.fail("expected an expression");
  }

  Lexer lx_;
  int last_line_ = 1;
};

// ====== printer ======

void print_expr(const Ast& t, NodeId id, std::string& out) {
  const auto& n = t.node(id);
  if (n.kind == "Name" || n.kind == "Literal") {
    out += n.value;
    return;
  }
  if (n.kind == "Navigation") {
    print_expr(t, n.children[0], out);
    out.push_back('.');
    out += t.node(n.children[1]).value;
    return;
  }
  if (n.kind == "Call") {
    print_expr(t, n.children[0], out);
    out.push_back('(');
    const auto& args = t.node(n.children[1]);
    bool first = true;
    for (NodeId arg : args.children) {
      if (!first) out += ", ";
      first = false;
      print_expr(t, t.node(arg).children[0], out);
    }
    out.push_back(')');
    return;
  }
  if (n.kind == "Binary") {
    // Parenthesize nested binaries; parens are transparent on re-parse.
    auto operand = [&](NodeId c) {
      bool wrap = t.node(c).kind == "Binary";
      if (wrap) out.push_back('(');
      print_expr(t, c, out);
      if (wrap) out.push_back(')');
    };
    operand(n.children[0]);
    out.push_back(' ');
    out += t.node(n.children[1]).value;
    out.push_back(' ');
    operand(n.children[2]);
    return;
  }
  throw std::logic_error("print_toy: unexpected kind " + n.kind);
}

void print_stmt(const Ast& t, NodeId id, int indent, std::string& out) {
  const auto& n = t.node(id);
  out.append(static_cast<size_t>(indent) * 2, ' ');
  if (n.kind == "Return") {
    out += "return";
    if (!n.children.empty()) {
      out.push_back(' ');
      print_expr(t, n.children[0], out);
    }
    out += ";\n";
    return;
  }
  if (n.kind == "Assign") {
    print_expr(t, n.children[0], out);
    out += " = ";
    print_expr(t, n.children[1], out);
    out += ";\n";
    return;
  }
  if (n.kind == "Expr") {
    print_expr(t, n.children[0], out);
    out += ";\n";
    return;
  }
  if (n.kind == "If") {
    out += "if (";
    print_expr(t, n.children[0], out);
    out += ") {\n";
    for (NodeId s : t.node(n.children[1]).children) {
      print_stmt(t, s, indent + 1, out);
    }
    out.append(static_cast<size_t>(indent) * 2, ' ');
    out += "}";
    if (n.children.size() > 2) {
      out += " else {\n";
      for (NodeId s : t.node(n.children[2]).children) {
        print_stmt(t, s, indent + 1, out);
      }
      out.append(static_cast<size_t>(indent) * 2, ' ');
      out += "}";
    }
    out += "\n";
    return;
  }
  throw std::logic_error("print_toy: unexpected statement kind " + n.kind);
}

}  // namespace

ToyProgram parse_toy(const std::string& text) {
  return Parser(text).parse();
}

std::string print_toy(const Ast& tree) {
  const auto& root = tree.node(tree.root());
  if (root.kind != "Unit") throw std::logic_error("print_toy: root not Unit");
  std::string out;
  for (NodeId s : root.children) print_stmt(tree, s, 0, out);
  return out;
}

const GrammarVocab& toy_vocab() {
  static const GrammarVocab vocab = [] {
    GrammarVocab v;
    v.symbols = {"Unit", "Expr",    "Assign",  "Return",     "If",
                 "Block", "Call",    "ArgList", "Arg",        "Navigation",
                 "Binary", "Name",   "Literal", "Operator"};
    v.terminals = {"Name", "Literal", "Operator"};
    v.max_child_index = 31;
    return v;
  }();
  return vocab;
}

}  // namespace treedit::toy
