#include "doctest.h"
#include "helpers.hpp"
#include "treedit/errors.hpp"
#include "treedit/sexpr.hpp"
#include "treedit/toy.hpp"

using namespace treedit::toy;
using treedit::ParseError;
using treedit::ast::Ast;
using treedit::ast::parse_interchange;
using treedit::ast::serialize_interchange;

namespace {
std::string shape(const std::string& source) {
  return serialize_interchange(parse_toy(source).tree);
}
}  // namespace

TEST_CASE("statement forms produce the documented shapes") {
  CHECK(shape("a.b(x);\n") ==
        R"((Unit (Expr (Call (Navigation (Name "a") (Name "b")) (ArgList (Arg (Name "x")))))))");
  CHECK(shape("v = 1 + w;\n") ==
        R"((Unit (Assign (Name "v") (Binary (Literal "1") (Operator "+") (Name "w")))))");
  CHECK(shape("return f(x);\n") ==
        R"((Unit (Return (Call (Name "f") (ArgList (Arg (Name "x")))))))");
  CHECK(shape("if (c) { } else { }\n") == R"((Unit (If (Name "c") (Block) (Block))))");
  CHECK(shape("return;\n") == R"((Unit (Return)))");
  CHECK(shape("f();\n") == R"((Unit (Expr (Call (Name "f") (ArgList)))))");
  CHECK(shape("a.b = null;\n") ==
        R"((Unit (Assign (Navigation (Name "a") (Name "b")) (Literal "null"))))");
}

TEST_CASE("operator precedence and associativity") {
  CHECK(shape("x = a + b * c;\n") ==
        R"((Unit (Assign (Name "x") (Binary (Name "a") (Operator "+") )"
        R"((Binary (Name "b") (Operator "*") (Name "c"))))))");
  // Left-associative: (a - b) - c.
  CHECK(shape("x = a - b - c;\n") ==
        R"((Unit (Assign (Name "x") (Binary (Binary (Name "a") (Operator "-") (Name "b")) )"
        R"((Operator "-") (Name "c")))))");
  // Parentheses group without adding a node.
  CHECK(shape("x = (a + b) * c;\n") ==
        R"((Unit (Assign (Name "x") (Binary (Binary (Name "a") (Operator "+") (Name "b")) )"
        R"((Operator "*") (Name "c")))))");
  CHECK(shape("x = a < b == c;\n") ==
        shape("x = (a < b) == c;\n"));
}

TEST_CASE("statement spans are 1-based inclusive line ranges") {
  ToyProgram p = parse_toy("x = 1;\nif (c) {\n  y = 2;\n  z = 3;\n}\nreturn x;\n");
  REQUIRE(p.stmt_spans.size() == 3);
  CHECK(p.stmt_spans[0].first == 1);
  CHECK(p.stmt_spans[0].last == 1);
  CHECK(p.stmt_spans[1].first == 2);
  CHECK(p.stmt_spans[1].last == 5);
  CHECK(p.stmt_spans[2].first == 6);
  CHECK(p.stmt_spans[2].last == 6);
}

TEST_CASE("an empty program is a bare Unit") {
  ToyProgram p = parse_toy("");
  CHECK(p.tree.size() == 1);
  CHECK(p.tree.node(p.tree.root()).kind == "Unit");
  CHECK(p.stmt_spans.empty());
  CHECK(parse_toy("  \n\n \t\n").tree.size() == 1);
}

TEST_CASE("parse errors carry the offending position") {
  try {
    parse_toy("x = 1;\ny = ;\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(parse_toy("x = 1\n"), ParseError);          // missing ';'
  CHECK_THROWS_AS(parse_toy("if (c) { x = 1;\n"), ParseError);  // open block
  CHECK_THROWS_AS(parse_toy("1 = x;\n"), ParseError);          // bad lvalue
  CHECK_THROWS_AS(parse_toy("f(x) = 1;\n"), ParseError);       // bad lvalue
  CHECK_THROWS_AS(parse_toy("return truex x;\n"), ParseError);
  CHECK_THROWS_AS(parse_toy("x = \"open;\n"), ParseError);
}

TEST_CASE("print_toy inverts parse_toy on random programs") {
  testgen::Rng rng(808);
  for (int i = 0; i < 150; ++i) {
    Ast t = testgen::rand_toy_tree(rng, 60);
    std::string printed = print_toy(t);
    Ast back = parse_toy(printed).tree;
    CHECK(isomorphic(t, back));
    // Printing is canonical: a second round is byte-stable.
    CHECK(print_toy(back) == printed);
  }
}

TEST_CASE("printer rejects shapes the grammar cannot produce") {
  Ast bogus;
  bogus.add_node("Widget", treedit::ast::kNoNode);
  CHECK_THROWS_AS((void)print_toy(bogus), std::logic_error);
}

TEST_CASE("toy vocabulary lists every produced kind") {
  const treedit::ast::GrammarVocab& v = toy_vocab();
  CHECK(v.symbols.size() == 14);
  CHECK(v.terminals.size() == 3);
  for (const char* k :
       {"Unit", "Assign", "Return", "If", "Block", "Expr", "Call", "ArgList", "Arg",
        "Navigation", "Binary", "Name", "Literal", "Operator"}) {
    CHECK(v.contains(k));
  }
  CHECK(v.is_terminal("Name"));
  CHECK(v.is_terminal("Literal"));
  CHECK(v.is_terminal("Operator"));
  CHECK(v.max_child_index == 31);
}
