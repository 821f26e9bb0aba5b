#include "treedit/edit_script.hpp"

#include <charconv>

#include "treedit/sexpr.hpp"

namespace treedit::diff {

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Mov: return "MOV";
    case OpKind::Del: return "DEL";
    case OpKind::Upd: return "UPD";
    case OpKind::Ins: return "INS";
  }
  return "?";
}

EditOp EditOp::mov(NodeId src, Gap g) {
  EditOp op;
  op.kind = OpKind::Mov;
  op.src = src;
  op.gap = g;
  return op;
}

EditOp EditOp::del(NodeId src) {
  EditOp op;
  op.kind = OpKind::Del;
  op.src = src;
  return op;
}

EditOp EditOp::upd(std::string value, NodeId tgt) {
  EditOp op;
  op.kind = OpKind::Upd;
  op.value = std::move(value);
  op.tgt = tgt;
  return op;
}

EditOp EditOp::ins(Ast subtree, Gap g) {
  EditOp op;
  op.kind = OpKind::Ins;
  op.subtree = std::move(subtree);
  op.gap = g;
  return op;
}

bool same_op(const EditOp& a, const EditOp& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case OpKind::Mov: return a.src == b.src && a.gap == b.gap;
    case OpKind::Del: return a.src == b.src;
    case OpKind::Upd: return a.value == b.value && a.tgt == b.tgt;
    case OpKind::Ins:
      return a.gap == b.gap && isomorphic(a.subtree, b.subtree);
  }
  return false;
}

namespace {

// Destination resolved against the current tree: parent plus child index.
struct Slot {
  NodeId parent;
  size_t index;
};

Slot resolve_gap(const Ast& w, const Gap& gap, const char* what) {
  if (!w.alive(gap.anchor)) {
    throw ApplyError(std::string(what) + ": gap anchor " +
                     std::to_string(gap.anchor) + " is not a live node");
  }
  const auto& anchor = w.node(gap.anchor);
  if (gap.leftmost) {
    if (anchor.terminal) {
      throw ApplyError(std::string(what) +
                       ": cannot place children under a terminal");
    }
    return {gap.anchor, 0};
  }
  if (anchor.parent == ast::kNoNode) {
    throw ApplyError(std::string(what) + ": the root cannot have siblings");
  }
  return {anchor.parent,
          static_cast<size_t>(w.child_index(gap.anchor)) + 1};
}

void check_live(const Ast& w, NodeId id, const char* what) {
  if (!w.alive(id)) {
    throw ApplyError(std::string(what) + ": node " + std::to_string(id) +
                     " is not a live node");
  }
}

}  // namespace

Ast apply_script(const Ast& tree, const EditScript& script) {
  Ast w = tree;
  for (const EditOp& op : script) {
    switch (op.kind) {
      case OpKind::Mov: {
        check_live(w, op.src, "MOV");
        if (op.src == w.root()) throw ApplyError("MOV: cannot move the root");
        if (w.alive(op.gap.anchor) && w.is_ancestor(op.src, op.gap.anchor)) {
          throw ApplyError("MOV: destination lies inside the moved subtree");
        }
        // Detach before resolving: when source and anchor share a parent
        // the anchor's child index must be taken from the shrunken list.
        w.detach(op.src);
        Slot slot = resolve_gap(w, op.gap, "MOV");
        w.attach(op.src, slot.parent, slot.index);
        break;
      }
      case OpKind::Del: {
        check_live(w, op.src, "DEL");
        if (op.src == w.root()) throw ApplyError("DEL: cannot delete the root");
        w.erase(op.src);
        break;
      }
      case OpKind::Upd: {
        check_live(w, op.tgt, "UPD");
        if (!w.node(op.tgt).terminal) {
          throw ApplyError("UPD: node " + std::to_string(op.tgt) +
                           " is not a terminal");
        }
        w.set_value(op.tgt, op.value);
        break;
      }
      case OpKind::Ins: {
        if (op.subtree.empty()) throw ApplyError("INS: empty subtree");
        Slot slot = resolve_gap(w, op.gap, "INS");
        w.graft(op.subtree, op.subtree.root(), slot.parent, slot.index);
        break;
      }
    }
  }
  return w;
}

// ====== text form ======

namespace {

void append_gap(std::string& out, const Gap& gap) {
  if (gap.leftmost) {
    out += "first(";
    out += std::to_string(gap.anchor);
    out += ")";
  } else {
    out += std::to_string(gap.anchor);
  }
}

class LineScanner {
public:
  LineScanner(const std::string& line, int lineno)
      : line_(line), lineno_(lineno) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, lineno_, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < line_.size() && line_[pos_] == ' ') ++pos_;
  }

  bool eof() {
    skip_ws();
    return pos_ >= line_.size();
  }

  std::string word() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ') ++pos_;
    if (start == pos_) fail("expected a token");
    return line_.substr(start, pos_ - start);
  }

  NodeId number() {
    std::string w = word();
    NodeId v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size()) {
      fail("expected a node id, got '" + w + "'");
    }
    return v;
  }

  Gap gap() {
    std::string w = word();
    if (w.rfind("first(", 0) == 0 && w.back() == ')') {
      std::string inner = w.substr(6, w.size() - 7);
      NodeId v = 0;
      auto [p, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), v);
      if (ec != std::errc() || p != inner.data() + inner.size()) {
        fail("expected first(<id>), got '" + w + "'");
      }
      return Gap::first(v);
    }
    NodeId v = 0;
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size()) {
      fail("expected a gap, got '" + w + "'");
    }
    return Gap::after(v);
  }

  /// A double-quoted string with \" and \\ escapes.
  std::string quoted() {
    skip_ws();
    if (pos_ >= line_.size() || line_[pos_] != '"') fail("expected a string");
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= line_.size()) fail("unterminated string");
      char c = line_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= line_.size()) fail("unterminated escape");
        char e = line_[pos_++];
        if (e != '"' && e != '\\') fail("unknown escape");
        out.push_back(e);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  /// One balanced s-expression, tracked through strings.
  std::string sexpr() {
    skip_ws();
    if (pos_ >= line_.size() || line_[pos_] != '(') fail("expected '('");
    size_t start = pos_;
    int depth = 0;
    bool in_string = false;
    while (pos_ < line_.size()) {
      char c = line_[pos_++];
      if (in_string) {
        if (c == '\\') {
          if (pos_ < line_.size()) ++pos_;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '(') {
        ++depth;
      } else if (c == ')') {
        --depth;
        if (depth == 0) return line_.substr(start, pos_ - start);
      }
    }
    fail("unbalanced s-expression");
  }

private:
  const std::string& line_;
  int lineno_;
  size_t pos_ = 0;
};

}  // namespace

std::string serialize_script(const EditScript& script) {
  std::string out;
  for (const EditOp& op : script) {
    out += op_name(op.kind);
    out.push_back(' ');
    switch (op.kind) {
      case OpKind::Mov:
        out += std::to_string(op.src);
        out.push_back(' ');
        append_gap(out, op.gap);
        break;
      case OpKind::Del:
        out += std::to_string(op.src);
        break;
      case OpKind::Upd:
        ast::append_quoted(out, op.value);
        out.push_back(' ');
        out += std::to_string(op.tgt);
        break;
      case OpKind::Ins:
        out += ast::serialize_interchange(op.subtree);
        out.push_back(' ');
        append_gap(out, op.gap);
        break;
    }
    out.push_back('\n');
  }
  return out;
}

EditScript parse_script(const std::string& text) {
  EditScript script;
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    std::string line = text.substr(
        pos, end == std::string::npos ? std::string::npos : end - pos);
    ++lineno;
    pos = end == std::string::npos ? text.size() + 1 : end + 1;
    if (line.find_first_not_of(' ') == std::string::npos) continue;
    LineScanner s(line, lineno);
    std::string opcode = s.word();
    if (opcode == "MOV") {
      NodeId src = s.number();
      script.push_back(EditOp::mov(src, s.gap()));
    } else if (opcode == "DEL") {
      script.push_back(EditOp::del(s.number()));
    } else if (opcode == "UPD") {
      std::string value = s.quoted();
      script.push_back(EditOp::upd(std::move(value), s.number()));
    } else if (opcode == "INS") {
      Ast subtree = ast::parse_interchange(s.sexpr());
      script.push_back(EditOp::ins(std::move(subtree), s.gap()));
    } else {
      s.fail("unknown op '" + opcode + "'");
    }
    if (!s.eof()) s.fail("trailing content after op");
  }
  return script;
}

}  // namespace treedit::diff
