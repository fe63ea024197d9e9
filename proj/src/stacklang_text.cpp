#include "polybridge/lexer.hpp"
#include "polybridge/stacklang.hpp"

namespace polybridge::stack {

namespace {

void inline_prog(const Program& p, std::string& out);

void value_text(const Value& v, std::string& out) {
  if (auto n = v.as_int()) {
    out += std::to_string(*n);
  } else if (auto l = v.as_loc()) {
    out += "&" + std::to_string(l->id);
  } else if (auto r = v.as_var()) {
    out += r->name;
  } else if (auto a = v.as_array()) {
    out += '[';
    bool first = true;
    for (const auto& e : *a->elems) {
      if (!first) out += ", ";
      first = false;
      value_text(e, out);
    }
    out += ']';
  } else if (auto t = v.as_thunk()) {
    out += "(thunk ";
    inline_prog(*t->body, out);
    out += ')';
  }
}

void instr_text(const Instr& in, std::string& out) {
  switch (in.op) {
    case Op::Push: out += "push "; value_text(in.value, out); break;
    case Op::Add: out += "add"; break;
    case Op::Less: out += "less?"; break;
    case Op::Call: out += "call"; break;
    case Op::Idx: out += "idx"; break;
    case Op::Len: out += "len"; break;
    case Op::Alloc: out += "alloc"; break;
    case Op::Read: out += "read"; break;
    case Op::Write: out += "write"; break;
    case Op::Fail: out += "fail "; out += error_name(in.code); break;
    case Op::Hole: out += "<" + in.hole + ">"; break;
    case Op::If0:
      out += "if0 ";
      inline_prog(*in.body, out);
      out += ' ';
      inline_prog(*in.alt, out);
      break;
    case Op::Lam:
      out += "lam";
      for (const auto& x : in.params) out += " " + x;
      out += ' ';
      inline_prog(*in.body, out);
      break;
  }
}

void inline_prog(const Program& p, std::string& out) {
  if (p.empty()) {
    out += "{ }";
    return;
  }
  out += "{ ";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += "; ";
    instr_text(p[i], out);
  }
  out += " }";
}

void block_lines(const Program& p, int indent, std::string& out);

void instr_lines(const Instr& in, int indent, std::string& out) {
  std::string pad(indent * 2, ' ');
  auto block = [&](const Program& b) {
    if (b.empty()) {
      out += "{ }";
      return;
    }
    out += "{\n";
    block_lines(b, indent + 1, out);
    out += pad + "}";
  };
  out += pad;
  if (in.op == Op::Lam) {
    out += "lam";
    for (const auto& x : in.params) out += " " + x;
    out += ' ';
    block(*in.body);
  } else if (in.op == Op::If0) {
    out += "if0 ";
    block(*in.body);
    out += ' ';
    block(*in.alt);
  } else if (in.op == Op::Push && in.value.as_thunk()) {
    out += "push (thunk ";
    block(*in.value.as_thunk()->body);
    out += ")";
  } else {
    instr_text(in, out);
  }
  out += '\n';
}

void block_lines(const Program& p, int indent, std::string& out) {
  for (const auto& in : p) instr_lines(in, indent, out);
}

Program parse_block(TokenStream& ts);
Program parse_seq(TokenStream& ts);

Value parse_val(TokenStream& ts) {
  if (ts.accept_sym("&")) {
    auto n = ts.expect_int();
    if (n < 0) ts.error("location must be non-negative");
    return Value(Loc{static_cast<std::uint64_t>(n)});
  }
  if (ts.peek().kind == TokKind::Int || ts.is_sym("-")) return Value(ts.expect_int());
  if (ts.accept_sym("[")) {
    std::vector<Value> es;
    if (!ts.accept_sym("]")) {
      do {
        es.push_back(parse_val(ts));
      } while (ts.accept_sym(","));
      ts.expect_sym("]");
    }
    return array(std::move(es));
  }
  if (ts.accept_sym("(")) {
    ts.expect_ident_kw("thunk");
    Program body = parse_block(ts);
    ts.expect_sym(")");
    return thunk(std::move(body));
  }
  if (ts.peek().kind == TokKind::Ident) return var(ts.next().text);
  ts.error("expected a value but found '" + ts.peek().text + "'");
}

Instr parse_instr(TokenStream& ts) {
  std::string w = ts.expect_ident("instruction");
  if (w == "push") return push(parse_val(ts));
  if (w == "add") return add();
  if (w == "less?") return less();
  if (w == "call") return call();
  if (w == "idx") return idx();
  if (w == "len") return len();
  if (w == "alloc") return alloc();
  if (w == "read") return read();
  if (w == "write") return write();
  if (w == "fail") {
    std::string c = ts.expect_ident("error code");
    auto code = parse_error_name(c);
    if (!code) ts.error("unknown error code '" + c + "'");
    return fail(*code);
  }
  if (w == "if0") {
    Program z = parse_block(ts);
    Program nz = parse_block(ts);
    return if0(std::move(z), std::move(nz));
  }
  if (w == "lam") {
    std::vector<std::string> params;
    while (ts.peek().kind == TokKind::Ident) params.push_back(ts.next().text);
    if (params.empty()) ts.error("lam needs at least one variable");
    return lam(std::move(params), parse_block(ts));
  }
  ts.error("unknown instruction '" + w + "'");
}

Program parse_seq(TokenStream& ts) {
  Program p;
  while (!ts.at_end() && !ts.is_sym("}")) {
    if (ts.accept_sym(";")) continue;
    p.push_back(parse_instr(ts));
  }
  return p;
}

Program parse_block(TokenStream& ts) {
  ts.expect_sym("{");
  Program p = parse_seq(ts);
  ts.expect_sym("}");
  return p;
}

}  // namespace

std::string print_value(const Value& v) {
  std::string out;
  value_text(v, out);
  return out;
}

std::string print_instr_inline(const Instr& i) {
  std::string out;
  instr_text(i, out);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  block_lines(p, 0, out);
  return out;
}

std::string print_program_inline(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += "; ";
    instr_text(p[i], out);
  }
  return out;
}

Program parse_program(const std::string& text) {
  TokenStream ts(lex(text));
  Program p = parse_seq(ts);
  if (!ts.at_end()) ts.error("unexpected '" + ts.peek().text + "'");
  return p;
}

Value parse_value(const std::string& text) {
  TokenStream ts(lex(text));
  Value v = parse_val(ts);
  if (!ts.at_end()) ts.error("unexpected '" + ts.peek().text + "'");
  return v;
}

}  // namespace polybridge::stack
