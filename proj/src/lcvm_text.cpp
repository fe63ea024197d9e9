#include <set>

#include "polybridge/lcvm.hpp"
#include "polybridge/lexer.hpp"

namespace polybridge::lcvm {

namespace {

// precedence: 0 expression, 1 application, 2 prefix, 3 atom
int level(const Node& n) {
  switch (n.op) {
    case LOp::Let: case LOp::If: case LOp::Match: case LOp::Assign:
      return 0;
    case LOp::App:
      return 1;
    case LOp::Fst: case LOp::Snd: case LOp::Inl: case LOp::Inr: case LOp::Ref: case LOp::Deref:
    case LOp::Alloc: case LOp::Free: case LOp::GcMov:
      return 2;
    case LOp::Int:
      return n.n < 0 ? 2 : 3;
    default:
      return 3;
  }
}

const char* prefix_kw(LOp op) {
  switch (op) {
    case LOp::Fst: return "fst ";
    case LOp::Snd: return "snd ";
    case LOp::Inl: return "inl ";
    case LOp::Inr: return "inr ";
    case LOp::Ref: return "ref ";
    case LOp::Deref: return "!";
    case LOp::Alloc: return "alloc ";
    case LOp::Free: return "free ";
    case LOp::GcMov: return "gcmov ";
    default: return "";
  }
}

std::string binder(const std::string& x, bool stat) { return stat ? x + "@stat" : x; }

void pr(const Expr& e, int prec, std::string& out) {
  bool paren = level(*e) < prec;
  if (paren) out += '(';
  switch (e->op) {
    case LOp::Unit: out += "()"; break;
    case LOp::Int: out += std::to_string(e->n); break;
    case LOp::Loc: out += "&" + std::to_string(e->loc); break;
    case LOp::Var: out += e->x; break;
    case LOp::Pair:
      out += '(';
      pr(e->kids[0], 0, out);
      out += ", ";
      pr(e->kids[1], 0, out);
      out += ')';
      break;
    case LOp::Fst: case LOp::Snd: case LOp::Inl: case LOp::Inr: case LOp::Ref: case LOp::Deref:
    case LOp::Alloc: case LOp::Free: case LOp::GcMov:
      out += prefix_kw(e->op);
      pr(e->kids[0], 2, out);
      break;
    case LOp::If:
      out += "if ";
      pr(e->kids[0], 1, out);
      out += " {";
      pr(e->kids[1], 0, out);
      out += "} {";
      pr(e->kids[2], 0, out);
      out += '}';
      break;
    case LOp::Match:
      out += "match ";
      pr(e->kids[0], 1, out);
      out += " " + e->x + "{";
      pr(e->kids[1], 0, out);
      out += "} " + e->y + "{";
      pr(e->kids[2], 0, out);
      out += '}';
      break;
    case LOp::Let:
      out += "let " + binder(e->x, e->stat) + " = ";
      pr(e->kids[0], 0, out);
      out += " in ";
      pr(e->kids[1], 0, out);
      break;
    case LOp::Lam:
      out += "\\" + binder(e->x, e->stat) + "{";
      pr(e->kids[0], 0, out);
      out += '}';
      break;
    case LOp::App:
      pr(e->kids[0], 1, out);
      out += ' ';
      pr(e->kids[1], 3, out);
      break;
    case LOp::Assign:
      pr(e->kids[0], 1, out);
      out += " := ";
      pr(e->kids[1], 1, out);
      break;
    case LOp::Fail: out += "fail "; out += error_name(e->code); break;
    case LOp::CallGc: out += "callgc"; break;
    case LOp::Protect:
      out += "protect(";
      pr(e->kids[0], 0, out);
      out += ", " + std::to_string(e->loc) + ")";
      break;
    case LOp::Input: out += "<input>"; break;
    case LOp::Hole:
      out += "<" + e->x + ">(";
      pr(e->kids[0], 0, out);
      out += ")";
      break;
  }
  if (paren) out += ')';
}

const std::set<std::string> kKeywords = {"let", "in", "if", "match", "fst", "snd", "inl", "inr",
                                         "ref", "alloc", "free", "gcmov", "fail", "callgc", "protect"};

class Parser {
 public:
  explicit Parser(const std::string& src) : ts_(lex(src)) {}

  Expr whole() {
    Expr e = expr();
    if (!ts_.at_end()) ts_.error("unexpected '" + ts_.peek().text + "'");
    return e;
  }

 private:
  TokenStream ts_;
  bool in_scrutinee_ = false;

  std::string ident(const char* what) {
    std::string x = ts_.expect_ident(what);
    if (kKeywords.count(x)) ts_.error("'" + x + "' is a keyword");
    return x;
  }

  std::pair<std::string, bool> bind_name() {
    std::string x = ident("variable");
    bool stat = false;
    if (ts_.accept_sym("@")) {
      std::string m = ts_.expect_ident("binder mode");
      if (m == "stat") stat = true;
      else if (m != "dyn") ts_.error("binder mode must be stat or dyn");
    }
    return {x, stat};
  }

  Expr block() {
    ts_.expect_sym("{");
    bool saved = in_scrutinee_;
    in_scrutinee_ = false;
    Expr e = expr();
    in_scrutinee_ = saved;
    ts_.expect_sym("}");
    return e;
  }

  Expr expr() {
    if (ts_.accept_ident("let")) {
      auto [x, stat] = bind_name();
      ts_.expect_sym("=");
      Expr b = expr();
      ts_.expect_ident_kw("in");
      return let(x, b, expr(), stat);
    }
    if (ts_.accept_ident("if")) {
      Expr c = application();
      Expr z = block();
      return if_(c, z, block());
    }
    if (ts_.accept_ident("match")) {
      // the scrutinee ends before the first branch binder
      bool saved = in_scrutinee_;
      in_scrutinee_ = true;
      Expr s = application();
      in_scrutinee_ = saved;
      std::string x = ident("variable");
      Expr l = block();
      std::string y = ident("variable");
      return match(s, x, l, y, block());
    }
    Expr a = application();
    if (ts_.accept_sym(":=")) return assign(a, application());
    return a;
  }

  bool atom_start() const {
    const Token& t = ts_.peek();
    if (t.kind == TokKind::Int) return true;
    if (t.kind == TokKind::Ident) {
      if (t.text == "fail" || t.text == "callgc" || t.text == "protect") return true;
      if (kKeywords.count(t.text)) return false;
      return !(in_scrutinee_ && ts_.is_sym("{", 1));
    }
    return ts_.is_sym("(") || ts_.is_sym("&") || ts_.is_sym("\\") ||
           (ts_.is_sym("-") && ts_.peek(1).kind == TokKind::Int);
  }

  Expr application() {
    Expr f = prefix();
    while (atom_start()) f = app(f, atom());
    return f;
  }

  Expr prefix() {
    static const std::pair<const char*, Expr (*)(Expr)> ops[] = {
        {"fst", fst}, {"snd", snd}, {"inl", inl}, {"inr", inr}, {"ref", ref},
        {"alloc", alloc}, {"free", free_}, {"gcmov", gcmov}};
    for (const auto& [kw, mk] : ops)
      if (ts_.accept_ident(kw)) return mk(prefix());
    if (ts_.accept_sym("!")) return deref(prefix());
    if (ts_.is_sym("-") && ts_.peek(1).kind == TokKind::Int) return num(ts_.expect_int());
    return atom();
  }

  Expr atom() {
    const Token& t = ts_.peek();
    if (t.kind == TokKind::Int || ts_.is_sym("-")) return num(ts_.expect_int());
    if (ts_.accept_sym("&")) {
      auto n = ts_.expect_int();
      if (n < 0) ts_.error("location must be non-negative");
      return loc(static_cast<std::uint64_t>(n));
    }
    if (ts_.accept_sym("\\")) {
      auto [x, stat] = bind_name();
      return lam(x, block(), stat);
    }
    if (ts_.accept_sym("(")) {
      if (ts_.accept_sym(")")) return unit();
      bool saved = in_scrutinee_;
      in_scrutinee_ = false;
      Expr a = expr();
      in_scrutinee_ = saved;
      if (ts_.accept_sym(",")) {
        Expr b = expr();
        ts_.expect_sym(")");
        return pair(a, b);
      }
      ts_.expect_sym(")");
      return a;
    }
    if (ts_.accept_ident("fail")) {
      std::string c = ts_.expect_ident("error code");
      auto code = parse_error_name(c);
      if (!code) ts_.error("unknown error code '" + c + "'");
      return fail(*code);
    }
    if (ts_.accept_ident("callgc")) return callgc();
    if (ts_.accept_ident("protect")) {
      ts_.expect_sym("(");
      Expr e = expr();
      ts_.expect_sym(",");
      auto f = ts_.expect_int();
      ts_.expect_sym(")");
      return protect(e, static_cast<std::uint64_t>(f));
    }
    if (t.kind == TokKind::Ident) return var(ident("variable"));
    ts_.error("expected an expression but found '" + t.text + "'");
  }
};

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  pr(e, 0, out);
  return out;
}

Expr parse_expr(const std::string& text) { return Parser(text).whole(); }

}  // namespace polybridge::lcvm
