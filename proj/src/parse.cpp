#include <set>

#include "polybridge/lexer.hpp"
#include "polybridge/syntax.hpp"

namespace polybridge::src {

namespace {

const std::set<std::string> kKeywords = {
    "let", "in", "if", "then", "else", "if0", "match", "fst", "snd", "inl", "inr", "ref",
    "true", "false", "forall", "exists", "dupl", "drop", "new", "free", "swap", "foreign",
    "unit", "bool", "int", "Ptr", "Cap"};

bool has_ints(Lang l) { return l == Lang::RefLL || l == Lang::Affi || l == Lang::MiniML; }
bool has_bools(Lang l) { return l == Lang::RefHL || l == Lang::Affi || l == Lang::L3; }
bool has_refs(Lang l) { return l == Lang::RefHL || l == Lang::RefLL || l == Lang::MiniML; }
bool has_pairs(Lang l) { return l != Lang::RefLL; }

bool tag_allowed(Lang host, Lang foreign) {
  switch (host) {
    case Lang::RefHL: return foreign == Lang::RefLL;
    case Lang::RefLL: return foreign == Lang::RefHL;
    case Lang::Affi: return foreign == Lang::MiniML;
    case Lang::L3: return foreign == Lang::MiniML;
    case Lang::MiniML: return foreign == Lang::Affi || foreign == Lang::L3;
  }
  return false;
}

class Parser {
 public:
  Parser(Lang lang, const std::string& src) : ts_(lex(src)), lang_(lang) {}

  ExprPtr whole_expr() {
    ExprPtr e = expr();
    if (!ts_.at_end()) ts_.error("unexpected '" + ts_.peek().text + "'");
    return e;
  }

  Type whole_type() {
    Type t = type();
    if (!ts_.at_end()) ts_.error("unexpected '" + ts_.peek().text + "'");
    return t;
  }

 private:
  TokenStream ts_;
  Lang lang_;

  ExprPtr node(Op op, std::size_t start, std::vector<ExprPtr> kids = {}) {
    ExprPtr e = make(lang_, op, std::move(kids));
    e->span = ts_.span_from(start);
    return e;
  }

  std::string ident(const char* what) {
    const Token& t = ts_.peek();
    std::string x = ts_.expect_ident(what);
    if (kKeywords.count(x)) fail_static("parse", t.span, "'" + x + "' is a keyword");
    if (x.find('#') != std::string::npos) fail_static("parse", t.span, "'#' is reserved for generated names");
    return x;
  }

  std::optional<Mode> mode_suffix() {
    if (ts_.accept_sym("\xE2\x80\xA2")) return Mode::Stat;
    if (ts_.accept_sym("\xE2\x88\x98")) return Mode::Dyn;
    if (ts_.accept_sym("@")) {
      std::string m = ts_.expect_ident("mode (dyn or stat)");
      if (m == "dyn") return Mode::Dyn;
      if (m == "stat") return Mode::Stat;
      ts_.error("mode must be dyn or stat");
    }
    return std::nullopt;
  }

  Mode required_mode() {
    auto m = mode_suffix();
    if (!m) ts_.error("affine binder needs a mode: write a@dyn or a@stat");
    return *m;
  }

  // ---------------- types ----------------

  Type type() {
    if (ts_.is_ident("forall") && (lang_ == Lang::MiniML || lang_ == Lang::L3)) {
      ts_.next();
      std::string a = ident("type variable");
      ts_.expect_sym(".");
      return Type::make(TyCon::Forall, {type()}, a);
    }
    if (ts_.is_ident("exists") && lang_ == Lang::L3) {
      ts_.next();
      std::string z = ident("location variable");
      ts_.expect_sym(".");
      return Type::make(TyCon::Exists, {type()}, z);
    }
    Type lhs = type_sum();
    switch (lang_) {
      case Lang::RefHL: case Lang::RefLL: case Lang::MiniML:
        if (ts_.accept_sym("->")) return Type::make(TyCon::Arrow, {lhs, type()});
        break;
      case Lang::Affi:
        if (ts_.accept_sym("-o")) {
          bool stat = ts_.accept_sym("\xE2\x80\xA2");
          return Type::make(stat ? TyCon::LolliStatic : TyCon::Lolli, {lhs, type()});
        }
        if (ts_.accept_sym("-*")) return Type::make(TyCon::LolliStatic, {lhs, type()});
        break;
      case Lang::L3:
        if (ts_.accept_sym("-o")) return Type::make(TyCon::Lolli, {lhs, type()});
        break;
    }
    return lhs;
  }

  Type type_sum() {
    Type t = type_prod();
    if (lang_ == Lang::RefHL || lang_ == Lang::MiniML)
      while (ts_.accept_sym("+")) t = Type::make(TyCon::Sum, {t, type_prod()});
    return t;
  }

  Type type_prod() {
    Type t = type_prefix();
    while (true) {
      if (lang_ != Lang::RefLL && ts_.accept_sym("*")) {
        TyCon c = (lang_ == Lang::Affi || lang_ == Lang::L3) ? TyCon::Tensor : TyCon::Prod;
        t = Type::make(c, {t, type_prefix()});
      } else if (lang_ == Lang::Affi && ts_.accept_sym("&")) {
        t = Type::make(TyCon::With, {t, type_prefix()});
      } else {
        return t;
      }
    }
  }

  Type type_prefix() {
    if (has_refs(lang_) && ts_.accept_ident("ref")) return Type::make(TyCon::Ref, {type_prefix()});
    if ((lang_ == Lang::Affi || lang_ == Lang::L3) && ts_.accept_sym("!"))
      return Type::make(TyCon::Bang, {type_prefix()});
    if (lang_ == Lang::L3 && ts_.accept_ident("Ptr")) return Type::make(TyCon::Ptr, {}, ident("location variable"));
    if (lang_ == Lang::L3 && ts_.accept_ident("Cap")) {
      std::string z = ident("location variable");
      return Type::make(TyCon::Cap, {type_prefix()}, z);
    }
    return type_atom();
  }

  Type type_atom() {
    if (ts_.accept_sym("(")) {
      Type t = type();
      ts_.expect_sym(")");
      return t;
    }
    if (ts_.accept_ident("unit")) return Type::unit();
    if (has_bools(lang_) && ts_.accept_ident("bool")) return Type::boolean();
    if (has_ints(lang_) && ts_.accept_ident("int")) return Type::integer();
    if (lang_ == Lang::RefLL && ts_.accept_sym("[")) {
      Type t = type();
      ts_.expect_sym("]");
      return Type::make(TyCon::Array, {t});
    }
    if (lang_ == Lang::MiniML && ts_.accept_ident("foreign")) {
      ts_.expect_sym("<");
      Lang saved = lang_;
      lang_ = Lang::L3;
      Type t = type();
      lang_ = saved;
      ts_.expect_sym(">");
      return Type::make(TyCon::Foreign, {t});
    }
    if (lang_ == Lang::MiniML && ts_.peek().kind == TokKind::Ident && !kKeywords.count(ts_.peek().text))
      return Type::var(ident("type variable"));
    ts_.error(std::string("expected a ") + lang_name(lang_) + " type but found '" + ts_.peek().text + "'");
  }

  // ---------------- expressions ----------------

  bool boundary_ahead() const {
    if (ts_.peek().kind != TokKind::Ident || !lang_from_tag(ts_.peek().text)) return false;
    if (ts_.is_sym("[|", 1)) return true;
    return lang_ == Lang::L3 && ts_.peek().text == "ml" && ts_.is_sym("<", 1);
  }

  ExprPtr expr() {
    std::size_t start = ts_.pos();
    if (boundary_ahead()) return boundary();
    if (ts_.accept_sym("\\")) {
      auto e = node(Op::Lam, start);
      e->name = ident("parameter");
      if (lang_ == Lang::Affi) e->mode = required_mode();
      ts_.expect_sym(":");
      e->ann = type();
      ts_.expect_sym(".");
      e->kids = {expr()};
      e->span = ts_.span_from(start);
      return e;
    }
    if ((lang_ == Lang::MiniML || lang_ == Lang::L3) && ts_.accept_sym("/\\")) {
      auto e = node(lang_ == Lang::MiniML ? Op::TyLam : Op::LocLam, start);
      e->name = ident(lang_ == Lang::MiniML ? "type variable" : "location variable");
      ts_.expect_sym(".");
      e->kids = {expr()};
      e->span = ts_.span_from(start);
      return e;
    }
    if (ts_.accept_ident("let")) return let_form(start);
    if ((lang_ == Lang::RefHL || lang_ == Lang::L3) && ts_.accept_ident("if")) {
      ExprPtr c = expr();
      ts_.expect_ident_kw("then");
      ExprPtr t = expr();
      ts_.expect_ident_kw("else");
      ExprPtr f = expr();
      return node(Op::If, start, {c, t, f});
    }
    if (lang_ == Lang::RefLL && ts_.accept_ident("if0")) {
      ExprPtr c = expr();
      ts_.expect_ident_kw("then");
      ExprPtr t = expr();
      ts_.expect_ident_kw("else");
      ExprPtr f = expr();
      return node(Op::If0, start, {c, t, f});
    }
    if ((lang_ == Lang::RefHL || lang_ == Lang::MiniML) && ts_.accept_ident("match")) {
      ExprPtr s = sum_level();
      std::string x = ident("variable");
      ts_.expect_sym("{");
      ExprPtr l = expr();
      ts_.expect_sym("}");
      std::string y = ident("variable");
      ts_.expect_sym("{");
      ExprPtr r = expr();
      ts_.expect_sym("}");
      auto e = node(Op::Match, start, {s, l, r});
      e->name = x;
      e->name2 = y;
      return e;
    }
    ExprPtr lhs = sum_level();
    if (has_refs(lang_) && ts_.accept_sym(":=")) return node(Op::Assign, start, {lhs, sum_level()});
    return lhs;
  }

  ExprPtr boundary() {
    std::size_t start = ts_.pos();
    const Token& tagtok = ts_.next();
    Lang foreign = *lang_from_tag(tagtok.text);
    if (!tag_allowed(lang_, foreign))
      fail_static("parse", tagtok.span,
                  std::string(lang_name(lang_)) + " cannot embed " + lang_name(foreign) + " code");
    bool embed = ts_.accept_sym("<");
    if (!embed) ts_.expect_sym("[|");
    Lang saved = lang_;
    lang_ = foreign;
    ExprPtr inner = expr();
    lang_ = saved;
    ts_.expect_sym(embed ? ">" : "|]");
    ts_.expect_sym(":");
    auto e = node(embed ? Op::Foreign : Op::Boundary, start, {inner});
    e->ann = type();
    e->span = ts_.span_from(start);
    return e;
  }

  ExprPtr let_form(std::size_t start) {
    if ((lang_ == Lang::Affi || lang_ == Lang::L3) && ts_.accept_sym("!")) {
      std::string x = ident("variable");
      ts_.expect_sym("=");
      ExprPtr b = expr();
      ts_.expect_ident_kw("in");
      auto e = node(Op::LetBang, start, {b, expr()});
      e->name = x;
      e->span = ts_.span_from(start);
      return e;
    }
    if (lang_ == Lang::L3 && ts_.is_sym("(") && ts_.is_sym(")", 1)) {
      ts_.next();
      ts_.next();
      ts_.expect_sym("=");
      ExprPtr b = expr();
      ts_.expect_ident_kw("in");
      return node(Op::LetUnit, start, {b, expr()});
    }
    if ((lang_ == Lang::Affi || lang_ == Lang::L3) && ts_.accept_sym("(")) {
      auto e = node(Op::LetPair, start);
      e->name = ident("variable");
      if (lang_ == Lang::Affi) e->mode = required_mode();
      ts_.expect_sym(",");
      e->name2 = ident("variable");
      if (lang_ == Lang::Affi) e->mode2 = required_mode();
      ts_.expect_sym(")");
      ts_.expect_sym("=");
      ExprPtr b = expr();
      ts_.expect_ident_kw("in");
      e->kids = {b, expr()};
      e->span = ts_.span_from(start);
      return e;
    }
    if (lang_ == Lang::L3 && ts_.accept_sym("<")) {
      auto e = node(Op::Unpack, start);
      e->name = ident("location variable");
      ts_.expect_sym(",");
      e->name2 = ident("variable");
      ts_.expect_sym(">");
      ts_.expect_sym("=");
      ExprPtr b = expr();
      ts_.expect_ident_kw("in");
      e->kids = {b, expr()};
      e->span = ts_.span_from(start);
      return e;
    }
    ts_.error(std::string("no such let form in ") + lang_name(lang_));
  }

  ExprPtr sum_level() {
    std::size_t start = ts_.pos();
    ExprPtr e = app_level();
    if (lang_ == Lang::RefLL)
      while (ts_.accept_sym("+")) e = node(Op::Add, start, {e, app_level()});
    return e;
  }

  bool atom_start() const {
    const Token& t = ts_.peek();
    if (t.kind == TokKind::Int) return has_ints(lang_);
    if (ts_.is_sym("-")) return has_ints(lang_) && ts_.peek(1).kind == TokKind::Int;
    if (ts_.is_sym("(")) return true;
    if (ts_.is_sym("[")) return lang_ == Lang::RefLL;
    if (ts_.is_sym("<")) return lang_ == Lang::Affi || lang_ == Lang::L3;
    if (t.kind == TokKind::Ident) {
      if (t.text == "true" || t.text == "false") return has_bools(lang_);
      if (kKeywords.count(t.text)) return false;
      if (ts_.is_sym("{", 1)) return false;  // match branch binder
      if (boundary_ahead()) return false;
      return true;
    }
    return false;
  }

  ExprPtr app_level() {
    std::size_t start = ts_.pos();
    ExprPtr f = prefix_level();
    while (atom_start()) f = node(Op::App, start, {f, postfix_level()});
    return f;
  }

  ExprPtr prefix_level() {
    std::size_t start = ts_.pos();
    auto unary = [&](Op op) { return node(op, start, {prefix_level()}); };
    if (lang_ == Lang::RefHL || lang_ == Lang::MiniML) {
      if (ts_.accept_ident("fst")) return unary(Op::Fst);
      if (ts_.accept_ident("snd")) return unary(Op::Snd);
      bool left = ts_.is_ident("inl");
      if (left || ts_.is_ident("inr")) {
        ts_.next();
        ts_.expect_sym("[");
        Type t = type();
        ts_.expect_sym("]");
        auto e = node(left ? Op::Inl : Op::Inr, start, {prefix_level()});
        e->ann = t;
        e->span = ts_.span_from(start);
        return e;
      }
    }
    if (has_refs(lang_)) {
      if (ts_.accept_ident("ref")) return unary(Op::Ref);
      if (ts_.accept_sym("!")) return unary(Op::Deref);
    }
    if ((lang_ == Lang::Affi || lang_ == Lang::L3) && ts_.accept_sym("!")) return unary(Op::Bang);
    if (lang_ == Lang::L3) {
      if (ts_.accept_ident("dupl")) return unary(Op::Dupl);
      if (ts_.accept_ident("drop")) return unary(Op::Drop);
      if (ts_.accept_ident("new")) return unary(Op::New);
      if (ts_.accept_ident("free")) return unary(Op::Free);
      if (ts_.accept_ident("swap")) {
        ExprPtr c = postfix_level();
        ExprPtr p = postfix_level();
        ExprPtr v = postfix_level();
        return node(Op::Swap, start, {c, p, v});
      }
    }
    return postfix_level();
  }

  ExprPtr postfix_level() {
    std::size_t start = ts_.pos();
    ExprPtr e = atom();
    while (true) {
      if (lang_ == Lang::Affi && ts_.is_sym(".") && ts_.peek(1).kind == TokKind::Int) {
        ts_.next();
        const Token& k = ts_.next();
        if (k.value != 1 && k.value != 2) fail_static("parse", k.span, "projection must be .1 or .2");
        e = node(k.value == 1 ? Op::Proj1 : Op::Proj2, start, {e});
      } else if (ts_.is_sym("[") && lang_ == Lang::RefLL) {
        ts_.next();
        ExprPtr i = expr();
        ts_.expect_sym("]");
        e = node(Op::Index, start, {e, i});
      } else if (ts_.is_sym("[") && lang_ == Lang::MiniML) {
        ts_.next();
        Type t = type();
        ts_.expect_sym("]");
        e = node(Op::TyApp, start, {e});
        e->ann = t;
      } else if (ts_.is_sym("[") && lang_ == Lang::L3) {
        ts_.next();
        std::string z = ident("location variable");
        ts_.expect_sym("]");
        e = node(Op::LocApp, start, {e});
        e->name = z;
      } else {
        return e;
      }
    }
  }

  ExprPtr atom() {
    std::size_t start = ts_.pos();
    const Token& t = ts_.peek();
    if (boundary_ahead()) return boundary();
    if (has_ints(lang_) && (t.kind == TokKind::Int || (ts_.is_sym("-") && ts_.peek(1).kind == TokKind::Int))) {
      std::int64_t v = ts_.expect_int();
      auto e = node(Op::Int, start);
      e->num = v;
      return e;
    }
    if (ts_.accept_sym("(")) {
      if (ts_.accept_sym(")")) {
        if (lang_ == Lang::RefLL) fail_static("parse", ts_.span_from(start), "refll has no unit value");
        return node(Op::Unit, start);
      }
      ExprPtr a = expr();
      if (has_pairs(lang_) && ts_.accept_sym(",")) {
        ExprPtr b = expr();
        ts_.expect_sym(")");
        return node(Op::Pair, start, {a, b});
      }
      ts_.expect_sym(")");
      return a;
    }
    if (has_bools(lang_) && ts_.accept_ident("true")) return node(Op::True, start);
    if (has_bools(lang_) && ts_.accept_ident("false")) return node(Op::False, start);
    if (lang_ == Lang::RefLL && ts_.accept_sym("[")) {
      auto e = node(Op::Array, start);
      if (ts_.accept_sym(":")) {
        e->ann = type();
        ts_.expect_sym("]");
      } else {
        do {
          e->kids.push_back(expr());
        } while (ts_.accept_sym(","));
        ts_.expect_sym("]");
      }
      e->span = ts_.span_from(start);
      return e;
    }
    if (lang_ == Lang::Affi && ts_.accept_sym("<")) {
      ExprPtr a = expr();
      ts_.expect_sym(",");
      ExprPtr b = expr();
      ts_.expect_sym(">");
      return node(Op::WithPair, start, {a, b});
    }
    if (lang_ == Lang::L3 && ts_.accept_sym("<")) {
      std::string z = ident("location variable");
      ts_.expect_sym(",");
      ExprPtr b = expr();
      ts_.expect_sym(">");
      auto e = node(Op::Pack, start, {b});
      e->name = z;
      return e;
    }
    if (t.kind == TokKind::Ident && !kKeywords.count(t.text)) {
      std::string x = ident("variable");
      if (lang_ == Lang::Affi) {
        if (auto m = mode_suffix()) {
          auto e = node(Op::AVar, start);
          e->name = x;
          e->mode = *m;
          return e;
        }
      }
      auto e = node(Op::Var, start);
      e->name = x;
      return e;
    }
    ts_.error(std::string("expected a ") + lang_name(lang_) + " expression but found '" + t.text + "'");
  }
};

}  // namespace

ExprPtr parse(Lang lang, const std::string& text) { return Parser(lang, text).whole_expr(); }

Type parse_type(Lang lang, const std::string& text) { return Parser(lang, text).whole_type(); }

}  // namespace polybridge::src
