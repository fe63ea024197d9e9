#include "polybridge/types.hpp"

#include <stdexcept>

namespace polybridge {

const char* lang_name(Lang l) {
  switch (l) {
    case Lang::RefHL: return "refhl";
    case Lang::RefLL: return "refll";
    case Lang::Affi: return "affi";
    case Lang::MiniML: return "mml";
    case Lang::L3: return "l3";
  }
  return "?";
}

const char* lang_tag(Lang l) {
  switch (l) {
    case Lang::RefHL: return "hl";
    case Lang::RefLL: return "ll";
    case Lang::Affi: return "affi";
    case Lang::MiniML: return "ml";
    case Lang::L3: return "l3";
  }
  return "?";
}

Type Type::unit() { return make(TyCon::Unit); }
Type Type::boolean() { return make(TyCon::Bool); }
Type Type::integer() { return make(TyCon::Int); }

Type Type::make(TyCon c, std::vector<Type> args, std::string name) {
  return Type(std::make_shared<const TypeNode>(TypeNode{c, std::move(name), std::move(args)}));
}

TyCon Type::con() const {
  if (!node_) throw std::logic_error("empty type");
  return node_->con;
}
const std::string& Type::name() const {
  if (!node_) throw std::logic_error("empty type");
  return node_->name;
}
const std::vector<Type>& Type::args() const {
  if (!node_) throw std::logic_error("empty type");
  return node_->args;
}

static bool binds(TyCon c) { return c == TyCon::Forall || c == TyCon::Exists; }
static bool names_var(TyCon c) { return c == TyCon::TVar || c == TyCon::Ptr || c == TyCon::Cap; }

using Env = std::vector<std::pair<std::string, std::string>>;

// returns 0 if free on both sides with equal name, index+1 if bound
static bool var_equal(const std::string& a, const std::string& b, const Env& env) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    bool la = it->first == a, lb = it->second == b;
    if (la || lb) return la && lb;
  }
  return a == b;
}

static bool eq(const Type& a, const Type& b, Env& env) {
  if (a.con() != b.con()) return false;
  if (a.args().size() != b.args().size()) return false;
  if (a.con() == TyCon::Meta) return a.name() == b.name();
  if (names_var(a.con()) && !var_equal(a.name(), b.name(), env)) return false;
  if (binds(a.con())) {
    env.emplace_back(a.name(), b.name());
    bool r = eq(a.arg(0), b.arg(0), env);
    env.pop_back();
    return r;
  }
  for (std::size_t i = 0; i < a.args().size(); ++i)
    if (!eq(a.arg(i), b.arg(i), env)) return false;
  return true;
}

bool type_equal(const Type& a, const Type& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  Env env;
  return eq(a, b, env);
}

static void fv(const Type& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (names_var(t.con()) && !bound.count(t.name())) out.insert(t.name());
  if (binds(t.con())) {
    bool had = bound.count(t.name());
    bound.insert(t.name());
    fv(t.arg(0), bound, out);
    if (!had) bound.erase(t.name());
    return;
  }
  for (const auto& a : t.args()) fv(a, bound, out);
}

std::set<std::string> free_type_vars(const Type& t) {
  std::set<std::string> bound, out;
  fv(t, bound, out);
  return out;
}

static std::string unused_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string n = base + "'";
  while (avoid.count(n)) n += "'";
  return n;
}

Type subst_type(const Type& t, const std::string& var, const Type& with) {
  switch (t.con()) {
    case TyCon::TVar:
      return t.name() == var ? with : t;
    case TyCon::Ptr:
    case TyCon::Cap: {
      std::vector<Type> args;
      for (const auto& a : t.args()) args.push_back(subst_type(a, var, with));
      std::string n = t.name();
      if (n == var && with.is(TyCon::TVar)) n = with.name();
      return Type::make(t.con(), std::move(args), n);
    }
    case TyCon::Forall:
    case TyCon::Exists: {
      if (t.name() == var) return t;
      auto fvw = free_type_vars(with);
      if (fvw.count(t.name())) {
        auto avoid = fvw;
        auto fb = free_type_vars(t.arg(0));
        avoid.insert(fb.begin(), fb.end());
        avoid.insert(var);
        std::string fresh = unused_name(t.name(), avoid);
        Type body = subst_type(t.arg(0), t.name(), Type::var(fresh));
        return Type::make(t.con(), {subst_type(body, var, with)}, fresh);
      }
      return Type::make(t.con(), {subst_type(t.arg(0), var, with)}, t.name());
    }
    default: {
      if (t.args().empty()) return t;
      std::vector<Type> args;
      for (const auto& a : t.args()) args.push_back(subst_type(a, var, with));
      return Type::make(t.con(), std::move(args), t.name());
    }
  }
}

Type rename_loc(const Type& t, const std::string& from, const std::string& to) {
  return subst_type(t, from, Type::var(to));
}

static int level(TyCon c) {
  switch (c) {
    case TyCon::Arrow: case TyCon::Lolli: case TyCon::LolliStatic:
    case TyCon::Forall: case TyCon::Exists:
      return 0;
    case TyCon::Sum: return 1;
    case TyCon::Prod: case TyCon::Tensor: case TyCon::With: return 2;
    case TyCon::Ref: case TyCon::Bang: case TyCon::Ptr: case TyCon::Cap: return 3;
    default: return 4;
  }
}

static void pr(const Type& t, int prec, std::string& out) {
  int lv = level(t.con());
  bool paren = lv < prec;
  if (paren) out += '(';
  auto bin = [&](const char* op, bool right) {
    pr(t.arg(0), right ? lv + 1 : lv, out);
    out += op;
    pr(t.arg(1), right ? lv : lv + 1, out);
  };
  switch (t.con()) {
    case TyCon::Unit: out += "unit"; break;
    case TyCon::Bool: out += "bool"; break;
    case TyCon::Int: out += "int"; break;
    case TyCon::Sum: bin(" + ", false); break;
    case TyCon::Prod: bin(" * ", false); break;
    case TyCon::Tensor: bin(" * ", false); break;
    case TyCon::With: bin(" & ", false); break;
    case TyCon::Arrow: bin(" -> ", true); break;
    case TyCon::Lolli: bin(" -o ", true); break;
    case TyCon::LolliStatic: bin(" -* ", true); break;
    case TyCon::Ref: out += "ref "; pr(t.arg(0), 3, out); break;
    case TyCon::Bang: out += "!"; pr(t.arg(0), 3, out); break;
    case TyCon::Array: out += "["; pr(t.arg(0), 0, out); out += "]"; break;
    case TyCon::Forall: out += "forall " + t.name() + ". "; pr(t.arg(0), 0, out); break;
    case TyCon::Exists: out += "exists " + t.name() + ". "; pr(t.arg(0), 0, out); break;
    case TyCon::TVar: out += t.name(); break;
    case TyCon::Foreign: out += "foreign<"; pr(t.arg(0), 0, out); out += ">"; break;
    case TyCon::Ptr: out += "Ptr " + t.name(); break;
    case TyCon::Cap: out += "Cap " + t.name() + " "; pr(t.arg(0), 4, out); break;
    case TyCon::Meta: out += "?" + t.name(); break;
  }
  if (paren) out += ')';
}

std::string print_type(const Type& t) {
  if (!t.valid()) return "<none>";
  std::string out;
  pr(t, 0, out);
  return out;
}

bool l3_duplicable(const Type& t) {
  switch (t.con()) {
    case TyCon::Unit: case TyCon::Bool: case TyCon::Ptr: case TyCon::Bang:
      return true;
    default:
      return false;
  }
}

Type l3_canonical(const Type& t) {
  if (t.con() == TyCon::Ptr) return Type::make(TyCon::Bang, {t});
  if (t.con() == TyCon::Bang && t.arg(0).con() == TyCon::Ptr) return t;
  if (t.args().empty()) return t;
  std::vector<Type> args;
  for (const auto& a : t.args()) args.push_back(l3_canonical(a));
  return Type::make(t.con(), std::move(args), t.name());
}

static bool mentions_any(const Type& t, const Env& env) {
  auto f = free_type_vars(t);
  for (const auto& [p, ty] : env)
    if (f.count(ty)) return true;
  return false;
}

static bool mt(const Type& p, const Type& t, TypeBindings& out, Env& env) {
  if (p.con() == TyCon::Meta) {
    if (mentions_any(t, env)) return false;
    auto it = out.find(p.name());
    if (it != out.end()) return type_equal(it->second, t);
    out.emplace(p.name(), t);
    return true;
  }
  if (p.con() != t.con() || p.args().size() != t.args().size()) return false;
  if (names_var(p.con()) && !var_equal(p.name(), t.name(), env)) return false;
  if (binds(p.con())) {
    env.emplace_back(p.name(), t.name());
    bool r = mt(p.arg(0), t.arg(0), out, env);
    env.pop_back();
    return r;
  }
  for (std::size_t i = 0; i < p.args().size(); ++i)
    if (!mt(p.arg(i), t.arg(i), out, env)) return false;
  return true;
}

bool match_type(const Type& pattern, const Type& t, TypeBindings& out) {
  TypeBindings tmp = out;
  Env env;
  if (!mt(pattern, t, tmp, env)) return false;
  out = std::move(tmp);
  return true;
}

Type instantiate_pattern(const Type& p, const TypeBindings& b) {
  if (p.con() == TyCon::Meta) {
    auto it = b.find(p.name());
    if (it == b.end()) throw std::logic_error("unbound pattern variable ?" + p.name());
    return it->second;
  }
  if (p.args().empty()) return p;
  std::vector<Type> args;
  for (const auto& a : p.args()) args.push_back(instantiate_pattern(a, b));
  return Type::make(p.con(), std::move(args), p.name());
}

}  // namespace polybridge
