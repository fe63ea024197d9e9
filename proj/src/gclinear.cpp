#include "polybridge/gclinear.hpp"

namespace polybridge::gclinear {

using namespace lcvm;
using interop::Dir;
using interop::hole_name;
using src::Op;

Type ref_package(const Type& payload, const std::string& loc) {
  return Type::make(TyCon::Exists,
                    {Type::make(TyCon::Tensor, {Type::make(TyCon::Cap, {payload}, loc), Type::make(TyCon::Ptr, {}, loc)})},
                    loc);
}

static Type church_bool() {
  Type a = Type::var("a");
  return Type::make(TyCon::Forall, {Type::make(TyCon::Arrow, {a, Type::make(TyCon::Arrow, {a, a})})}, "a");
}

Registry default_rules() {
  Registry reg(Lang::L3, Lang::MiniML);
  reg.normalize_a = l3_canonical;
  reg.normalize_b = l3_canonical;
  using R = interop::Rule<interop::LcvmTarget>;
  auto h = [](std::size_t i, Dir d, Expr arg) { return hole(hole_name(i, d), std::move(arg)); };
  {
    R r;
    r.name = "foreign";
    r.a = Type::meta("t");
    r.b = Type::make(TyCon::Foreign, {Type::meta("t")});
    r.glue_ab = input();
    r.glue_ba = input();
    r.side_label = "Duplicable(t)";
    r.side = [](const TypeBindings& b) { return l3_duplicable(b.at("t")); };
    reg.add(std::move(r));
  }
  {
    R r;
    r.name = "church-bool";
    r.a = Type::boolean();
    r.b = church_bool();
    auto church = [](bool first) { return lam("_", lam("x", lam("y", var(first ? "x" : "y")))); };
    r.glue_ab = if_(input(), church(true), church(false));
    r.glue_ba = app(app(app(input(), unit()), num(0)), num(1));
    reg.add(std::move(r));
  }
  {
    R r;
    r.name = "ref";
    r.a = l3_canonical(ref_package(Type::meta("t")));
    r.b = Type::make(TyCon::Ref, {Type::meta("s")});
    r.premises = {{Type::meta("t"), Type::meta("s")}};
    r.glue_ab = let("x", snd(input()),
                    seq(assign(var("x"), h(0, Dir::AtoB, deref(var("x")))), gcmov(var("x"))));
    r.glue_ba = let("x", alloc(h(0, Dir::BtoA, deref(input()))), pair(unit(), var("x")));
    reg.add(std::move(r));
  }
  return reg;
}

namespace {

[[noreturn]] void type_error(const src::Expr& e, const std::string& msg) { fail_static("typecheck", e.span, msg); }

bool same(const Type& a, const Type& b) { return type_equal(l3_canonical(a), l3_canonical(b)); }

void expect(const src::Expr& e, const Type& got, const Type& want, const char* what) {
  if (!same(got, want))
    type_error(e, std::string(what) + ": expected " + print_type(want) + " but found " + print_type(got));
}

bool mentions(const Type& t, const std::string& v) { return free_type_vars(t).count(v) > 0; }

// Pointers and capabilities name their location in the type's name slot.
bool is_ptr_to(const Type& t, const std::string& z) {
  Type c = l3_canonical(t);
  return c.is(TyCon::Bang) && c.arg(0).is(TyCon::Ptr) && c.arg(0).name() == z;
}

struct Bind {
  Type type;
  int id = -1;  // -1 for unrestricted bindings
};

struct Env {
  std::set<std::string> locvars, tyvars;
  std::map<std::string, Bind> l3;
  std::map<std::string, Type> ml;
};

using Used = std::set<int>;

bool l3_value(const src::Expr& e) {
  switch (e.op) {
    case Op::Unit: case Op::True: case Op::False: case Op::Var: case Op::Lam: case Op::LocLam:
      return true;
    case Op::Pair: return l3_value(*e.kids[0]) && l3_value(*e.kids[1]);
    case Op::Bang: case Op::Pack: return l3_value(*e.kids[0]);
    default: return false;
  }
}

class Checker {
 public:
  Checker(const Registry& reg, std::vector<LinearUse>* uses) : reg_(reg), uses_(uses) {}

  Type check(src::Expr& e, const Env& env, Used& used) {
    Type t;
    if (e.lang == Lang::L3)
      t = l3(e, env, used);
    else if (e.lang == Lang::MiniML)
      t = ml(e, env, used);
    else
      type_error(e, std::string(lang_name(e.lang)) + " code cannot appear in the gclinear pair");
    e.ty = t;
    return t;
  }

  Env seed(const Context& ctx) {
    Env env;
    env.locvars = ctx.locvars;
    env.tyvars = ctx.tyvars;
    env.ml = ctx.ml;
    for (const auto& [x, t] : ctx.l3) env.l3[x] = Bind{t, -1};
    return env;
  }

 private:
  const Registry& reg_;
  std::vector<LinearUse>* uses_;
  int next_id_ = 0;
  std::map<int, std::string> names_;

  void join(const src::Expr& at, Used& into, const Used& more) {
    for (int id : more)
      if (!into.insert(id).second) type_error(at, "linear variable '" + names_[id] + "' is used more than once");
  }

  Env bind(const Env& env, const std::string& x, const Type& t, bool unrestricted, int& id) {
    Env out = env;
    id = -1;
    if (!unrestricted && !l3_duplicable(t)) {
      id = next_id_++;
      names_[id] = x;
    }
    out.l3[x] = Bind{t, id};
    return out;
  }

  // Closes a binder: a linear variable must have been consumed.
  void close(const src::Expr& at, const std::string& x, const Type& t, int id, Used& used) {
    if (id < 0) return;
    if (!used.count(id)) type_error(at, "linear variable '" + x + "' of type " + print_type(t) + " is never used");
    if (uses_) uses_->push_back(LinearUse{x, t, 1});
    used.erase(id);
  }

  void well_formed_l3(const src::Expr& at, const Type& t, const std::set<std::string>& locvars) {
    std::function<void(const Type&)> scan = [&](const Type& u) {
      switch (u.con()) {
        case TyCon::Unit: case TyCon::Bool: case TyCon::Tensor: case TyCon::Lolli: case TyCon::Bang:
        case TyCon::Ptr: case TyCon::Cap: case TyCon::Forall: case TyCon::Exists:
          break;
        default:
          type_error(at, "'" + print_type(u) + "' is not an l3 type");
      }
      for (const auto& a : u.args()) scan(a);
    };
    scan(t);
    for (const auto& v : free_type_vars(t))
      if (!locvars.count(v)) type_error(at, "unbound location variable '" + v + "'");
  }

  void well_formed_ml(const src::Expr& at, const Type& t, const Env& env) {
    std::function<void(const Type&, std::set<std::string>)> scan = [&](const Type& u, std::set<std::string> bound) {
      switch (u.con()) {
        case TyCon::TVar:
          if (!bound.count(u.name()) && !env.tyvars.count(u.name()))
            type_error(at, "unbound type variable '" + u.name() + "'");
          return;
        case TyCon::Foreign:
          well_formed_l3(at, u.arg(0), env.locvars);
          return;
        case TyCon::Forall:
          bound.insert(u.name());
          scan(u.arg(0), bound);
          return;
        case TyCon::Unit: case TyCon::Int: case TyCon::Prod: case TyCon::Sum: case TyCon::Arrow: case TyCon::Ref:
          for (const auto& a : u.args()) scan(a, bound);
          return;
        default:
          type_error(at, "'" + print_type(u) + "' is not a miniml type");
      }
    };
    scan(t, {});
  }

  std::string fresh_loc(const Env& env, const Type& avoid) {
    auto taken = [&](const std::string& z) { return env.locvars.count(z) || mentions(avoid, z); };
    if (!taken("z")) return "z";
    for (int i = 1;; ++i)
      if (!taken("z" + std::to_string(i))) return "z" + std::to_string(i);
  }

  Type boundary(src::Expr& e, const Env& env, Used& used) {
    src::Expr& inner = *e.kids[0];
    if (e.lang == Lang::L3)
      well_formed_l3(e, e.ann, env.locvars);
    else
      well_formed_ml(e, e.ann, env);
    Type it = check(inner, env, used);
    Dir d;
    auto res = interop::check_boundary(reg_, e.lang, e.ann, it, d);
    if (!res) fail_static("convert", e.span, res.err.reason, res.err.trail);
    return e.ann;
  }

  Type l3(src::Expr& e, const Env& env, Used& used) {
    auto sub = [&](std::size_t i, const Env& en, Used& u) { return check(*e.kids[i], en, u); };
    switch (e.op) {
      case Op::Unit: return Type::unit();
      case Op::True: case Op::False: return Type::boolean();
      case Op::Var: {
        auto it = env.l3.find(e.name);
        if (it == env.l3.end()) type_error(e, "unbound l3 variable '" + e.name + "'");
        if (it->second.id >= 0) join(e, used, {it->second.id});
        return it->second.type;
      }
      case Op::Lam: {
        well_formed_l3(e, e.ann, env.locvars);
        int id;
        Env inner = bind(env, e.name, e.ann, false, id);
        Used u;
        Type body = sub(0, inner, u);
        close(e, e.name, e.ann, id, u);
        join(e, used, u);
        return Type::make(TyCon::Lolli, {e.ann, body});
      }
      case Op::App: {
        Used u;
        Type f = sub(0, env, u);
        if (!f.is(TyCon::Lolli)) type_error(e, "applying a non-function of type " + print_type(f));
        expect(*e.kids[1], sub(1, env, u), f.arg(0), "argument");
        join(e, used, u);
        return f.arg(1);
      }
      case Op::If: {
        Used u;
        expect(*e.kids[0], sub(0, env, u), Type::boolean(), "if condition");
        Used ut, uf;
        Type a = sub(1, env, ut);
        Type b = sub(2, env, uf);
        expect(*e.kids[2], b, a, "else branch");
        if (ut != uf) type_error(e, "the branches of if use different linear variables");
        join(e, u, ut);
        join(e, used, u);
        return a;
      }
      case Op::Pair: {
        Used u;
        Type a = sub(0, env, u);
        Type b = sub(1, env, u);
        join(e, used, u);
        return Type::make(TyCon::Tensor, {a, b});
      }
      case Op::LetUnit: {
        Used u;
        expect(*e.kids[0], sub(0, env, u), Type::unit(), "let () binding");
        Type t = sub(1, env, u);
        join(e, used, u);
        return t;
      }
      case Op::LetPair: {
        if (e.name == e.name2) type_error(e, "both components bound to '" + e.name + "'");
        Used u;
        Type t = sub(0, env, u);
        if (!t.is(TyCon::Tensor)) type_error(*e.kids[0], "let pair expects a tensor but found " + print_type(t));
        int id1, id2;
        Env inner = bind(env, e.name, t.arg(0), false, id1);
        inner = bind(inner, e.name2, t.arg(1), false, id2);
        Used ub;
        Type r = sub(1, inner, ub);
        close(e, e.name2, t.arg(1), id2, ub);
        close(e, e.name, t.arg(0), id1, ub);
        join(e, u, ub);
        join(e, used, u);
        return r;
      }
      case Op::LetBang: {
        Used u;
        Type t = sub(0, env, u);
        if (!t.is(TyCon::Bang)) type_error(*e.kids[0], "let ! expects a ! type but found " + print_type(t));
        int id;
        Env inner = bind(env, e.name, t.arg(0), true, id);
        Type r = sub(1, inner, u);
        join(e, used, u);
        return r;
      }
      case Op::Bang: {
        if (!l3_value(*e.kids[0])) type_error(e, "! applies to values only");
        Used u;
        Type t = sub(0, env, u);
        if (!u.empty()) type_error(e, "! needs a value that uses no linear variables, but this one uses '" +
                                          names_[*u.begin()] + "'");
        return Type::make(TyCon::Bang, {t});
      }
      case Op::Dupl:
      case Op::Drop: {
        Used u;
        Type t = sub(0, env, u);
        if (!l3_duplicable(t))
          type_error(e, std::string(e.op == Op::Dupl ? "dupl" : "drop") + " needs a Duplicable type but found " +
                            print_type(t));
        join(e, used, u);
        return e.op == Op::Dupl ? Type::make(TyCon::Tensor, {t, t}) : Type::unit();
      }
      case Op::New: {
        Used u;
        Type t = sub(0, env, u);
        join(e, used, u);
        return ref_package(t, fresh_loc(env, t));
      }
      case Op::Free: {
        Used u;
        Type t = sub(0, env, u);
        bool ok = t.is(TyCon::Exists) && t.arg(0).is(TyCon::Tensor) && t.arg(0).arg(0).is(TyCon::Cap) &&
                  t.arg(0).arg(0).name() == t.name() && is_ptr_to(t.arg(0).arg(1), t.name());
        if (!ok) type_error(e, "free expects exists z. Cap z t * Ptr z but found " + print_type(t));
        Type payload = t.arg(0).arg(0).arg(0);
        if (mentions(payload, t.name())) type_error(e, "the freed value's type mentions its own location");
        join(e, used, u);
        return payload;
      }
      case Op::Swap: {
        Used u;
        Type c = sub(0, env, u);
        if (!c.is(TyCon::Cap)) type_error(*e.kids[0], "swap expects a capability but found " + print_type(c));
        Type p = sub(1, env, u);
        if (!is_ptr_to(p, c.name()))
          type_error(*e.kids[1], "swap expects Ptr " + c.name() + " but found " + print_type(p));
        Type v = sub(2, env, u);
        join(e, used, u);
        return Type::make(TyCon::Tensor, {Type::make(TyCon::Cap, {v}, c.name()), c.arg(0)});
      }
      case Op::LocLam: {
        if (env.locvars.count(e.name)) type_error(e, "location variable '" + e.name + "' is already in scope");
        Env inner = env;
        inner.locvars.insert(e.name);
        Used u;
        Type t = sub(0, inner, u);
        join(e, used, u);
        return Type::make(TyCon::Forall, {t}, e.name);
      }
      case Op::LocApp: {
        if (!env.locvars.count(e.name)) type_error(e, "unbound location variable '" + e.name + "'");
        Used u;
        Type t = sub(0, env, u);
        if (!t.is(TyCon::Forall)) type_error(e, "location application of non-polymorphic type " + print_type(t));
        join(e, used, u);
        return rename_loc(t.arg(0), t.name(), e.name);
      }
      case Op::Pack: {
        if (!env.locvars.count(e.name)) type_error(e, "unbound location variable '" + e.name + "'");
        Used u;
        Type t = sub(0, env, u);
        join(e, used, u);
        return Type::make(TyCon::Exists, {t}, e.name);
      }
      case Op::Unpack: {
        if (env.locvars.count(e.name)) type_error(e, "location variable '" + e.name + "' is already in scope");
        Used u;
        Type t = sub(0, env, u);
        if (!t.is(TyCon::Exists)) type_error(*e.kids[0], "unpack expects an existential but found " + print_type(t));
        Type opened = rename_loc(t.arg(0), t.name(), e.name);
        Env inner = env;
        inner.locvars.insert(e.name);
        int id;
        inner = bind(inner, e.name2, opened, false, id);
        Used ub;
        Type r = sub(1, inner, ub);
        close(e, e.name2, opened, id, ub);
        if (mentions(r, e.name)) type_error(e, "location variable '" + e.name + "' escapes its unpack");
        join(e, u, ub);
        join(e, used, u);
        return r;
      }
      case Op::Boundary: return boundary(e, env, used);
      case Op::Foreign: {
        well_formed_l3(e, e.ann, env.locvars);
        Used u;
        Type t = sub(0, env, u);
        if (!t.is(TyCon::Foreign) || !same(t.arg(0), e.ann))
          type_error(e, "embedding expects foreign<" + print_type(e.ann) + "> but found " + print_type(t));
        if (!l3_duplicable(e.ann)) type_error(e, print_type(e.ann) + " is not Duplicable");
        join(e, used, u);
        return e.ann;
      }
      default:
        type_error(e, std::string("unexpected ") + src::op_name(e.op) + " in l3");
    }
  }

  Type ml(src::Expr& e, const Env& env, Used& used) {
    auto sub = [&](std::size_t i, const Env& en, Used& u) { return check(*e.kids[i], en, u); };
    switch (e.op) {
      case Op::Unit: return Type::unit();
      case Op::Int: return Type::integer();
      case Op::Var: {
        auto it = env.ml.find(e.name);
        if (it == env.ml.end()) type_error(e, "unbound miniml variable '" + e.name + "'");
        return it->second;
      }
      case Op::Lam: {
        well_formed_ml(e, e.ann, env);
        Env inner = env;
        inner.ml[e.name] = e.ann;
        Used u;
        Type body = sub(0, inner, u);
        if (!u.empty())
          type_error(e, "a miniml function may not capture the linear l3 variable '" + names_[*u.begin()] + "'");
        return Type::make(TyCon::Arrow, {e.ann, body});
      }
      case Op::App: {
        Used u;
        Type f = sub(0, env, u);
        if (!f.is(TyCon::Arrow)) type_error(e, "applying a non-function of type " + print_type(f));
        expect(*e.kids[1], sub(1, env, u), f.arg(0), "argument");
        join(e, used, u);
        return f.arg(1);
      }
      case Op::Pair: {
        Used u;
        Type a = sub(0, env, u);
        Type b = sub(1, env, u);
        join(e, used, u);
        return Type::make(TyCon::Prod, {a, b});
      }
      case Op::Fst: case Op::Snd: {
        Type t = sub(0, env, used);
        if (!t.is(TyCon::Prod)) type_error(e, "projection from non-pair type " + print_type(t));
        return t.arg(e.op == Op::Fst ? 0 : 1);
      }
      case Op::Inl: case Op::Inr: {
        well_formed_ml(e, e.ann, env);
        if (!e.ann.is(TyCon::Sum)) type_error(e, "injection annotation must be a sum type");
        expect(*e.kids[0], sub(0, env, used), e.ann.arg(e.op == Op::Inl ? 0 : 1), "injected value");
        return e.ann;
      }
      case Op::Match: {
        Used u;
        Type s = sub(0, env, u);
        if (!s.is(TyCon::Sum)) type_error(e, "match on non-sum type " + print_type(s));
        Env l = env, r = env;
        l.ml[e.name] = s.arg(0);
        r.ml[e.name2] = s.arg(1);
        Used ul, ur;
        Type a = sub(1, l, ul);
        Type b = sub(2, r, ur);
        expect(*e.kids[2], b, a, "match branch");
        if (ul != ur) type_error(e, "the branches of match use different linear variables");
        join(e, u, ul);
        join(e, used, u);
        return a;
      }
      case Op::TyLam: {
        Env inner = env;
        inner.tyvars.insert(e.name);
        Used u;
        Type t = sub(0, inner, u);
        if (!u.empty())
          type_error(e, "a type abstraction may not capture the linear l3 variable '" + names_[*u.begin()] + "'");
        return Type::make(TyCon::Forall, {t}, e.name);
      }
      case Op::TyApp: {
        well_formed_ml(e, e.ann, env);
        Type t = sub(0, env, used);
        if (!t.is(TyCon::Forall)) type_error(e, "type application of non-polymorphic type " + print_type(t));
        return subst_type(t.arg(0), t.name(), e.ann);
      }
      case Op::Ref: return Type::make(TyCon::Ref, {sub(0, env, used)});
      case Op::Deref: {
        Type t = sub(0, env, used);
        if (!t.is(TyCon::Ref)) type_error(e, "dereferencing non-reference type " + print_type(t));
        return t.arg(0);
      }
      case Op::Assign: {
        Used u;
        Type t = sub(0, env, u);
        if (!t.is(TyCon::Ref)) type_error(e, "assigning to non-reference type " + print_type(t));
        expect(*e.kids[1], sub(1, env, u), t.arg(0), "assigned value");
        join(e, used, u);
        return Type::unit();
      }
      case Op::Boundary: return boundary(e, env, used);
      default:
        type_error(e, std::string("unexpected ") + src::op_name(e.op) + " in miniml");
    }
  }
};

// ---------------- compiler ----------------

Expr comp(const Registry& reg, const src::Expr& e, FreshSupply& fs) {
  auto k = [&](std::size_t i) { return comp(reg, *e.kids[i], fs); };
  switch (e.op) {
    case Op::Unit: return unit();
    case Op::True: return num(0);
    case Op::False: return num(1);
    case Op::Int: return num(e.num);
    case Op::Var: return var(e.name);
    case Op::Lam: return lam(e.name, k(0));
    case Op::App: {
      Expr f = k(0);
      return app(f, k(1));
    }
    case Op::If: {
      Expr c = k(0);
      Expr t = k(1);
      return if_(c, t, k(2));
    }
    case Op::Pair: {
      Expr a = k(0);
      return pair(a, k(1));
    }
    case Op::Fst: return fst(k(0));
    case Op::Snd: return snd(k(0));
    case Op::Inl: return inl(k(0));
    case Op::Inr: return inr(k(0));
    case Op::Match: {
      Expr s = k(0);
      Expr l = k(1);
      return match(s, e.name, l, e.name2, k(2));
    }
    case Op::TyLam: case Op::LocLam: return lam("_", k(0));
    case Op::TyApp: case Op::LocApp: return app(k(0), unit());
    case Op::Pack: case Op::Bang: return k(0);
    case Op::Ref: return ref(k(0));
    case Op::Deref: return deref(k(0));
    case Op::Assign: {
      Expr l = k(0);
      return assign(l, k(1));
    }
    case Op::Dupl: {
      std::string x = fs.fresh("x");
      return let(x, k(0), pair(var(x), var(x)));
    }
    case Op::Drop: return seq(k(0), unit());
    case Op::New: {
      std::string x = fs.fresh("x_l");
      Expr v = k(0);
      return seq(callgc(), let(x, alloc(v), pair(unit(), var(x))));
    }
    case Op::Free: {
      std::string x = fs.fresh("x"), r = fs.fresh("x_r");
      return let(x, k(0), let(r, deref(snd(var(x))), seq(free_(snd(var(x))), var(r))));
    }
    case Op::Swap: {
      Expr c = k(0);
      Expr p = k(1);
      Expr v = k(2);
      std::string xp = fs.fresh("x_p"), xv = fs.fresh("x_v");
      return let(xp, p, seq(c, let(xv, deref(var(xp)), seq(assign(var(xp), v), pair(unit(), var(xv))))));
    }
    case Op::LetUnit: {
      Expr b = k(0);
      return seq(b, k(1));
    }
    case Op::LetPair: {
      Expr b = k(0);
      Expr body = k(1);
      std::string p = fs.fresh("p");
      return let(p, b, let(e.name, fst(var(p)), let(e.name2, snd(var(p)), body)));
    }
    case Op::LetBang: case Op::Unpack: {
      Expr b = k(0);
      return let(e.op == Op::Unpack ? e.name2 : e.name, b, k(1));
    }
    case Op::Boundary: return boundary_glue(reg, e.lang, e.ann, e.kids[0]->ty, k(0), fs);
    case Op::Foreign: return k(0);
    default:
      fail_static("compile", e.span, std::string("cannot compile ") + src::op_name(e.op));
  }
}

}  // namespace

Type typecheck(const Registry& reg, src::Expr& e, const Context& ctx, std::vector<LinearUse>* linear_uses) {
  Checker c(reg, linear_uses);
  Env env = c.seed(ctx);
  Used used;
  return c.check(e, env, used);
}

Expr compile(const Registry& reg, const src::Expr& e, FreshSupply& fs) { return comp(reg, e, fs); }

Expr boundary_glue(const Registry& reg, Lang host, const Type& host_type, const Type& inner, const Expr& input,
                   FreshSupply& fs) {
  Dir d;
  auto res = interop::check_boundary(reg, host, host_type, inner, d);
  if (!res) fail_static("convert", {}, res.err.reason, res.err.trail);
  return res.ok->emit(d, fs, &input);
}

}  // namespace polybridge::gclinear
