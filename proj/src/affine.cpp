#include "polybridge/affine.hpp"

namespace polybridge::affine {

using namespace lcvm;
using interop::Dir;
using interop::hole_name;
using src::Mode;
using src::Op;

Registry default_rules() {
  Registry reg(Lang::Affi, Lang::MiniML);
  using R = interop::Rule<interop::LcvmTarget>;
  Type m1 = Type::meta("t1"), m2 = Type::meta("t2");
  Type n1 = Type::meta("s1"), n2 = Type::meta("s2");
  auto h = [](std::size_t i, Dir d, Expr arg) { return hole(hole_name(i, d), std::move(arg)); };

  reg.add(R{"unit-unit", Type::unit(), Type::unit(), {}, input(), input(), "", nullptr});
  reg.add(R{"bool-int", Type::boolean(), Type::integer(), {}, if_(input(), num(0), num(1)), input(), "", nullptr});
  {
    R r;
    r.name = "tensor-pair";
    r.a = Type::make(TyCon::Tensor, {m1, m2});
    r.b = Type::make(TyCon::Prod, {n1, n2});
    r.premises = {{m1, n1}, {m2, n2}};
    auto body = [&](Dir d) {
      return let("x", input(), pair(h(0, d, fst(var("x"))), h(1, d, snd(var("x")))));
    };
    r.glue_ab = body(Dir::AtoB);
    r.glue_ba = body(Dir::BtoA);
    reg.add(std::move(r));
  }
  {
    R r;
    r.name = "lolli-thunked-arrow";
    r.a = Type::make(TyCon::Lolli, {m1, m2});
    r.b = Type::make(TyCon::Arrow, {Type::make(TyCon::Arrow, {Type::unit(), n1}), n2});
    r.premises = {{m1, n1}, {m2, n2}};
    Expr force = app(var("x_thnk"), unit());
    r.glue_ab = let("x", input(),
                    lam("x_thnk", let("x_conv", h(0, Dir::BtoA, force),
                                      let("x_acc", thunk(var("x_conv")),
                                          h(1, Dir::AtoB, app(var("x"), var("x_acc")))))));
    r.glue_ba = let("x", input(),
                    lam("x_thnk", let("x_acc", thunk(h(0, Dir::AtoB, force)),
                                      h(1, Dir::BtoA, app(var("x"), var("x_acc"))))));
    reg.add(std::move(r));
  }
  return reg;
}

namespace {

[[noreturn]] void type_error(const src::Expr& e, const std::string& msg) { fail_static("typecheck", e.span, msg); }

void expect(const src::Expr& e, const Type& got, const Type& want, const char* what) {
  if (!type_equal(got, want))
    type_error(e, std::string(what) + ": expected " + print_type(want) + " but found " + print_type(got));
}

using Used = std::set<int>;

class Checker {
 public:
  explicit Checker(const Registry& reg) : reg_(reg) {}

  Type check(src::Expr& e, const Context& ctx, Used& used) {
    Type t;
    if (e.op == Op::Boundary) {
      t = boundary(e, ctx, used);
    } else if (e.lang == Lang::Affi) {
      t = affi(e, ctx, used);
    } else if (e.lang == Lang::MiniML) {
      t = ml(e, ctx, used);
    } else {
      type_error(e, std::string(lang_name(e.lang)) + " code cannot appear in the affine pair");
    }
    e.ty = t;
    return t;
  }

  void seed(const Context& ctx) {
    for (const auto& [x, b] : ctx.affine) {
      names_[b.id] = x;
      modes_[b.id] = b.mode;
      next_id_ = std::max(next_id_, b.id + 1);
    }
  }

 private:
  const Registry& reg_;
  int next_id_ = 0;
  std::map<int, std::string> names_;
  std::map<int, Mode> modes_;

  // Sequential subterms must consume disjoint affine bindings.
  void join(const src::Expr& at, Used& into, const Used& more) {
    for (int id : more)
      if (!into.insert(id).second) type_error(at, "affine variable '" + names_[id] + "' is used more than once");
  }

  std::string first_static(const Used& u, const Used& except = {}) {
    for (int id : u)
      if (modes_[id] == Mode::Stat && !except.count(id)) return names_[id];
    return {};
  }

  Context bind_affine(const Context& ctx, const std::string& x, const Type& t, Mode m) {
    Context c = ctx;
    c.affi.erase(x);
    int id = next_id_++;
    names_[id] = x;
    modes_[id] = m;
    c.affine[x] = AffineBinding{t, m, id};
    return c;
  }

  Context bind_unrestricted(const Context& ctx, const std::string& x, const Type& t) {
    Context c = ctx;
    c.affine.erase(x);
    c.affi[x] = t;
    return c;
  }

  void well_formed_ml(const src::Expr& at, const Type& t, const Context& ctx) {
    bool foreign = false;
    std::function<void(const Type&)> scan = [&](const Type& u) {
      if (u.is(TyCon::Foreign)) foreign = true;
      for (const auto& a : u.args()) scan(a);
    };
    scan(t);
    if (foreign) type_error(at, "foreign types belong to the gclinear pair");
    for (const auto& v : free_type_vars(t))
      if (!ctx.tyvars.count(v)) type_error(at, "unbound type variable '" + v + "'");
  }

  Type boundary(src::Expr& e, const Context& ctx, Used& used) {
    src::Expr& inner = *e.kids[0];
    if (e.lang == Lang::MiniML) well_formed_ml(e, e.ann, ctx);
    Used in;
    Type it = check(inner, ctx, in);
    if (e.lang == Lang::MiniML) {
      std::string s = first_static(in);
      if (!s.empty()) type_error(e, "static affine variable '" + s + "' cannot cross into miniml");
    }
    join(e, used, in);
    Dir d;
    auto res = interop::check_boundary(reg_, e.lang, e.ann, it, d);
    if (!res) fail_static("convert", e.span, res.err.reason, res.err.trail);
    return e.ann;
  }

  Type affi(src::Expr& e, const Context& ctx, Used& used) {
    auto sub = [&](std::size_t i, const Context& c, Used& u) { return check(*e.kids[i], c, u); };
    switch (e.op) {
      case Op::Unit: return Type::unit();
      case Op::True: case Op::False: return Type::boolean();
      case Op::Int: return Type::integer();
      case Op::Var:
      case Op::AVar: {
        auto a = ctx.affine.find(e.name);
        if (a != ctx.affine.end()) {
          if (e.op == Op::AVar && e.mode != a->second.mode)
            type_error(e, "affine variable '" + e.name + "' is bound with the other mode");
          e.op = Op::AVar;
          e.mode = a->second.mode;
          join(e, used, {a->second.id});
          return a->second.type;
        }
        if (e.op == Op::AVar) type_error(e, "unbound affine variable '" + e.name + "'");
        auto x = ctx.affi.find(e.name);
        if (x == ctx.affi.end()) type_error(e, "unbound affi variable '" + e.name + "'");
        return x->second;
      }
      case Op::Lam: {
        Context inner = bind_affine(ctx, e.name, e.ann, e.mode);
        int self = inner.affine[e.name].id;
        Used body;
        Type r = sub(0, inner, body);
        body.erase(self);
        if (e.mode == Mode::Dyn) {
          std::string s = first_static(body);
          if (!s.empty()) type_error(e, "a dynamic lambda cannot capture static affine variable '" + s + "'");
        }
        join(e, used, body);
        return Type::make(e.mode == Mode::Stat ? TyCon::LolliStatic : TyCon::Lolli, {e.ann, r});
      }
      case Op::App: {
        Type f = sub(0, ctx, used);
        if (!f.is(TyCon::Lolli) && !f.is(TyCon::LolliStatic))
          type_error(e, "applying a non-function of type " + print_type(f));
        Used arg;
        expect(*e.kids[1], sub(1, ctx, arg), f.arg(0), "argument");
        join(*e.kids[1], used, arg);
        return f.arg(1);
      }
      case Op::Pair: {
        Type a = sub(0, ctx, used);
        Used second;
        Type b = sub(1, ctx, second);
        join(*e.kids[1], used, second);
        return Type::make(TyCon::Tensor, {a, b});
      }
      case Op::WithPair: {
        // both components may use the same bindings: only one is ever run
        Used l, r;
        Type a = sub(0, ctx, l);
        Type b = sub(1, ctx, r);
        l.insert(r.begin(), r.end());
        join(e, used, l);
        return Type::make(TyCon::With, {a, b});
      }
      case Op::Proj1: case Op::Proj2: {
        Type t = sub(0, ctx, used);
        if (!t.is(TyCon::With)) type_error(e, "projection from non-with type " + print_type(t));
        return t.arg(e.op == Op::Proj1 ? 0 : 1);
      }
      case Op::Bang: {
        Used inner;
        Type t = sub(0, ctx, inner);
        if (!inner.empty())
          type_error(e, "'!' body uses affine variable '" + names_[*inner.begin()] + "'");
        return Type::make(TyCon::Bang, {t});
      }
      case Op::LetBang: {
        Type t = sub(0, ctx, used);
        if (!t.is(TyCon::Bang)) type_error(*e.kids[0], "let ! expects a ! type but found " + print_type(t));
        Used body;
        Type r = sub(1, bind_unrestricted(ctx, e.name, t.arg(0)), body);
        join(*e.kids[1], used, body);
        return r;
      }
      case Op::LetPair: {
        if (e.name == e.name2) type_error(e, "both components bound to '" + e.name + "'");
        Type t = sub(0, ctx, used);
        if (!t.is(TyCon::Tensor)) type_error(*e.kids[0], "let pair expects a tensor but found " + print_type(t));
        Context c1 = bind_affine(ctx, e.name, t.arg(0), e.mode);
        Context c2 = bind_affine(c1, e.name2, t.arg(1), e.mode2);
        Used body;
        Type r = sub(1, c2, body);
        body.erase(c2.affine[e.name].id);
        body.erase(c2.affine[e.name2].id);
        join(*e.kids[1], used, body);
        return r;
      }
      default:
        type_error(e, std::string("unexpected ") + src::op_name(e.op) + " in affi");
    }
  }

  // MiniML does not enforce affinity: dynamic bindings reached through
  // nested boundaries may repeat (their guards fail at run time).
  Type ml(src::Expr& e, const Context& ctx, Used& used) {
    auto sub = [&](std::size_t i, const Context& c) {
      Used u;
      Type t = check(*e.kids[i], c, u);
      used.insert(u.begin(), u.end());
      return t;
    };
    switch (e.op) {
      case Op::Unit: return Type::unit();
      case Op::Int: return Type::integer();
      case Op::Var: {
        auto it = ctx.ml.find(e.name);
        if (it == ctx.ml.end()) type_error(e, "unbound miniml variable '" + e.name + "'");
        return it->second;
      }
      case Op::Lam: {
        well_formed_ml(e, e.ann, ctx);
        Context inner = ctx;
        inner.ml[e.name] = e.ann;
        return Type::make(TyCon::Arrow, {e.ann, sub(0, inner)});
      }
      case Op::App: {
        Type f = sub(0, ctx);
        if (!f.is(TyCon::Arrow)) type_error(e, "applying a non-function of type " + print_type(f));
        expect(*e.kids[1], sub(1, ctx), f.arg(0), "argument");
        return f.arg(1);
      }
      case Op::Pair: {
        Type a = sub(0, ctx);
        return Type::make(TyCon::Prod, {a, sub(1, ctx)});
      }
      case Op::Fst: case Op::Snd: {
        Type t = sub(0, ctx);
        if (!t.is(TyCon::Prod)) type_error(e, "projection from non-pair type " + print_type(t));
        return t.arg(e.op == Op::Fst ? 0 : 1);
      }
      case Op::Inl: case Op::Inr: {
        well_formed_ml(e, e.ann, ctx);
        if (!e.ann.is(TyCon::Sum)) type_error(e, "injection annotation must be a sum type");
        expect(*e.kids[0], sub(0, ctx), e.ann.arg(e.op == Op::Inl ? 0 : 1), "injected value");
        return e.ann;
      }
      case Op::Match: {
        Type s = sub(0, ctx);
        if (!s.is(TyCon::Sum)) type_error(e, "match on non-sum type " + print_type(s));
        Context l = ctx, r = ctx;
        l.ml[e.name] = s.arg(0);
        r.ml[e.name2] = s.arg(1);
        Type a = sub(1, l);
        expect(*e.kids[2], sub(2, r), a, "match branch");
        return a;
      }
      case Op::TyLam: {
        Context inner = ctx;
        inner.tyvars.insert(e.name);
        return Type::make(TyCon::Forall, {sub(0, inner)}, e.name);
      }
      case Op::TyApp: {
        well_formed_ml(e, e.ann, ctx);
        Type t = sub(0, ctx);
        if (!t.is(TyCon::Forall)) type_error(e, "type application of non-polymorphic type " + print_type(t));
        return subst_type(t.arg(0), t.name(), e.ann);
      }
      case Op::Ref: return Type::make(TyCon::Ref, {sub(0, ctx)});
      case Op::Deref: {
        Type t = sub(0, ctx);
        if (!t.is(TyCon::Ref)) type_error(e, "dereferencing non-reference type " + print_type(t));
        return t.arg(0);
      }
      case Op::Assign: {
        Type t = sub(0, ctx);
        if (!t.is(TyCon::Ref)) type_error(e, "assigning to non-reference type " + print_type(t));
        expect(*e.kids[1], sub(1, ctx), t.arg(0), "assigned value");
        return Type::unit();
      }
      default:
        type_error(e, std::string("unexpected ") + src::op_name(e.op) + " in miniml");
    }
  }
};

// ---------------- compiler ----------------

Expr comp(const Registry& reg, const src::Expr& e, FreshSupply& fs);

Expr guarded(Expr v, FreshSupply& fs) {
  std::string x = fs.fresh("x");
  return let(x, std::move(v), thunk(var(x), fs.fresh("r")));
}

Expr comp(const Registry& reg, const src::Expr& e, FreshSupply& fs) {
  auto k = [&](std::size_t i) { return comp(reg, *e.kids[i], fs); };
  switch (e.op) {
    case Op::Unit: return unit();
    case Op::True: return num(0);
    case Op::False: return num(1);
    case Op::Int: return num(e.num);
    case Op::Var: return var(e.name);
    case Op::AVar: return e.mode == Mode::Dyn ? app(var(e.name), unit()) : var(e.name);
    case Op::Lam: return lam(e.name, k(0), e.lang == Lang::Affi && e.mode == Mode::Stat);
    case Op::App: {
      Expr f = k(0);
      Expr a = k(1);
      if (e.lang == Lang::Affi && e.kids[0]->ty.is(TyCon::Lolli)) return app(f, guarded(a, fs));
      return app(f, a);
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
    case Op::TyLam: return lam("_", k(0));
    case Op::TyApp: return app(k(0), unit());
    case Op::Ref: return ref(k(0));
    case Op::Deref: return deref(k(0));
    case Op::Assign: {
      Expr l = k(0);
      return assign(l, k(1));
    }
    case Op::WithPair: {
      Expr a = k(0);
      return pair(lam("_", a), lam("_", k(1)));
    }
    case Op::Proj1: return app(fst(k(0)), unit());
    case Op::Proj2: return app(snd(k(0)), unit());
    case Op::Bang: return k(0);
    case Op::LetBang: {
      Expr b = k(0);
      return let(e.name, b, k(1));
    }
    case Op::LetPair: {
      Expr bound = k(0);
      Expr body = k(1);
      std::string x = fs.fresh("x");
      if (e.mode == Mode::Stat && e.mode2 == Mode::Stat)
        return let(x, bound, let(e.name, fst(var(x)), let(e.name2, snd(var(x)), body, true), true));
      std::string x1 = fs.fresh("x"), x2 = fs.fresh("x");
      auto bind = [&](const std::string& a, Mode m, const std::string& from, Expr rest) {
        if (m == Mode::Stat) return let(a, var(from), std::move(rest), true);
        return let(a, thunk(var(from), fs.fresh("r")), std::move(rest));
      };
      Expr inner = bind(e.name, e.mode, x1, bind(e.name2, e.mode2, x2, body));
      return let(x, bound, let(x1, fst(var(x)), let(x2, snd(var(x)), inner)));
    }
    case Op::Boundary: return boundary_glue(reg, e.lang, e.ann, e.kids[0]->ty, k(0), fs);
    default:
      fail_static("compile", e.span, std::string("cannot compile ") + src::op_name(e.op));
  }
}

// ---------------- simplifier ----------------

std::size_t count_var(const Expr& e, const std::string& x) {
  if (e->op == LOp::Var) return e->x == x ? 1 : 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    bool shadow = false;
    switch (e->op) {
      case LOp::Let: shadow = i == 1 && e->x == x; break;
      case LOp::Lam: shadow = e->x == x; break;
      case LOp::Match: shadow = (i == 1 && e->x == x) || (i == 2 && e->y == x); break;
      default: break;
    }
    if (!shadow) n += count_var(e->kids[i], x);
  }
  return n;
}

void binders(const Expr& e, std::set<std::string>& out) {
  if (e->op == LOp::Let || e->op == LOp::Lam) out.insert(e->x);
  if (e->op == LOp::Match) {
    out.insert(e->x);
    out.insert(e->y);
  }
  for (const auto& k : e->kids) binders(k, out);
}

// Whether x is the first subterm evaluated by e.
bool first_evaluated(const Expr& e, const std::string& x) {
  switch (e->op) {
    case LOp::Var: return e->x == x;
    case LOp::Pair: case LOp::App: case LOp::Assign:
      if (is_value(e->kids[0])) return first_evaluated(e->kids[1], x);
      return first_evaluated(e->kids[0], x);
    case LOp::Fst: case LOp::Snd: case LOp::Inl: case LOp::Inr: case LOp::Ref: case LOp::Deref:
    case LOp::Alloc: case LOp::Free: case LOp::GcMov: case LOp::If: case LOp::Match: case LOp::Let:
    case LOp::Protect:
      return first_evaluated(e->kids[0], x);
    default:
      return false;
  }
}

bool capture_free(const Expr& v, const Expr& body) {
  std::set<std::string> bs;
  binders(body, bs);
  for (const auto& f : free_vars(v))
    if (bs.count(f)) return false;
  return true;
}

Expr simp(const Expr& e) {
  if (e->kids.empty()) return e;
  auto n = std::make_shared<Node>(*e);
  for (auto& k : n->kids) k = simp(k);
  if (n->op != LOp::Let || n->stat) return n;
  const Expr& bound = n->kids[0];
  const Expr& body = n->kids[1];
  if (is_value(bound) && capture_free(bound, body)) return simp(subst(body, n->x, bound));
  if (count_var(body, n->x) == 1 && first_evaluated(body, n->x) && capture_free(bound, body))
    return subst(body, n->x, bound);
  return n;
}

}  // namespace

Type typecheck(const Registry& reg, src::Expr& e, const Context& ctx) {
  Checker c(reg);
  c.seed(ctx);
  Used used;
  return c.check(e, ctx, used);
}

Expr compile(const Registry& reg, const src::Expr& e, FreshSupply& fs) { return comp(reg, e, fs); }

Expr simplify(const Expr& e) { return simp(e); }

Expr boundary_glue(const Registry& reg, Lang host, const Type& host_type, const Type& inner, const Expr& input,
                   FreshSupply& fs) {
  Dir d;
  auto res = interop::check_boundary(reg, host, host_type, inner, d);
  if (!res) fail_static("convert", {}, res.err.reason, res.err.trail);
  return res.ok->emit(d, fs, &input);
}

}  // namespace polybridge::affine
