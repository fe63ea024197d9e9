#include <algorithm>
#include <functional>
#include <stdexcept>

#include "gen_common.hpp"
#include "polybridge/gclinear.hpp"

namespace polybridge::testkit::detail {

namespace {

const gclinear::Registry& registry() {
  static const gclinear::Registry reg = gclinear::default_rules();
  return reg;
}

Type church_type() {
  return ty(TyCon::Forall, {ty(TyCon::Arrow, {Type::var("a"), ty(TyCon::Arrow, {Type::var("a"), Type::var("a")})})},
            "a");
}
Type identity_type() { return ty(TyCon::Forall, {ty(TyCon::Arrow, {Type::var("a"), Type::var("a")})}, "a"); }
Type foreign(const Type& t) { return ty(TyCon::Foreign, {t}); }
Type bang(const Type& t) { return ty(TyCon::Bang, {t}); }
Type package(const Type& payload) { return l3_canonical(gclinear::ref_package(payload, "z")); }

std::vector<Type> ml_candidates() {
  std::vector<Type> base = {foreign(Type::unit()), foreign(Type::boolean()), foreign(bang(Type::boolean())),
                            church_type()};
  std::vector<Type> all = base;
  for (const auto& b : base) all.push_back(ty(TyCon::Ref, {b}));
  return all;
}

std::vector<Type> l3_candidates() {
  std::vector<Type> base = {Type::unit(), Type::boolean(), bang(Type::boolean()), bang(Type::unit())};
  std::vector<Type> all = base;
  for (const auto& b : base) all.push_back(package(b));
  return all;
}

// host l3, inner miniml
PartnerTable<interop::LcvmTarget>& into_l3() {
  static PartnerTable<interop::LcvmTarget> t(registry(), Lang::L3, ml_candidates());
  return t;
}

// host miniml, inner l3
PartnerTable<interop::LcvmTarget>& into_ml() {
  static PartnerTable<interop::LcvmTarget> t(registry(), Lang::MiniML, l3_candidates());
  return t;
}

bool same(const Type& a, const Type& b) { return type_equal(l3_canonical(a), l3_canonical(b)); }

// Names of the linear bindings a subterm must consume, each exactly once.
using Must = std::vector<std::string>;

Must without(const Must& m, const std::string& x) {
  Must out;
  for (const auto& y : m)
    if (y != x) out.push_back(y);
  return out;
}

class GcLinearGen {
 public:
  GcLinearGen(Rng& rng, const GenConfig& cfg) : rng_(rng), cfg_(cfg) {}

  ExprPtr root() {
    if (rng_.chance(0.6)) return l3(Type::boolean(), cfg_.max_size, {});
    return ml(Type::integer(), cfg_.max_size, {});
  }

 private:
  struct L3Binding {
    std::string name;
    Type type;
    bool unrestricted;
  };
  struct MlBinding {
    std::string name;
    Type type;
  };

  Rng& rng_;
  const GenConfig& cfg_;
  std::vector<L3Binding> l3_;
  std::vector<MlBinding> ml_;
  std::vector<std::string> locs_;
  int counter_ = 0;

  std::string fresh(const char* hint) { return hint + std::to_string(counter_++); }
  bool boundaries() const { return cfg_.boundary_prob > 0; }

  static bool linear(const Type& t) { return !l3_duplicable(t); }

  const L3Binding* find(const std::string& x) const {
    for (auto it = l3_.rbegin(); it != l3_.rend(); ++it)
      if (it->name == x) return &*it;
    return nullptr;
  }

  // Runs f with x bound; a linear x joins the obligations passed to f.
  ExprPtr bind_l3(const std::string& x, const Type& t, bool unrestricted, const Must& must,
                  const std::function<ExprPtr(const Must&)>& f) {
    Type c = l3_canonical(t);
    l3_.push_back({x, c, unrestricted});
    Must m = must;
    if (!unrestricted && linear(c)) m.push_back(x);
    ExprPtr e = f(m);
    l3_.pop_back();
    return e;
  }

  ExprPtr bind_ml(const std::string& x, const Type& t, const std::function<ExprPtr()>& f) {
    ml_.push_back({x, t});
    ExprPtr e = f();
    ml_.pop_back();
    return e;
  }

  // ---- types ----

  Type l3_type(int depth) {
    int pick = rng_.below(depth > 0 ? 9 : 3);
    switch (pick) {
      case 0: case 1: return Type::boolean();
      case 2: return Type::unit();
      case 3: case 4: return ty(TyCon::Tensor, {l3_type(depth - 1), l3_type(depth - 1)});
      case 5: case 6: return ty(TyCon::Lolli, {l3_type(depth - 1), l3_type(depth - 1)});
      case 7: return bang(rng_.chance(0.5) ? Type::boolean() : ty(TyCon::Lolli, {Type::boolean(), Type::boolean()}));
      default: return package(payload_type());
    }
  }
  Type l3_type() { return l3_type(cfg_.max_type_depth > 1 ? 1 : 0); }

  Type payload_type() {
    switch (rng_.below(5)) {
      case 0: case 1: return Type::boolean();
      case 2: return Type::unit();
      case 3: return bang(Type::boolean());
      default: return ty(TyCon::Tensor, {Type::boolean(), Type::boolean()});
    }
  }

  Type ml_type(int depth) {
    int pick = rng_.below(depth > 0 ? 11 : 3);
    // foreign types are only inhabited through a boundary
    if (!boundaries() && (pick == 2 || pick == 10)) pick = 1;
    switch (pick) {
      case 0: return Type::unit();
      case 1: return Type::integer();
      case 2: return foreign(Type::boolean());
      case 3: return ty(TyCon::Prod, {ml_type(depth - 1), ml_type(depth - 1)});
      case 4: return ty(TyCon::Sum, {ml_type(depth - 1), ml_type(depth - 1)});
      case 5: case 6: return ty(TyCon::Arrow, {ml_type(depth - 1), ml_type(depth - 1)});
      case 7: return ty(TyCon::Ref, {ml_type(depth - 1)});
      case 8: return identity_type();
      case 9: return church_type();
      default: return foreign(rng_.chance(0.5) ? Type::unit() : bang(Type::boolean()));
    }
  }
  Type ml_type() { return ml_type(cfg_.max_type_depth > 1 ? 1 : 0); }

  // ---- l3 ----

  ExprPtr l3(const Type& goal_in, int size, const Must& must) {
    Type goal = l3_canonical(goal_in);
    if (!must.empty()) return l3_owing(goal, size, must);
    if (size > 1 && boundaries() && rng_.chance(cfg_.boundary_prob)) {
      if (auto b = l3_boundary(goal, size, {})) return b;
    }
    if (size <= 1 || rng_.chance(0.2)) {
      if (auto v = l3_variable(goal)) return v;
    }
    if (size > 2 && rng_.chance(cfg_.elim_weight)) {
      if (auto e = l3_elim(goal, size)) return e;
    }
    return l3_intro(goal, size, {});
  }

  ExprPtr l3_variable(const Type& goal) {
    std::vector<std::string> hits;
    for (const auto& b : l3_)
      if ((b.unrestricted || !linear(b.type)) && same(b.type, goal) && find(b.name) == &b) hits.push_back(b.name);
    if (hits.empty()) return nullptr;
    return named(Lang::L3, Op::Var, rng_.pick(hits));
  }

  // Produces a term of type goal that consumes every binding in must.
  ExprPtr l3_owing(const Type& goal, int size, const Must& must) {
    if (must.size() == 1 && same(find(must[0])->type, goal) && (size <= 1 || rng_.chance(0.5)))
      return named(Lang::L3, Op::Var, must[0]);
    if (size <= 1 || rng_.chance(0.5)) return eliminate(goal, size, must, rng_.pick(must));
    int rest = size - 1;
    switch (rng_.below(6)) {
      case 0: {
        Type a = l3_type();
        auto s = split(rng_, rest, 2);
        auto [m1, m2] = deal(must);
        ExprPtr f = l3(ty(TyCon::Lolli, {a, goal}), s[0], m1);
        return node(Lang::L3, Op::App, {f, l3(a, s[1], m2)});
      }
      case 1: {
        auto s = split(rng_, rest, 3);
        auto [m1, m2] = deal(must);
        ExprPtr c = l3(Type::boolean(), s[0], m1);
        ExprPtr t = l3(goal, s[1], m2);
        return node(Lang::L3, Op::If, {c, t, l3(goal, s[2], m2)});
      }
      case 2: {
        auto s = split(rng_, rest, 2);
        auto [m1, m2] = deal(must);
        ExprPtr u = l3(Type::unit(), s[0], m1);
        return node(Lang::L3, Op::LetUnit, {u, l3(goal, s[1], m2)});
      }
      case 3:
        if (boundaries()) {
          if (auto b = l3_boundary(goal, size, must)) return b;
        }
        break;
      default: break;
    }
    if (goal.is(TyCon::Tensor) || goal.is(TyCon::Lolli)) return l3_intro(goal, size, must);
    return eliminate(goal, size, must, rng_.pick(must));
  }

  std::pair<Must, Must> deal(const Must& must) {
    Must a, b;
    for (const auto& x : must) (rng_.chance(0.5) ? a : b).push_back(x);
    return {a, b};
  }

  const L3Binding* pointer_to(const std::string& z) const {
    for (auto it = l3_.rbegin(); it != l3_.rend(); ++it) {
      Type c = l3_canonical(it->type);
      if (c.is(TyCon::Bang) && c.arg(0).is(TyCon::Ptr) && c.arg(0).name() == z && find(it->name) == &*it)
        return &*it;
    }
    return nullptr;
  }

  // Consumes x (one of must) with its elimination form.
  ExprPtr eliminate(const Type& goal, int size, const Must& must, const std::string& x) {
    const Lang l = Lang::L3;
    Type t = find(x)->type;
    Must rest_must = without(must, x);
    int rest = std::max(0, size - 2);
    auto var = [&] { return named(l, Op::Var, x); };
    switch (t.con()) {
      case TyCon::Tensor: {
        std::string a = fresh("p"), b = fresh("p");
        ExprPtr body = bind_l3(a, t.arg(0), false, rest_must, [&](const Must& m1) {
          return bind_l3(b, t.arg(1), false, m1, [&](const Must& m2) { return l3(goal, rest, m2); });
        });
        auto e = node(l, Op::LetPair, {var(), body});
        e->name = a;
        e->name2 = b;
        return e;
      }
      case TyCon::Lolli: {
        std::string y = fresh("y");
        auto s = split(rng_, rest, 2);
        ExprPtr arg = l3(t.arg(0), s[0], {});
        ExprPtr body = bind_l3(y, t.arg(1), false, rest_must, [&](const Must& m) { return l3(goal, s[1], m); });
        return node(l, Op::App, {lam(l, y, t.arg(1), body), node(l, Op::App, {var(), arg})});
      }
      case TyCon::Exists: {
        std::string z = fresh("l"), y = fresh("y");
        Type opened = rename_loc(t.arg(0), t.name(), z);
        locs_.push_back(z);
        ExprPtr body = bind_l3(y, opened, false, rest_must, [&](const Must& m) { return l3(goal, rest, m); });
        locs_.pop_back();
        auto e = node(l, Op::Unpack, {var(), body});
        e->name = z;
        e->name2 = y;
        return e;
      }
      case TyCon::Cap: return release(goal, size, rest_must, x, t);
      default: break;
    }
    throw std::logic_error("gclinear generator: cannot eliminate " + x + " : " + print_type(t));
  }

  // A capability is swapped, freed, freed through a location-polymorphic
  // function, or handed to miniml with its pointer.
  ExprPtr release(const Type& goal, int size, const Must& must, const std::string& c, const Type& cap) {
    const Lang l = Lang::L3;
    const std::string z = cap.name();
    const L3Binding* ptr = pointer_to(z);
    if (!ptr) throw std::logic_error("gclinear generator: no pointer for location " + z);
    std::string p = ptr->name;
    Type payload = cap.arg(0);
    int rest = std::max(0, size - 3);
    auto packed = [&] {
      auto e = named(l, Op::Pack, z, {node(l, Op::Pair, {named(l, Op::Var, c), named(l, Op::Var, p)})});
      return e;
    };
    // continue with the released payload bound to v
    auto then = [&](ExprPtr released, const Type& vt) {
      std::string v = fresh("v");
      ExprPtr body = bind_l3(v, vt, false, must, [&](const Must& m) { return l3(goal, rest, m); });
      return node(l, Op::App, {lam(l, v, vt, body), std::move(released)});
    };
    int choice = size <= 1 ? 1 : rng_.below(5);
    switch (choice) {
      case 0: {
        Type nt = rng_.chance(0.7) ? payload_type() : l3_type();
        auto s = split(rng_, rest, 2);
        ExprPtr newval = l3(nt, s[0], {});
        std::string c2 = fresh("c"), old = fresh("o");
        ExprPtr body = bind_l3(c2, ty(TyCon::Cap, {nt}, z), false, must, [&](const Must& m1) {
          return bind_l3(old, payload, false, m1, [&](const Must& m2) { return l3(goal, s[1], m2); });
        });
        auto e = node(l, Op::LetPair,
                      {node(l, Op::Swap, {named(l, Op::Var, c), named(l, Op::Var, p), newval}), body});
        e->name = c2;
        e->name2 = old;
        return e;
      }
      case 2: {
        // (/\w. \k:Cap w t. \q:Ptr w. free <w, (k, q)>) [z] c p
        std::string w = fresh("w"), k = fresh("k"), q = fresh("q");
        Type kt = ty(TyCon::Cap, {payload}, w), qt = ty(TyCon::Ptr, {}, w);
        auto fr = node(l, Op::Free, {named(l, Op::Pack, w, {node(l, Op::Pair, {named(l, Op::Var, k),
                                                                                named(l, Op::Var, q)})})});
        auto poly = named(l, Op::LocLam, w, {lam(l, k, kt, lam(l, q, qt, fr))});
        auto inst = named(l, Op::LocApp, z, {poly});
        return then(node(l, Op::App, {node(l, Op::App, {inst, named(l, Op::Var, c)}), named(l, Op::Var, p)}),
                    payload);
      }
      case 3: case 4: {
        if (!boundaries()) break;
        const auto& partners = into_l3().of(payload);
        if (partners.empty()) break;
        Type part = rng_.pick(partners);
        Type rt = ty(TyCon::Ref, {part});
        ExprPtr cell = boundary(Lang::MiniML, rt, packed());
        ExprPtr use;
        if (choice == 3 || size <= 2) {
          use = node(Lang::MiniML, Op::Deref, {cell});
        } else {
          // write through the collected cell before reading it
          std::string r = fresh("r"), u = fresh("u");
          ExprPtr written = ml(part, 2, {});
          ExprPtr read = lam(Lang::MiniML, u, Type::unit(), node(Lang::MiniML, Op::Deref, {named(Lang::MiniML, Op::Var, r)}));
          ExprPtr body = node(Lang::MiniML, Op::App,
                              {read, node(Lang::MiniML, Op::Assign, {named(Lang::MiniML, Op::Var, r), written})});
          use = node(Lang::MiniML, Op::App, {lam(Lang::MiniML, r, rt, body), cell});
        }
        return then(boundary(l, payload, use), payload);
      }
      default: break;
    }
    return then(node(l, Op::Free, {packed()}), payload);
  }

  // l3<< e >> : goal, carrying the obligations into the miniml side.
  ExprPtr l3_boundary(const Type& goal, int size, const Must& must) {
    const auto& partners = into_l3().of(goal);
    if (partners.empty()) return nullptr;
    Type inner = rng_.pick(partners);
    return boundary(Lang::L3, goal, ml(inner, size - 1, must));
  }

  ExprPtr l3_value(const Type& goal, int size) {
    const Lang l = Lang::L3;
    if (auto v = l3_variable(goal); v && rng_.chance(0.3)) return v;
    switch (goal.con()) {
      case TyCon::Unit: return node(l, Op::Unit);
      case TyCon::Bool: return node(l, rng_.chance(0.5) ? Op::True : Op::False);
      case TyCon::Tensor: {
        auto s = split(rng_, std::max(0, size - 1), 2);
        ExprPtr a = l3_value(goal.arg(0), s[0]);
        return node(l, Op::Pair, {a, l3_value(goal.arg(1), s[1])});
      }
      case TyCon::Bang: return node(l, Op::Bang, {l3_value(goal.arg(0), size - 1)});
      case TyCon::Lolli: return l3_intro(goal, size, {});
      default: break;
    }
    if (auto v = l3_variable(goal)) return v;
    throw std::logic_error("gclinear generator: no value of type " + print_type(goal));
  }

  ExprPtr l3_intro(const Type& goal, int size, const Must& must) {
    const Lang l = Lang::L3;
    int rest = std::max(0, size - 1);
    switch (goal.con()) {
      case TyCon::Unit: return node(l, Op::Unit);
      case TyCon::Bool: return node(l, rng_.chance(0.5) ? Op::True : Op::False);
      case TyCon::Tensor: {
        auto s = split(rng_, rest, 2);
        auto [m1, m2] = deal(must);
        ExprPtr a = l3(goal.arg(0), s[0], m1);
        return node(l, Op::Pair, {a, l3(goal.arg(1), s[1], m2)});
      }
      case TyCon::Lolli: {
        std::string y = fresh("y");
        ExprPtr body = bind_l3(y, goal.arg(0), false, must, [&](const Must& m) { return l3(goal.arg(1), rest, m); });
        return lam(l, y, goal.arg(0), body);
      }
      case TyCon::Bang: return node(l, Op::Bang, {l3_value(goal.arg(0), rest)});
      case TyCon::Exists: return node(l, Op::New, {l3(goal.arg(0).arg(0).arg(0), rest, must)});
      default: break;
    }
    throw std::logic_error("gclinear generator: no l3 introduction form for " + print_type(goal));
  }

  ExprPtr l3_elim(const Type& goal, int size) {
    const Lang l = Lang::L3;
    int rest = size - 1;
    switch (rng_.below(10)) {
      case 0: {
        Type a = l3_type();
        auto s = split(rng_, rest, 2);
        ExprPtr f = l3(ty(TyCon::Lolli, {a, goal}), s[0], {});
        return node(l, Op::App, {f, l3(a, s[1], {})});
      }
      case 1: {
        auto s = split(rng_, rest, 3);
        ExprPtr c = l3(Type::boolean(), s[0], {});
        ExprPtr t = l3(goal, s[1], {});
        return node(l, Op::If, {c, t, l3(goal, s[2], {})});
      }
      case 2: {
        Type a = l3_type(), b = l3_type();
        auto s = split(rng_, rest, 2);
        ExprPtr bound = l3(ty(TyCon::Tensor, {a, b}), s[0], {});
        std::string x = fresh("p"), y = fresh("p");
        ExprPtr body = bind_l3(x, a, false, {}, [&](const Must& m1) {
          return bind_l3(y, b, false, m1, [&](const Must& m2) { return l3(goal, s[1], m2); });
        });
        auto e = node(l, Op::LetPair, {bound, body});
        e->name = x;
        e->name2 = y;
        return e;
      }
      case 3: {
        auto s = split(rng_, rest, 2);
        ExprPtr u = l3(Type::unit(), s[0], {});
        return node(l, Op::LetUnit, {u, l3(goal, s[1], {})});
      }
      case 4: {
        Type a = rng_.chance(0.5) ? Type::boolean() : ty(TyCon::Lolli, {Type::boolean(), Type::boolean()});
        auto s = split(rng_, rest, 2);
        ExprPtr bound = l3(bang(a), s[0], {});
        std::string x = fresh("u");
        ExprPtr body = bind_l3(x, a, true, {}, [&](const Must& m) { return l3(goal, s[1], m); });
        auto e = node(l, Op::LetBang, {bound, body});
        e->name = x;
        return e;
      }
      case 5: {
        Type a = rng_.chance(0.6) ? Type::boolean() : bang(Type::boolean());
        auto s = split(rng_, rest, 2);
        ExprPtr d = node(l, Op::Dupl, {l3(a, s[0], {})});
        std::string x = fresh("d"), y = fresh("d");
        ExprPtr body = bind_l3(x, a, false, {}, [&](const Must&) {
          return bind_l3(y, a, false, {}, [&](const Must&) { return l3(goal, s[1], {}); });
        });
        auto e = node(l, Op::LetPair, {d, body});
        e->name = x;
        e->name2 = y;
        return e;
      }
      case 6: {
        auto s = split(rng_, rest, 2);
        ExprPtr d = node(l, Op::Drop, {l3(rng_.chance(0.5) ? Type::boolean() : Type::unit(), s[0], {})});
        return node(l, Op::LetUnit, {d, l3(goal, s[1], {})});
      }
      case 7: case 8: {
        // allocate, then the cell is an obligation of the body
        Type payload = payload_type();
        auto s = split(rng_, rest, 2);
        ExprPtr bound = node(l, Op::New, {l3(payload, s[0], {})});
        std::string z = fresh("l"), y = fresh("y");
        locs_.push_back(z);
        ExprPtr body = bind_l3(y, gclinear::ref_package(payload, z).arg(0), false, {},
                               [&](const Must& m) { return l3(goal, s[1] + 2, m); });
        locs_.pop_back();
        auto e = node(l, Op::Unpack, {bound, body});
        e->name = z;
        e->name2 = y;
        return e;
      }
      default: {
        if (!boundaries() || !l3_duplicable(goal)) return nullptr;
        Type want = foreign(goal);
        return annotated(l, Op::Foreign, goal, {ml(want, rest, {})});
      }
    }
  }

  // ---- miniml ----

  ExprPtr ml_variable(const Type& goal) {
    std::vector<std::string> hits;
    for (const auto& b : ml_)
      if (type_equal(b.type, goal)) hits.push_back(b.name);
    if (hits.empty()) return nullptr;
    return named(Lang::MiniML, Op::Var, rng_.pick(hits));
  }

  ExprPtr ml(const Type& goal, int size, const Must& must) {
    if (!must.empty()) return ml_owing(goal, size, must);
    bool closed = free_type_vars(goal).empty();
    if (closed && boundaries() && (goal.is(TyCon::Foreign) || (size > 1 && rng_.chance(cfg_.boundary_prob)))) {
      const auto& partners = into_ml().of(goal);
      if (!partners.empty()) return boundary(Lang::MiniML, goal, l3(rng_.pick(partners), size - 1, {}));
    }
    if (size <= 1 || rng_.chance(0.2) || goal.is(TyCon::Foreign)) {
      if (auto v = ml_variable(goal)) return v;
    }
    if (closed && (size > 2 || goal.is(TyCon::Foreign)) && rng_.chance(goal.is(TyCon::Foreign) ? 1.0 : cfg_.elim_weight)) {
      if (auto e = ml_elim(goal, std::max(size, 3))) return e;
    }
    return ml_intro(goal, size);
  }

  // Routes the obligations into a single l3 boundary, never under a
  // miniml lambda.
  ExprPtr ml_owing(const Type& goal, int size, const Must& must) {
    const Lang l = Lang::MiniML;
    const auto& partners = into_ml().of(goal);
    if (!partners.empty() && (size <= 2 || rng_.chance(0.5)))
      return boundary(l, goal, l3(rng_.pick(partners), size - 1, must));
    Type carrier = rng_.chance(0.5) ? foreign(Type::boolean()) : church_type();
    auto s = split(rng_, std::max(0, size - 1), 2);
    if (goal.is(TyCon::Prod) && rng_.chance(0.5)) {
      bool left = rng_.chance(0.5);
      ExprPtr a = left ? ml(goal.arg(0), s[0], must) : ml(goal.arg(0), s[0], {});
      ExprPtr b = left ? ml(goal.arg(1), s[1], {}) : ml(goal.arg(1), s[1], must);
      return node(l, Op::Pair, {a, b});
    }
    ExprPtr f = ml(ty(TyCon::Arrow, {carrier, goal}), s[0], {});
    return node(l, Op::App, {f, ml(carrier, s[1], must)});
  }

  ExprPtr ml_intro(const Type& goal, int size) {
    const Lang l = Lang::MiniML;
    int rest = std::max(0, size - 1);
    switch (goal.con()) {
      case TyCon::Unit: return node(l, Op::Unit);
      case TyCon::Int: {
        auto e = node(l, Op::Int);
        e->num = static_cast<std::int64_t>(rng_.below(5)) - 1;
        return e;
      }
      case TyCon::Prod: {
        auto s = split(rng_, rest, 2);
        ExprPtr a = ml(goal.arg(0), s[0], {});
        return node(l, Op::Pair, {a, ml(goal.arg(1), s[1], {})});
      }
      case TyCon::Sum: {
        bool left = rng_.chance(0.5);
        return annotated(l, left ? Op::Inl : Op::Inr, goal, {ml(goal.arg(left ? 0 : 1), rest, {})});
      }
      case TyCon::Arrow: {
        std::string x = fresh("x");
        return lam(l, x, goal.arg(0), bind_ml(x, goal.arg(0), [&] { return ml(goal.arg(1), rest, {}); }));
      }
      case TyCon::Ref: return node(l, Op::Ref, {ml(goal.arg(0), rest, {})});
      case TyCon::Forall: return named(l, Op::TyLam, goal.name(), {ml(goal.arg(0), rest, {})});
      case TyCon::TVar:
        if (auto v = ml_variable(goal)) return v;
        break;
      case TyCon::Foreign:
        if (auto v = ml_variable(goal)) return v;
        return boundary(l, goal, l3(goal.arg(0), rest, {}));
      default: break;
    }
    throw std::logic_error("gclinear generator: no miniml introduction form for " + print_type(goal));
  }

  ExprPtr ml_elim(const Type& goal, int size) {
    const Lang l = Lang::MiniML;
    int rest = size - 1;
    switch (rng_.below(7)) {
      case 0: {
        Type a = ml_type();
        auto s = split(rng_, rest, 2);
        ExprPtr f = ml(ty(TyCon::Arrow, {a, goal}), s[0], {});
        return node(l, Op::App, {f, ml(a, s[1], {})});
      }
      case 1: {
        Type other = ml_type();
        bool first = rng_.chance(0.5);
        Type p = first ? ty(TyCon::Prod, {goal, other}) : ty(TyCon::Prod, {other, goal});
        return node(l, first ? Op::Fst : Op::Snd, {ml(p, rest, {})});
      }
      case 2: {
        Type a = ml_type(), b = ml_type();
        auto s = split(rng_, rest, 3);
        ExprPtr scrut = ml(ty(TyCon::Sum, {a, b}), s[0], {});
        std::string x = fresh("x"), y = fresh("x");
        ExprPtr left = bind_ml(x, a, [&] { return ml(goal, s[1], {}); });
        ExprPtr right = bind_ml(y, b, [&] { return ml(goal, s[2], {}); });
        auto e = node(l, Op::Match, {scrut, left, right});
        e->name = x;
        e->name2 = y;
        return e;
      }
      case 3: {
        bool church = rng_.chance(0.6);
        auto s = split(rng_, rest, church ? 3 : 2);
        ExprPtr f = annotated(l, Op::TyApp, goal, {ml(church ? church_type() : identity_type(), s[0], {})});
        ExprPtr e = node(l, Op::App, {f, ml(goal, s[1], {})});
        if (church) e = node(l, Op::App, {e, ml(goal, s[2], {})});
        return e;
      }
      case 4: return node(l, Op::Deref, {ml(ty(TyCon::Ref, {goal}), rest, {})});
      case 5: {
        if (!goal.is(TyCon::Unit)) return nullptr;
        Type a = ml_type();
        auto s = split(rng_, rest, 2);
        ExprPtr r = ml(ty(TyCon::Ref, {a}), s[0], {});
        return node(l, Op::Assign, {r, ml(a, s[1], {})});
      }
      default: return nullptr;
    }
  }
};

}  // namespace

ExprPtr gen_gclinear(Rng& rng, const GenConfig& cfg) { return GcLinearGen(rng, cfg).root(); }

}  // namespace polybridge::testkit::detail
