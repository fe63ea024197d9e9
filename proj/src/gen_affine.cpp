#include <set>

#include "gen_common.hpp"
#include "polybridge/affine.hpp"

namespace polybridge::testkit::detail {

namespace {

using src::Mode;

const affine::Registry& registry() {
  static const affine::Registry reg = affine::default_rules();
  return reg;
}

// Only the constructors that occur in conversion rules can have partners.
PartnerTable<interop::LcvmTarget>& into_affi() {
  static PartnerTable<interop::LcvmTarget> t(
      registry(), Lang::Affi, enumerate_types({Type::unit(), Type::integer()}, {}, {TyCon::Prod, TyCon::Arrow}, 2));
  return t;
}

PartnerTable<interop::LcvmTarget>& into_ml() {
  static PartnerTable<interop::LcvmTarget> t(
      registry(), Lang::MiniML,
      enumerate_types({Type::unit(), Type::boolean()}, {}, {TyCon::Tensor, TyCon::Lolli}, 2));
  return t;
}

Type identity_type() { return ty(TyCon::Forall, {ty(TyCon::Arrow, {Type::var("a"), Type::var("a")})}, "a"); }
Type church_type() {
  return ty(TyCon::Forall, {ty(TyCon::Arrow, {Type::var("a"), ty(TyCon::Arrow, {Type::var("a"), Type::var("a")})})},
            "a");
}

class AffineGen {
 public:
  AffineGen(Rng& rng, const GenConfig& cfg) : rng_(rng), cfg_(cfg) {}

  ExprPtr root() {
    if (rng_.chance(0.6)) return gen(Lang::Affi, Type::boolean(), cfg_.max_size);
    return in_ml_region([&] { return gen(Lang::MiniML, Type::integer(), cfg_.max_size); });
  }

 private:
  struct AffiBinding {
    std::string name;
    Type type;
    Mode mode = Mode::Dyn;
    bool unrestricted = false;
    bool consumed = false;
    int blocked = 0;
  };
  struct MlBinding {
    std::string name;
    Type type;
  };

  Rng& rng_;
  const GenConfig& cfg_;
  std::vector<AffiBinding> affi_;
  std::vector<MlBinding> ml_;
  std::vector<std::string> tyvars_;
  // consumed flags at the entry of each enclosing miniml region
  std::vector<std::vector<bool>> regions_;
  int counter_ = 0;

  std::string fresh(const char* hint) { return hint + std::to_string(counter_++); }

  // Blocks the selected affine bindings while f runs.
  template <class Pred, class F>
  ExprPtr blocking(Pred pred, F f) {
    std::vector<std::size_t> hit;
    for (std::size_t i = 0; i < affi_.size(); ++i)
      if (!affi_[i].unrestricted && pred(affi_[i])) {
        ++affi_[i].blocked;
        hit.push_back(i);
      }
    ExprPtr e = f();
    for (auto i : hit) --affi_[i].blocked;
    return e;
  }

  template <class F>
  ExprPtr in_ml_region(F f) {
    std::vector<bool> snap;
    for (const auto& b : affi_) snap.push_back(b.consumed);
    regions_.push_back(std::move(snap));
    ExprPtr e = f();
    regions_.pop_back();
    return e;
  }

  ExprPtr with_affi(const std::string& x, const Type& t, Mode m, bool unrestricted, const std::function<ExprPtr()>& f) {
    affi_.push_back({x, t, m, unrestricted, false, 0});
    ExprPtr e = f();
    affi_.pop_back();
    return e;
  }

  ExprPtr with_ml(const std::string& x, const Type& t, const std::function<ExprPtr()>& f) {
    ml_.push_back({x, t});
    ExprPtr e = f();
    ml_.pop_back();
    return e;
  }

  bool usable(std::size_t i) {
    const auto& b = affi_[i];
    if (b.unrestricted) return true;
    if (b.blocked > 0) return false;
    if (!b.consumed) return true;
    // miniml does not track affinity: a dynamic binding consumed inside the
    // current region may be reached again (its guard fails at run time)
    if (regions_.empty() || b.mode != Mode::Dyn || i >= regions_.back().size() || regions_.back()[i]) return false;
    return rng_.chance(0.6);
  }

  ExprPtr affi_variable(const Type& goal) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < affi_.size(); ++i)
      if (type_equal(affi_[i].type, goal) && usable(i)) hits.push_back(i);
    if (hits.empty()) return nullptr;
    auto& b = affi_[rng_.pick(hits)];
    if (b.unrestricted) return named(Lang::Affi, Op::Var, b.name);
    b.consumed = true;
    bool explicit_mode = rng_.chance(0.5);
    auto e = named(Lang::Affi, explicit_mode ? Op::AVar : Op::Var, b.name);
    e->mode = b.mode;
    return e;
  }

  ExprPtr ml_variable(const Type& goal) {
    std::vector<std::string> hits;
    for (const auto& b : ml_)
      if (type_equal(b.type, goal)) hits.push_back(b.name);
    if (hits.empty()) return nullptr;
    return named(Lang::MiniML, Op::Var, rng_.pick(hits));
  }

  Type affi_type(int depth) {
    int pick = rng_.below(depth > 0 ? 11 : 3);
    switch (pick) {
      case 0: case 1: return Type::boolean();
      case 2: return rng_.chance(0.8) ? Type::unit() : Type::integer();
      case 3: case 4: return ty(TyCon::Tensor, {affi_type(depth - 1), affi_type(depth - 1)});
      case 5: case 6: return ty(TyCon::Lolli, {affi_type(depth - 1), affi_type(depth - 1)});
      case 7: return ty(TyCon::LolliStatic, {affi_type(depth - 1), affi_type(depth - 1)});
      case 8: return ty(TyCon::Bang, {affi_type(depth - 1)});
      default: return ty(TyCon::With, {affi_type(depth - 1), affi_type(depth - 1)});
    }
  }
  Type affi_type() { return affi_type(cfg_.max_type_depth > 1 ? 1 : 0); }

  Type ml_type(int depth) {
    int pick = rng_.below(depth > 0 ? 10 : 3);
    switch (pick) {
      case 0: return Type::unit();
      case 1: case 2: return Type::integer();
      case 3: return ty(TyCon::Prod, {ml_type(depth - 1), ml_type(depth - 1)});
      case 4: return ty(TyCon::Sum, {ml_type(depth - 1), ml_type(depth - 1)});
      case 5: case 6: return ty(TyCon::Arrow, {ml_type(depth - 1), ml_type(depth - 1)});
      case 7: return ty(TyCon::Ref, {ml_type(depth - 1)});
      case 8: return identity_type();
      default: return church_type();
    }
  }
  Type ml_type() { return ml_type(cfg_.max_type_depth > 1 ? 1 : 0); }

  ExprPtr gen(Lang l, const Type& goal, int size) {
    if (l == Lang::MiniML && cfg_.boundary_prob > 0 && rng_.chance(0.35)) {
      if (auto r = reach_affine(goal)) return r;
    }
    if (size > 1 && rng_.chance(cfg_.boundary_prob)) {
      if (auto b = try_boundary(l, goal, size)) return b;
    }
    if (size <= 1 || rng_.chance(0.2)) {
      auto v = l == Lang::Affi ? affi_variable(goal) : ml_variable(goal);
      if (v) return v;
    }
    if (size > 2 && rng_.chance(cfg_.elim_weight)) {
      if (auto e = l == Lang::Affi ? affi_elim(goal, size) : ml_elim(goal, size)) return e;
    }
    return l == Lang::Affi ? affi_intro(goal, size) : ml_intro(goal, size);
  }

  // Reaches an enclosing dynamic affine binding from miniml code through a
  // boundary; inside a miniml region this may be its second use.
  ExprPtr reach_affine(const Type& goal) {
    if (!free_type_vars(goal).empty()) return nullptr;
    const auto& partners = into_ml().of(goal);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < affi_.size(); ++i) {
      if (affi_[i].unrestricted || affi_[i].mode != Mode::Dyn) continue;
      bool fits = false;
      for (const auto& p : partners) fits = fits || type_equal(p, affi_[i].type);
      if (fits && usable(i)) hits.push_back(i);
    }
    if (hits.empty()) return nullptr;
    auto& b = affi_[rng_.pick(hits)];
    b.consumed = true;
    auto v = named(Lang::Affi, Op::AVar, b.name);
    v->mode = Mode::Dyn;
    return boundary(Lang::MiniML, goal, v);
  }

  ExprPtr try_boundary(Lang l, const Type& goal, int size) {
    if (l == Lang::MiniML && !free_type_vars(goal).empty()) return nullptr;
    const auto& partners = (l == Lang::Affi ? into_affi() : into_ml()).of(goal);
    if (partners.empty()) return nullptr;
    Type inner = rng_.pick(partners);
    if (l == Lang::Affi) return boundary(l, goal, in_ml_region([&] { return gen(Lang::MiniML, inner, size - 1); }));
    // static bindings from outside cannot cross into miniml
    return boundary(l, goal, blocking([](const AffiBinding& b) { return b.mode == Mode::Stat; },
                                      [&] { return gen(Lang::Affi, inner, size - 1); }));
  }

  ExprPtr affi_intro(const Type& goal, int size) {
    const Lang l = Lang::Affi;
    int rest = size - 1;
    switch (goal.con()) {
      case TyCon::Unit: return node(l, Op::Unit);
      case TyCon::Bool: return node(l, rng_.chance(0.5) ? Op::True : Op::False);
      case TyCon::Int: {
        auto e = node(l, Op::Int);
        e->num = rng_.below(4);
        return e;
      }
      case TyCon::Tensor: {
        auto s = split(rng_, rest, 2);
        ExprPtr a = gen(l, goal.arg(0), s[0]);
        return node(l, Op::Pair, {a, gen(l, goal.arg(1), s[1])});
      }
      case TyCon::Lolli:
      case TyCon::LolliStatic: {
        Mode m = goal.is(TyCon::LolliStatic) ? Mode::Stat : Mode::Dyn;
        std::string x = fresh("a");
        auto body = [&] { return with_affi(x, goal.arg(0), m, false, [&] { return gen(l, goal.arg(1), rest); }); };
        ExprPtr b = m == Mode::Dyn ? blocking([](const AffiBinding& bb) { return bb.mode == Mode::Stat; }, body)
                                   : body();
        return lam(l, x, goal.arg(0), b, m);
      }
      case TyCon::Bang:
        return node(l, Op::Bang, {blocking([](const AffiBinding&) { return true; },
                                           [&] { return gen(l, goal.arg(0), rest); })});
      case TyCon::With: {
        auto s = split(rng_, rest, 2);
        std::vector<bool> before;
        for (const auto& b : affi_) before.push_back(b.consumed);
        ExprPtr a = gen(l, goal.arg(0), s[0]);
        std::vector<bool> left;
        for (std::size_t i = 0; i < affi_.size(); ++i) {
          left.push_back(affi_[i].consumed);
          affi_[i].consumed = before[i];
        }
        ExprPtr b = gen(l, goal.arg(1), s[1]);
        for (std::size_t i = 0; i < affi_.size(); ++i) affi_[i].consumed = affi_[i].consumed || left[i];
        return node(l, Op::WithPair, {a, b});
      }
      default: break;
    }
    throw std::logic_error("affine generator: no affi introduction form for " + print_type(goal));
  }

  ExprPtr affi_elim(const Type& goal, int size) {
    const Lang l = Lang::Affi;
    int rest = size - 1;
    switch (rng_.below(6)) {
      case 4: {
        // a dynamic binding handed straight to miniml, which may use it
        // any number of times
        if (cfg_.boundary_prob <= 0) return nullptr;
        const auto& partners = into_affi().of(goal);
        if (partners.empty()) return nullptr;
        Type inner = rng_.pick(partners);
        Type a = rng_.chance(0.7) ? Type::boolean() : Type::unit();
        auto s = split(rng_, rest, 2);
        std::string x = fresh("a");
        ExprPtr body = with_affi(x, a, Mode::Dyn, false, [&] {
          return blocking([](const AffiBinding& b) { return b.mode == Mode::Stat; }, [&] {
            return boundary(l, goal, in_ml_region([&] { return gen(Lang::MiniML, inner, s[0] + 2); }));
          });
        });
        return node(l, Op::App, {lam(l, x, a, body, Mode::Dyn), gen(l, a, s[1])});
      }
      case 0: {
        Type a = affi_type();
        TyCon arrow = rng_.chance(0.5) ? TyCon::Lolli : TyCon::LolliStatic;
        auto s = split(rng_, rest, 2);
        ExprPtr f = gen(l, ty(arrow, {a, goal}), s[0]);
        return node(l, Op::App, {f, gen(l, a, s[1])});
      }
      case 1: {
        Type a = affi_type(), b = affi_type();
        auto s = split(rng_, rest, 2);
        ExprPtr bound = gen(l, ty(TyCon::Tensor, {a, b}), s[0]);
        std::string x = fresh("a"), y = fresh("a");
        Mode mx = rng_.chance(0.5) ? Mode::Stat : Mode::Dyn, my = rng_.chance(0.5) ? Mode::Stat : Mode::Dyn;
        ExprPtr body = with_affi(x, a, mx, false, [&] {
          return with_affi(y, b, my, false, [&] { return gen(l, goal, s[1]); });
        });
        auto e = node(l, Op::LetPair, {bound, body});
        e->name = x;
        e->name2 = y;
        e->mode = mx;
        e->mode2 = my;
        return e;
      }
      case 2: {
        Type a = affi_type();
        auto s = split(rng_, rest, 2);
        ExprPtr bound = gen(l, ty(TyCon::Bang, {a}), s[0]);
        std::string x = fresh("u");
        ExprPtr body = with_affi(x, a, Mode::Dyn, true, [&] { return gen(l, goal, s[1]); });
        auto e = node(l, Op::LetBang, {bound, body});
        e->name = x;
        return e;
      }
      case 3: {
        Type other = affi_type();
        bool first = rng_.chance(0.5);
        Type w = first ? ty(TyCon::With, {goal, other}) : ty(TyCon::With, {other, goal});
        return node(l, first ? Op::Proj1 : Op::Proj2, {gen(l, w, rest)});
      }
      default: return nullptr;
    }
  }

  ExprPtr ml_intro(const Type& goal, int size) {
    const Lang l = Lang::MiniML;
    int rest = size - 1;
    switch (goal.con()) {
      case TyCon::Unit: return node(l, Op::Unit);
      case TyCon::Int: {
        auto e = node(l, Op::Int);
        e->num = static_cast<std::int64_t>(rng_.below(5)) - 1;
        return e;
      }
      case TyCon::Prod: {
        auto s = split(rng_, rest, 2);
        ExprPtr a = gen(l, goal.arg(0), s[0]);
        return node(l, Op::Pair, {a, gen(l, goal.arg(1), s[1])});
      }
      case TyCon::Sum: {
        bool left = rng_.chance(0.5);
        return annotated(l, left ? Op::Inl : Op::Inr, goal, {gen(l, goal.arg(left ? 0 : 1), rest)});
      }
      case TyCon::Arrow: {
        std::string x = fresh("x");
        return lam(l, x, goal.arg(0), with_ml(x, goal.arg(0), [&] { return gen(l, goal.arg(1), rest); }));
      }
      case TyCon::Ref: return node(l, Op::Ref, {gen(l, goal.arg(0), rest)});
      case TyCon::Forall: {
        tyvars_.push_back(goal.name());
        ExprPtr body = gen(l, goal.arg(0), rest);
        tyvars_.pop_back();
        return named(l, Op::TyLam, goal.name(), {body});
      }
      case TyCon::TVar:
        if (auto v = ml_variable(goal)) return v;
        break;
      default: break;
    }
    throw std::logic_error("affine generator: no miniml introduction form for " + print_type(goal));
  }

  ExprPtr ml_elim(const Type& goal, int size) {
    const Lang l = Lang::MiniML;
    if (!free_type_vars(goal).empty()) return nullptr;
    int rest = size - 1;
    switch (rng_.below(8)) {
      case 0: {
        Type a = ml_type();
        auto s = split(rng_, rest, 2);
        ExprPtr f = gen(l, ty(TyCon::Arrow, {a, goal}), s[0]);
        return node(l, Op::App, {f, gen(l, a, s[1])});
      }
      case 1: {
        Type other = ml_type();
        bool first = rng_.chance(0.5);
        Type p = first ? ty(TyCon::Prod, {goal, other}) : ty(TyCon::Prod, {other, goal});
        return node(l, first ? Op::Fst : Op::Snd, {gen(l, p, rest)});
      }
      case 2: {
        Type a = ml_type(), b = ml_type();
        auto s = split(rng_, rest, 3);
        ExprPtr scrut = gen(l, ty(TyCon::Sum, {a, b}), s[0]);
        std::string x = fresh("x"), y = fresh("x");
        ExprPtr left = with_ml(x, a, [&] { return gen(l, goal, s[1]); });
        ExprPtr right = with_ml(y, b, [&] { return gen(l, goal, s[2]); });
        auto e = node(l, Op::Match, {scrut, left, right});
        e->name = x;
        e->name2 = y;
        return e;
      }
      case 3: {
        bool church = rng_.chance(0.5);
        auto s = split(rng_, rest, church ? 3 : 2);
        ExprPtr f = annotated(l, Op::TyApp, goal, {gen(l, church ? church_type() : identity_type(), s[0])});
        ExprPtr e = node(l, Op::App, {f, gen(l, goal, s[1])});
        if (church) e = node(l, Op::App, {e, gen(l, goal, s[2])});
        return e;
      }
      case 4: return node(l, Op::Deref, {gen(l, ty(TyCon::Ref, {goal}), rest)});
      case 5: {
        if (!goal.is(TyCon::Unit)) return nullptr;
        Type a = ml_type();
        auto s = split(rng_, rest, 2);
        ExprPtr r = gen(l, ty(TyCon::Ref, {a}), s[0]);
        return node(l, Op::Assign, {r, gen(l, a, s[1])});
      }
      default: return nullptr;
    }
  }
};

}  // namespace

ExprPtr gen_affine(Rng& rng, const GenConfig& cfg) { return AffineGen(rng, cfg).root(); }

}  // namespace polybridge::testkit::detail
