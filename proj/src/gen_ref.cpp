#include "gen_common.hpp"

#include "polybridge/refpair.hpp"

namespace polybridge::testkit::detail {

std::vector<Type> enumerate_types(const std::vector<Type>& leaves, const std::vector<TyCon>& unary,
                                  const std::vector<TyCon>& binary, int depth) {
  std::vector<Type> all = leaves;
  for (int d = 0; d < depth; ++d) {
    std::vector<Type> next = leaves;
    for (TyCon c : unary)
      for (const auto& t : all) next.push_back(ty(c, {t}));
    for (TyCon c : binary)
      for (const auto& a : all)
        for (const auto& b : all) next.push_back(ty(c, {a, b}));
    all = std::move(next);
  }
  return all;
}

namespace {

const refpair::Registry& registry() {
  static const refpair::Registry reg = refpair::default_rules();
  return reg;
}

PartnerTable<interop::StackTarget>& into_hl() {
  static PartnerTable<interop::StackTarget> t(
      registry(), Lang::RefHL, enumerate_types({Type::integer()}, {TyCon::Array, TyCon::Ref}, {TyCon::Arrow}, 2));
  return t;
}

PartnerTable<interop::StackTarget>& into_ll() {
  static PartnerTable<interop::StackTarget> t(
      registry(), Lang::RefLL,
      enumerate_types({Type::unit(), Type::boolean()}, {TyCon::Ref}, {TyCon::Sum, TyCon::Prod, TyCon::Arrow}, 2));
  return t;
}

class RefGen {
 public:
  RefGen(Rng& rng, const GenConfig& cfg) : rng_(rng), cfg_(cfg) {}

  ExprPtr root() {
    if (rng_.chance(0.5)) return gen(Lang::RefHL, Type::boolean(), cfg_.max_size);
    return gen(Lang::RefLL, Type::integer(), cfg_.max_size);
  }

 private:
  struct Binding {
    std::string name;
    Type type;
  };

  std::vector<Binding>& env(Lang l) { return l == Lang::RefHL ? hl_ : ll_; }

  Type small_type(Lang l, int depth) {
    int pick = rng_.below(depth > 0 ? 6 : 2);
    if (l == Lang::RefHL) {
      switch (pick) {
        case 0: return Type::boolean();
        case 1: return Type::unit();
        case 2: return ty(TyCon::Sum, {small_type(l, depth - 1), small_type(l, depth - 1)});
        case 3: return ty(TyCon::Prod, {small_type(l, depth - 1), small_type(l, depth - 1)});
        case 4: return ty(TyCon::Arrow, {small_type(l, depth - 1), small_type(l, depth - 1)});
        default: return ty(TyCon::Ref, {small_type(l, depth - 1)});
      }
    }
    switch (pick) {
      case 0: case 1: case 2: return Type::integer();
      case 3: return ty(TyCon::Array, {small_type(l, depth - 1)});
      case 4: return ty(TyCon::Arrow, {small_type(l, depth - 1), small_type(l, depth - 1)});
      default: return ty(TyCon::Ref, {small_type(l, depth - 1)});
    }
  }
  Type small_type(Lang l) { return small_type(l, cfg_.max_type_depth > 1 ? 1 : 0); }

  std::string fresh(Lang l) { return (l == Lang::RefHL ? "x" : "n") + std::to_string(counter_++); }

  ExprPtr bound(Lang l, const std::string& x, const Type& t, int size, const Type& goal) {
    env(l).push_back({x, t});
    ExprPtr body = gen(l, goal, size);
    env(l).pop_back();
    return body;
  }

  ExprPtr variable(Lang l, const Type& goal) {
    std::vector<std::string> hits;
    for (const auto& b : env(l))
      if (type_equal(b.type, goal)) hits.push_back(b.name);
    if (hits.empty()) return nullptr;
    return named(l, Op::Var, rng_.pick(hits));
  }

  ExprPtr gen(Lang l, const Type& goal, int size) {
    if (size > 1 && rng_.chance(cfg_.boundary_prob)) {
      const auto& partners = (l == Lang::RefHL ? into_hl() : into_ll()).of(goal);
      if (!partners.empty()) {
        Lang other = l == Lang::RefHL ? Lang::RefLL : Lang::RefHL;
        return boundary(l, goal, gen(other, rng_.pick(partners), size - 1));
      }
    }
    if (size <= 1 || rng_.chance(0.15)) {
      if (auto v = variable(l, goal); v && (size <= 1 || rng_.chance(0.7))) return v;
    }
    if (size > 2 && rng_.chance(cfg_.elim_weight)) {
      if (auto e = elim(l, goal, size)) return e;
    }
    return intro(l, goal, size);
  }

  ExprPtr intro(Lang l, const Type& goal, int size) {
    int rest = size - 1;
    switch (goal.con()) {
      case TyCon::Unit: return node(l, Op::Unit);
      case TyCon::Bool: return node(l, rng_.chance(0.5) ? Op::True : Op::False);
      case TyCon::Int: {
        auto e = node(l, Op::Int);
        e->num = static_cast<std::int64_t>(rng_.below(6)) - 2;
        return e;
      }
      case TyCon::Sum: {
        bool left = rng_.chance(0.5);
        return annotated(l, left ? Op::Inl : Op::Inr, goal, {gen(l, goal.arg(left ? 0 : 1), rest)});
      }
      case TyCon::Prod: {
        auto s = split(rng_, rest, 2);
        return node(l, Op::Pair, {gen(l, goal.arg(0), s[0]), gen(l, goal.arg(1), s[1])});
      }
      case TyCon::Array: {
        int n = rng_.below(4);
        if (n == 0) return annotated(l, Op::Array, goal.arg(0));
        auto s = split(rng_, rest, n);
        auto e = node(l, Op::Array);
        for (int i = 0; i < n; ++i) e->kids.push_back(gen(l, goal.arg(0), s[static_cast<std::size_t>(i)]));
        return e;
      }
      case TyCon::Arrow: {
        std::string x = fresh(l);
        return lam(l, x, goal.arg(0), bound(l, x, goal.arg(0), rest, goal.arg(1)));
      }
      case TyCon::Ref: return node(l, Op::Ref, {gen(l, goal.arg(0), rest)});
      default: break;
    }
    throw std::logic_error("ref generator: no introduction form for " + print_type(goal));
  }

  ExprPtr elim(Lang l, const Type& goal, int size) {
    int rest = size - 1;
    int choice = rng_.below(7);
    if (l == Lang::RefHL) {
      switch (choice) {
        case 0: {
          Type a = small_type(l);
          auto s = split(rng_, rest, 2);
          return node(l, Op::App, {gen(l, ty(TyCon::Arrow, {a, goal}), s[0]), gen(l, a, s[1])});
        }
        case 1: {
          auto s = split(rng_, rest, 3);
          return node(l, Op::If, {gen(l, Type::boolean(), s[0]), gen(l, goal, s[1]), gen(l, goal, s[2])});
        }
        case 2: {
          Type a = small_type(l), b = small_type(l);
          auto s = split(rng_, rest, 3);
          std::string x = fresh(l), y = fresh(l);
          auto e = node(l, Op::Match, {gen(l, ty(TyCon::Sum, {a, b}), s[0]), bound(l, x, a, s[1], goal),
                                       bound(l, y, b, s[2], goal)});
          e->name = x;
          e->name2 = y;
          return e;
        }
        case 3: {
          Type other = small_type(l);
          bool first = rng_.chance(0.5);
          Type p = first ? ty(TyCon::Prod, {goal, other}) : ty(TyCon::Prod, {other, goal});
          return node(l, first ? Op::Fst : Op::Snd, {gen(l, p, rest)});
        }
        case 4: return node(l, Op::Deref, {gen(l, ty(TyCon::Ref, {goal}), rest)});
        case 5: {
          if (!goal.is(TyCon::Unit)) return nullptr;
          Type a = small_type(l);
          auto s = split(rng_, rest, 2);
          return node(l, Op::Assign, {gen(l, ty(TyCon::Ref, {a}), s[0]), gen(l, a, s[1])});
        }
        default: return nullptr;
      }
    }
    switch (choice) {
      case 0: {
        Type a = small_type(l);
        auto s = split(rng_, rest, 2);
        return node(l, Op::App, {gen(l, ty(TyCon::Arrow, {a, goal}), s[0]), gen(l, a, s[1])});
      }
      case 1: {
        auto s = split(rng_, rest, 3);
        return node(l, Op::If0, {gen(l, Type::integer(), s[0]), gen(l, goal, s[1]), gen(l, goal, s[2])});
      }
      case 2: {
        auto s = split(rng_, rest, 2);
        return node(l, Op::Index, {gen(l, ty(TyCon::Array, {goal}), s[0]), gen(l, Type::integer(), s[1])});
      }
      case 3: {
        if (!goal.is(TyCon::Int)) return nullptr;
        auto s = split(rng_, rest, 2);
        return node(l, Op::Add, {gen(l, goal, s[0]), gen(l, goal, s[1])});
      }
      case 4: return node(l, Op::Deref, {gen(l, ty(TyCon::Ref, {goal}), rest)});
      case 5: {
        if (!goal.is(TyCon::Int)) return nullptr;
        Type a = small_type(l);
        auto s = split(rng_, rest, 2);
        return node(l, Op::Assign, {gen(l, ty(TyCon::Ref, {a}), s[0]), gen(l, a, s[1])});
      }
      default: return nullptr;
    }
  }

  Rng& rng_;
  const GenConfig& cfg_;
  std::vector<Binding> hl_, ll_;
  int counter_ = 0;
};

}  // namespace

ExprPtr gen_ref(Rng& rng, const GenConfig& cfg) { return RefGen(rng, cfg).root(); }

}  // namespace polybridge::testkit::detail
