#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <optional>
#include <random>
#include <sstream>

#include "polybridge/affine.hpp"

using namespace polybridge;
using namespace polybridge::lcvm;
using src::Mode;
using src::Op;

static const affine::Registry& rules() {
  static const affine::Registry reg = affine::default_rules();
  return reg;
}

static std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(POLYBRIDGE_SOURCE_DIR) + "/" + rel);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static src::ExprPtr checked(Lang l, const std::string& text) {
  auto e = src::parse(l, text);
  affine::typecheck(rules(), *e);
  return e;
}

static Expr compiled(Lang l, const std::string& text) {
  auto e = checked(l, text);
  FreshSupply fs;
  return affine::compile(rules(), *e, fs);
}

static Outcome run_text(Lang l, const std::string& text, bool phantom = false) {
  return run(Config::initial(compiled(l, text), GcPolicy::AtCallGc, phantom), 100000).outcome;
}

static bool rejects(Lang l, const std::string& text) {
  try {
    checked(l, text);
    return false;
  } catch (const StaticError&) {
    return true;
  }
}

// Expected compilations of the example programs, rebuilt from
// the LCVM constructors (thunk is the guard macro).
static Expr bool_pair_of(const std::string& p) {
  return pair(if_(fst(var(p)), num(0), num(1)), if_(snd(var(p)), num(0), num(1)));
}

static Expr expected_p1() {
  Expr conv = thunk(let("x2", app(var("x1t"), unit()), bool_pair_of("x2")));
  Expr f = lam("x", fst(app(var("x"), unit())));
  return app(lam("x1t", app(f, conv)), thunk(pair(num(0), num(1))));
}

static Expr expected_p1_dagger() {
  Expr conv = thunk(let("x2", app(var("x1t"), unit()), bool_pair_of("x2")));
  Expr f = lam("x", pair(fst(app(var("x"), unit())), snd(app(var("x"), unit()))));
  Expr body = let("x3", app(f, conv), pair(fst(var("x3")), snd(var("x3"))));
  return app(lam("x1t", body), thunk(pair(num(0), num(1))));
}

static Expr expected_p2(bool dagger) {
  Expr a_int = if_(app(var("a"), unit()), num(0), num(1));
  Expr inner = app(lam("y", pair(a_int, dagger ? a_int : var("y"))), num(0));
  Expr f = lam("a", let("x2", inner, pair(fst(var("x2")), snd(var("x2")))));
  return app(f, let("x1", num(0), thunk(var("x1"))));
}

TEST_CASE("example programs run to the documented outcomes") {
  auto p1 = run_text(Lang::Affi, slurp("samples/affine/p1.affi"));
  CHECK(p1.describe() == "value 0");
  auto p1d = run_text(Lang::Affi, slurp("samples/affine/p1_dagger.affi"));
  CHECK(p1d.describe() == "fail Conv");
  auto p2 = run_text(Lang::Affi, slurp("samples/affine/p2.affi"));
  CHECK(p2.describe() == "value (0, 0)");
  auto p2d = run_text(Lang::Affi, slurp("samples/affine/p2_dagger.affi"));
  CHECK(p2d.describe() == "fail Conv");
}

TEST_CASE("compilations match the expected programs up to renaming") {
  Expr p1 = affine::simplify(compiled(Lang::Affi, slurp("samples/affine/p1.affi")));
  CHECK(alpha_equal(p1, expected_p1()));
  Expr p1d = affine::simplify(compiled(Lang::Affi, slurp("samples/affine/p1_dagger.affi")));
  CHECK(alpha_equal(p1d, expected_p1_dagger()));
  // these two are compared without simplification
  CHECK(alpha_equal(compiled(Lang::Affi, slurp("samples/affine/p2.affi")), expected_p2(false)));
  CHECK(alpha_equal(compiled(Lang::Affi, slurp("samples/affine/p2_dagger.affi")), expected_p2(true)));
  // simplification does not change the outcome
  CHECK(run(Config::initial(p1), 10000).outcome.describe() == "value 0");
  CHECK(run(Config::initial(p1d), 10000).outcome.describe() == "fail Conv");
}

TEST_CASE("affi statics") {
  CHECK(print_type(checked(Lang::Affi, "\\a@dyn:bool. a@dyn")->ty) == "bool -o bool");
  CHECK(print_type(checked(Lang::Affi, "\\a@dyn:bool. a")->ty) == "bool -o bool");
  CHECK(rejects(Lang::Affi, "\\a@dyn:bool. (a@dyn, a@dyn)"));
  CHECK(rejects(Lang::Affi, "\\a@stat:bool. (a, a)"));
  CHECK(rejects(Lang::Affi, "\\a@dyn:bool. a@stat"));
  // unused affine variables are fine
  CHECK_FALSE(rejects(Lang::Affi, "\\a@dyn:bool. true"));
  // a dynamic lambda may not capture static variables
  CHECK(rejects(Lang::Affi, "\\a@stat:bool. \\b@dyn:bool. a@stat"));
  CHECK_FALSE(rejects(Lang::Affi, "\\a@stat:bool. \\b@stat:bool. a@stat"));
  CHECK_FALSE(rejects(Lang::Affi, "\\a@dyn:bool. \\b@stat:bool. a@dyn"));
  CHECK_FALSE(rejects(Lang::Affi, "\\a@stat:bool. \\b@dyn:bool. b"));
  // ! needs an affine-free body
  CHECK(rejects(Lang::Affi, "\\a@dyn:bool. !a"));
  CHECK(print_type(checked(Lang::Affi, "let !x = !true in (x, x)")->ty) == "bool * bool");
  // both components of a with-pair may use the same variable
  CHECK(print_type(checked(Lang::Affi, "\\a@dyn:bool. <a, (a, true)>")->ty) ==
        "bool -o bool & (bool * bool)");
  CHECK(rejects(Lang::Affi, "\\p@dyn:bool & bool. (p.1, p.2)"));
  CHECK_FALSE(rejects(Lang::Affi, "\\p@dyn:bool & bool. p.2"));
  CHECK(rejects(Lang::Affi, "let (a@dyn, b@dyn) = (true, false) in (a, a)"));
  CHECK_FALSE(rejects(Lang::Affi, "let (a@dyn, b@stat) = (true, false) in (b, a)"));
  CHECK(rejects(Lang::Affi, "(\\a@dyn:bool. a) ()"));
  CHECK(rejects(Lang::Affi, "true true"));
}

TEST_CASE("boundary statics") {
  // static variables never cross into miniml, dynamic ones may repeat there
  CHECK(rejects(Lang::Affi, "\\a@stat:bool. ml[| affi[| a@stat |] : int |] : bool"));
  CHECK_FALSE(rejects(Lang::Affi, "\\a@dyn:bool. ml[| (affi[| a |] : int, affi[| a |] : int) |] : bool * bool"));
  // but the affi side still counts the use
  CHECK(rejects(Lang::Affi, "\\a@dyn:bool. (a, ml[| affi[| a |] : int |] : bool)"));
  // no rule for & or for static arrows
  CHECK(rejects(Lang::Affi, "ml[| () |] : unit & unit"));
  CHECK(rejects(Lang::MiniML, "affi[| \\a@stat:bool. a |] : (unit -> int) -> int"));
  CHECK_FALSE(rejects(Lang::MiniML, "affi[| \\a@dyn:bool. a |] : (unit -> int) -> int"));
  CHECK(rejects(Lang::MiniML, "affi[| true |] : unit"));
}

TEST_CASE("miniml statics and compilation") {
  CHECK(print_type(checked(Lang::MiniML, "/\\a. \\x:a. \\y:a. y")->ty) == "forall a. a -> a -> a");
  CHECK(rejects(Lang::MiniML, "\\x:b. x"));
  CHECK(rejects(Lang::MiniML, "\\x:foreign<bool>. x"));
  CHECK(run_text(Lang::MiniML, "(/\\a. \\x:a. x)[int] 5").describe() == "value 5");
  CHECK(run_text(Lang::MiniML, "(\\r:ref int. (\\u:unit. !r) (r := 7)) (ref 1)").describe() == "value 7");
  CHECK(run_text(Lang::MiniML, "match inr[int + unit] () x{x} y{3}").describe() == "value 3");
  CHECK(free_vars(compiled(Lang::MiniML, "/\\a. \\x:a. \\y:a. (x, y)")).empty());
}

TEST_CASE("static application allocates no guard") {
  Expr e = compiled(Lang::Affi, "(\\a@stat:int. a) 5");
  bool has_ref = false;
  std::function<void(const Expr&)> scan = [&](const Expr& n) {
    if (n->op == LOp::Ref) has_ref = true;
    for (const auto& k : n->kids) scan(k);
  };
  scan(e);
  CHECK_FALSE(has_ref);
  CHECK(run(Config::initial(e, GcPolicy::AtCallGc, true), 100).outcome.describe() == "value 5");
  CHECK(run_text(Lang::Affi, "let (a@stat, b@stat) = (1, 2) in (b, a)", true).describe() == "value (2, 1)");
}

TEST_CASE("phantom negative control: a static variable used twice past the checker") {
  // build (\a@stat:bool. (a, a)) true without checking it
  auto bad = src::parse(Lang::Affi, "(\\a@stat:bool. (a@stat, a@stat)) true");
  bad->kids[0]->ty = Type::make(TyCon::LolliStatic, {Type::boolean(), Type::make(TyCon::Tensor, {Type::boolean(), Type::boolean()})});
  FreshSupply fs;
  Expr code = affine::compile(rules(), *bad, fs);
  CHECK(run(Config::initial(code, GcPolicy::AtCallGc, true), 1000).outcome.kind == Outcome::Kind::Stuck);
  CHECK(run(Config::initial(code), 1000).outcome.describe() == "value (0, 0)");
}

TEST_CASE("bool and int glue tables") {
  const auto& reg = rules();
  FreshSupply fs;
  for (std::int64_t n = -2; n <= 5; ++n) {
    Expr in = num(n);
    // affi bool -> miniml int normalizes
    Expr to_int = affine::boundary_glue(reg, Lang::MiniML, Type::integer(), Type::boolean(), in, fs);
    auto once = run(Config::initial(to_int), 100);
    CHECK(once.outcome.value == (n == 0 ? "0" : "1"));
    Expr twice = affine::boundary_glue(reg, Lang::MiniML, Type::integer(), Type::boolean(), to_int, fs);
    CHECK(run(Config::initial(twice), 100).outcome.value == once.outcome.value);
    // miniml int -> affi bool is the identity
    Expr to_bool = affine::boundary_glue(reg, Lang::Affi, Type::boolean(), Type::integer(), in, fs);
    CHECK(expr_equal(to_bool, in));
  }
}

TEST_CASE("guard flags go from unused to used at most once") {
  Expr e = compiled(Lang::Affi, slurp("samples/affine/p2_dagger.affi"));
  Config c = Config::initial(e);
  std::map<std::uint64_t, int> writes;
  for (int k = 0; k < 10000; ++k) {
    Heap before = c.heap;
    if (step(c).status == StepStatus::Terminal) break;
    for (auto& [l, cell] : c.heap) {
      auto it = before.find(l);
      if (it != before.end() && !expr_equal(it->second.value, cell.value)) {
        CHECK(print_expr(it->second.value) == "1");
        CHECK(print_expr(cell.value) == "0");
        ++writes[l];
      }
    }
  }
  for (auto& [l, n] : writes) CHECK(n == 1);
}

// ---- declarative cross-check on the pure affi fragment ----

struct Bind {
  std::string name;
  Type type;
  Mode mode;
};

// Splits the affine context every possible way at binary rules; weakening
// is allowed anywhere.
static std::optional<Type> decl(const std::vector<Bind>& omega, const std::map<std::string, Type>& gamma,
                                const src::Expr& e);

static std::optional<std::pair<Type, Type>> split2(const std::vector<Bind>& omega,
                                                   const std::map<std::string, Type>& gamma, const src::Expr& l,
                                                   const src::Expr& r,
                                                   const std::function<std::optional<Type>(const std::vector<Bind>&, const Type&)>& right) {
  std::size_t n = omega.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 2;
  for (std::size_t mask = 0; mask < total; ++mask) {
    std::vector<Bind> a, b;
    for (std::size_t i = 0; i < n; ++i) (mask >> i & 1 ? a : b).push_back(omega[i]);
    auto tl = decl(a, gamma, l);
    if (!tl) continue;
    auto tr = right(b, *tl);
    if (tr) return std::make_pair(*tl, *tr);
  }
  (void)r;
  return std::nullopt;
}

static std::optional<Type> decl(const std::vector<Bind>& omega, const std::map<std::string, Type>& gamma,
                                const src::Expr& e) {
  switch (e.op) {
    case Op::Unit: return Type::unit();
    case Op::True: case Op::False: return Type::boolean();
    case Op::Var: {
      for (const auto& b : omega)
        if (b.name == e.name) return b.type;
      auto it = gamma.find(e.name);
      if (it != gamma.end()) return it->second;
      return std::nullopt;
    }
    case Op::Lam: {
      std::vector<Bind> inner;
      for (const auto& b : omega)
        if (e.mode == Mode::Stat || b.mode == Mode::Dyn) inner.push_back(b);
      inner.push_back({e.name, e.ann, e.mode});
      auto body = decl(inner, gamma, *e.kids[0]);
      if (!body) return std::nullopt;
      return Type::make(e.mode == Mode::Stat ? TyCon::LolliStatic : TyCon::Lolli, {e.ann, *body});
    }
    case Op::App: {
      auto r = split2(omega, gamma, *e.kids[0], *e.kids[1], [&](const std::vector<Bind>& b, const Type& f) -> std::optional<Type> {
        if (!f.is(TyCon::Lolli) && !f.is(TyCon::LolliStatic)) return std::nullopt;
        auto a = decl(b, gamma, *e.kids[1]);
        if (!a || !type_equal(*a, f.arg(0))) return std::nullopt;
        return f.arg(1);
      });
      if (!r) return std::nullopt;
      return r->second;
    }
    case Op::Pair: {
      auto r = split2(omega, gamma, *e.kids[0], *e.kids[1],
                      [&](const std::vector<Bind>& b, const Type&) { return decl(b, gamma, *e.kids[1]); });
      if (!r) return std::nullopt;
      return Type::make(TyCon::Tensor, {r->first, r->second});
    }
    case Op::WithPair: {
      auto a = decl(omega, gamma, *e.kids[0]);
      auto b = decl(omega, gamma, *e.kids[1]);
      if (!a || !b) return std::nullopt;
      return Type::make(TyCon::With, {*a, *b});
    }
    case Op::Proj1: case Op::Proj2: {
      auto t = decl(omega, gamma, *e.kids[0]);
      if (!t || !t->is(TyCon::With)) return std::nullopt;
      return t->arg(e.op == Op::Proj1 ? 0 : 1);
    }
    case Op::Bang: {
      auto t = decl({}, gamma, *e.kids[0]);
      if (!t) return std::nullopt;
      return Type::make(TyCon::Bang, {*t});
    }
    case Op::LetBang: {
      auto r = split2(omega, gamma, *e.kids[0], *e.kids[1], [&](const std::vector<Bind>& b, const Type& t) -> std::optional<Type> {
        if (!t.is(TyCon::Bang)) return std::nullopt;
        auto g = gamma;
        g[e.name] = t.arg(0);
        return decl(b, g, *e.kids[1]);
      });
      if (!r) return std::nullopt;
      return r->second;
    }
    case Op::LetPair: {
      if (e.name == e.name2) return std::nullopt;
      auto r = split2(omega, gamma, *e.kids[0], *e.kids[1], [&](const std::vector<Bind>& b, const Type& t) -> std::optional<Type> {
        if (!t.is(TyCon::Tensor)) return std::nullopt;
        auto inner = b;
        inner.push_back({e.name, t.arg(0), e.mode});
        inner.push_back({e.name2, t.arg(1), e.mode2});
        return decl(inner, gamma, *e.kids[1]);
      });
      if (!r) return std::nullopt;
      return r->second;
    }
    default:
      return std::nullopt;
  }
}

static src::ExprPtr random_affi(std::mt19937_64& rng, int& budget, int& fresh, std::vector<std::string>& names) {
  auto mk = [](Op op, std::vector<src::ExprPtr> k = {}) { return src::make(Lang::Affi, op, std::move(k)); };
  static const std::vector<Type> tys = {
      Type::boolean(), Type::make(TyCon::Tensor, {Type::boolean(), Type::boolean()}),
      Type::make(TyCon::Lolli, {Type::boolean(), Type::boolean()}),
      Type::make(TyCon::LolliStatic, {Type::boolean(), Type::boolean()}), Type::make(TyCon::Bang, {Type::boolean()}),
      Type::make(TyCon::With, {Type::boolean(), Type::boolean()})};
  --budget;
  int choice = budget <= 0 ? static_cast<int>(rng() % 2) : static_cast<int>(rng() % 11);
  auto sub = [&]() { return random_affi(rng, budget, fresh, names); };
  auto mode = [&]() { return rng() % 2 ? Mode::Stat : Mode::Dyn; };
  switch (choice) {
    case 0: {
      if (names.empty() || rng() % 4 == 0) return mk(Op::True);
      auto v = mk(Op::Var);
      v->name = names[rng() % names.size()];
      return v;
    }
    case 1: {
      if (names.empty()) return mk(Op::Unit);
      auto v = mk(Op::Var);
      v->name = names[rng() % names.size()];
      return v;
    }
    case 2: {
      auto l = mk(Op::Lam);
      l->name = "v" + std::to_string(fresh++);
      l->mode = mode();
      l->ann = tys[rng() % tys.size()];
      names.push_back(l->name);
      l->kids = {sub()};
      return l;
    }
    case 3: { auto f = sub(); return mk(Op::App, {f, sub()}); }
    case 4: { auto a = sub(); return mk(Op::Pair, {a, sub()}); }
    case 5: { auto a = sub(); return mk(Op::WithPair, {a, sub()}); }
    case 6: return mk(rng() % 2 ? Op::Proj1 : Op::Proj2, {sub()});
    case 7: return mk(Op::Bang, {sub()});
    case 8: {
      auto b = sub();
      auto l = mk(Op::LetBang, {b});
      l->name = "u" + std::to_string(fresh++);
      names.push_back(l->name);
      l->kids.push_back(sub());
      return l;
    }
    case 9: {
      auto b = sub();
      auto l = mk(Op::LetPair, {b});
      l->name = "v" + std::to_string(fresh++);
      l->name2 = "v" + std::to_string(fresh++);
      l->mode = mode();
      l->mode2 = mode();
      names.push_back(l->name);
      names.push_back(l->name2);
      l->kids.push_back(sub());
      return l;
    }
    default: return mk(Op::Unit);
  }
}

TEST_CASE("consumed-set threading agrees with exhaustive context splitting") {
  std::mt19937_64 rng(5);
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 20000; ++i) {
    int budget = 1 + static_cast<int>(rng() % 8), fresh = 0;
    std::vector<std::string> names;
    auto e = random_affi(rng, budget, fresh, names);
    // the declarative side needs to know which names are affine; the
    // algorithmic side resolves them itself, so give it a copy
    auto copy = src::clone(*e);
    auto want = decl({}, {}, *e);
    std::optional<Type> got;
    try {
      got = affine::typecheck(rules(), *copy);
    } catch (const StaticError&) {
    }
    INFO(src::print(*e));
    CHECK(want.has_value() == got.has_value());
    if (want && got) CHECK(type_equal(*want, *got));
    (want ? accepted : rejected)++;
  }
  CHECK(accepted > 1000);
  CHECK(rejected > 1000);
}
