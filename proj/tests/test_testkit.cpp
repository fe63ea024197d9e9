#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <set>
#include <sstream>

#include "polybridge/affine.hpp"
#include "polybridge/gclinear.hpp"
#include "polybridge/refpair.hpp"
#include "polybridge/testkit.hpp"

using namespace polybridge;
using namespace polybridge::testkit;

static std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(POLYBRIDGE_SOURCE_DIR) + "/" + rel);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static src::ExprPtr checked(Pair p, Lang l, const std::string& text) {
  auto e = src::parse(l, text);
  typecheck(p, *e);
  return e;
}

static std::set<Lang> langs_of(const src::Expr& e) {
  std::set<Lang> out;
  src::walk(e, [&](const src::Expr& n) { out.insert(n.lang); });
  return out;
}

TEST_CASE("1000 generated affine terms pass an independent re-check") {
  GenConfig cfg;
  cfg.pair = Pair::Affine;
  cfg.seed = 7;
  const auto& reg = affine::default_rules();
  for (int i = 0; i < 1000; ++i) {
    auto e = generate(cfg, static_cast<std::uint64_t>(i));
    auto fresh = src::parse(e->lang, src::print(*e));
    CHECK_NOTHROW(affine::typecheck(reg, *fresh));
  }
}

TEST_CASE("generated terms of every pair are closed, well typed and of ground type") {
  for (Pair p : {Pair::Ref, Pair::Affine, Pair::GcLinear}) {
    GenConfig cfg;
    cfg.pair = p;
    for (int i = 0; i < 300; ++i) {
      auto e = generate(cfg, static_cast<std::uint64_t>(i));
      Type t = typecheck(p, *e);
      CHECK((t.is(TyCon::Bool) || t.is(TyCon::Int)));
    }
  }
}

TEST_CASE("seed replay reproduces byte-identical terms") {
  for (Pair p : {Pair::Ref, Pair::Affine, Pair::GcLinear}) {
    GenConfig cfg;
    cfg.pair = p;
    cfg.seed = 12345;
    std::string first, second;
    for (int i = 0; i < 100; ++i) first += src::print(*generate(cfg, static_cast<std::uint64_t>(i))) + "\n";
    for (int i = 0; i < 100; ++i) second += src::print(*generate(cfg, static_cast<std::uint64_t>(i))) + "\n";
    CHECK(first == second);
    cfg.seed = 54321;
    std::string other;
    for (int i = 0; i < 100; ++i) other += src::print(*generate(cfg, static_cast<std::uint64_t>(i))) + "\n";
    CHECK(first != other);
  }
}

TEST_CASE("boundary probability zero yields single-language terms") {
  for (Pair p : {Pair::Ref, Pair::Affine, Pair::GcLinear}) {
    GenConfig cfg;
    cfg.pair = p;
    cfg.boundary_prob = 0;
    for (int i = 0; i < 500; ++i) {
      auto e = generate(cfg, static_cast<std::uint64_t>(i));
      CHECK(langs_of(*e).size() == 1);
      bool crossing = false;
      src::walk(*e, [&](const src::Expr& n) {
        if (n.op == src::Op::Boundary || n.op == src::Op::Foreign) crossing = true;
      });
      CHECK_FALSE(crossing);
    }
  }
}

TEST_CASE("every constructor of each pair appears within 10^4 terms") {
  for (Pair p : {Pair::Ref, Pair::Affine, Pair::GcLinear}) {
    GenConfig cfg;
    cfg.pair = p;
    Coverage cov;
    for (int i = 0; i < 10000; ++i) {
      auto e = generate(cfg, static_cast<std::uint64_t>(i));
      typecheck(p, *e);
      count_ops(*e, cov);
    }
    for (const auto& k : constructors(p)) {
      INFO(pair_name(p) << " " << k);
      CHECK(cov[k] > 0);
    }
  }
}

TEST_CASE("outcome taxonomy per pair") {
  CHECK(permitted_outcomes(Pair::Ref) == std::vector<std::string>{"value", "fail Conv", "fail Idx", "fuel exhausted"});
  CHECK(permitted_outcomes(Pair::Affine) == std::vector<std::string>{"value", "fail Conv", "fuel exhausted"});
  CHECK(permitted_outcomes(Pair::GcLinear) == std::vector<std::string>{"value", "fuel exhausted"});
}

TEST_CASE("P1 dagger passes type safety: fail Conv is permitted for the affine pair") {
  auto e = checked(Pair::Affine, Lang::Affi, slurp("samples/affine/p1_dagger.affi"));
  auto v = check_type_safety(Pair::Affine, *e, 100000);
  CHECK(v.outcome == "fail Conv");
  CHECK(v.pass);
  CHECK(v.witness.empty());
}

TEST_CASE("any fail is a type-safety violation for the gclinear pair") {
  auto e = checked(Pair::GcLinear, Lang::L3, "true");
  Outcome conv;
  conv.kind = Outcome::Kind::Fail;
  conv.code = ErrorCode::Conv;
  auto v = check_type_safety(Pair::GcLinear, *e, [&](const src::Expr&) { return conv; });
  CHECK_FALSE(v.pass);
  CHECK(v.witness_outcome == "fail Conv");
}

// The sum~[int] rule with its RefLL-to-RefHL glue replaced by one that
// leaves a closure where a tagged array belongs.
static refpair::Registry broken_sum_glue() {
  auto reg = refpair::default_rules();
  for (const auto& r : reg.rules()) {
    if (r->name != "sum-array") continue;
    auto bad = *r;
    bad.glue_ba = stack::concat({stack::drop_(), {stack::push(stack::thunk({stack::push(stack::Value(std::int64_t{0}))}))}});
    reg.add(bad);
    break;
  }
  return reg;
}

TEST_CASE("a ref-pair program ending in Fail Type gives FAIL with a shrunk witness that still fails") {
  static const auto reg = broken_sum_glue();
  auto runner = [](const src::Expr& t) {
    auto copy = src::clone(t);
    refpair::typecheck(reg, *copy);
    FreshSupply fs;
    return stack::run(refpair::compile(reg, *copy, fs), 100000).outcome;
  };
  auto e = checked(Pair::Ref, Lang::RefHL,
                   "if (match ll[| [1, 0] |] : bool + bool x{x} y{if y then false else true}) "
                   "then (true, false) else (false, true)");
  CHECK(runner(*e).describe() == "fail Type");
  auto v = check_type_safety(Pair::Ref, *e, runner);
  CHECK_FALSE(v.pass);
  CHECK(v.outcome == "fail Type");
  REQUIRE_FALSE(v.witness.empty());
  CHECK(v.witness_outcome == "fail Type");
  auto w = src::parse(Lang::RefHL, v.witness);
  CHECK(well_typed(Pair::Ref, *w));
  CHECK(runner(*checked(Pair::Ref, Lang::RefHL, v.witness)).describe() == "fail Type");
  CHECK(src::size(*w) < src::size(*e));
  // the verdict carries its own record
  CHECK(v.to_jsonl().find("\"verdict\":\"FAIL\"") != std::string::npos);
}

TEST_CASE("shrinking preserves well-typedness and the failing predicate") {
  GenConfig cfg;
  cfg.pair = Pair::GcLinear;
  int shrunk = 0;
  for (int i = 0; i < 40; ++i) {
    auto e = generate(cfg, static_cast<std::uint64_t>(i));
    typecheck(Pair::GcLinear, *e);
    // a stand-in failure: the term still contains a boundary
    auto has_boundary = [](const src::Expr& t) {
      bool found = false;
      src::walk(t, [&](const src::Expr& n) { found = found || n.op == src::Op::Boundary; });
      return found;
    };
    if (!has_boundary(*e)) continue;
    auto s = shrink(Pair::GcLinear, *e, has_boundary);
    CHECK(well_typed(Pair::GcLinear, *s));
    CHECK(has_boundary(*s));
    CHECK(src::size(*s) <= src::size(*e));
    if (src::size(*s) < src::size(*e)) ++shrunk;
  }
  CHECK(shrunk > 0);
}

TEST_CASE("gc differential: a pure term agrees under every policy") {
  auto e = checked(Pair::GcLinear, Lang::MiniML, "snd ((\\x:int. (x, 42)) 41)");
  auto v = check_gc_differential(Pair::GcLinear, *e, 100000);
  CHECK(v.pass);
  CHECK(v.outcome.find("never: value 42") != std::string::npos);
}

TEST_CASE("gc differential: garbage then an int leaves a smaller heap under every-alloc") {
  auto e = checked(Pair::GcLinear, Lang::MiniML,
                   "(\\u:unit. (\\r:ref int. 3) (ref 2)) ((\\r:ref int. ()) (ref 5))");
  auto v = check_gc_differential(Pair::GcLinear, *e, 100000);
  CHECK(v.pass);
  CHECK(v.outcome.find("every-alloc: value 3") != std::string::npos);
  auto code = compile(Pair::GcLinear, *e);
  auto never = execute(code, 100000, lcvm::GcPolicy::Never);
  auto every = execute(code, 100000, lcvm::GcPolicy::EveryAlloc);
  CHECK(never.value == every.value);
  CHECK(every.heap_size < never.heap_size);
}

TEST_CASE("gc differential: a diverging term runs out of fuel under every policy") {
  auto e = checked(Pair::GcLinear, Lang::MiniML,
                   "(\\r:ref (unit -> unit). (\\u:unit. (!r) ()) (r := (\\x:unit. (!r) x))) (ref (\\x:unit. x))");
  auto v = check_gc_differential(Pair::GcLinear, *e, 5000);
  CHECK(v.pass);
  CHECK(v.outcome == "never: fuel exhausted | at-callgc: fuel exhausted | every-alloc: fuel exhausted");
}

TEST_CASE("gc differential is not applicable to the ref pair") {
  auto e = checked(Pair::Ref, Lang::RefHL, "true");
  CHECK(check_gc_differential(Pair::Ref, *e, 1000).pass);
}

TEST_CASE("phantom: samples and generated affine terms never get stuck") {
  for (const char* f : {"samples/affine/p1.affi", "samples/affine/p1_dagger.affi", "samples/affine/p2.affi",
                        "samples/affine/p2_dagger.affi"}) {
    auto e = checked(Pair::Affine, Lang::Affi, slurp(f));
    auto v = check_phantom(*e, 100000);
    INFO(f << " " << v.outcome);
    CHECK(v.pass);
  }
  GenConfig cfg;
  cfg.pair = Pair::Affine;
  for (int i = 0; i < 300; ++i) {
    auto e = generate(cfg, static_cast<std::uint64_t>(i));
    typecheck(Pair::Affine, *e);
    CHECK(check_phantom(*e, 100000).pass);
  }
}

TEST_CASE("phantom negative control: a static variable used twice past the checker gets stuck") {
  auto bad = src::parse(Lang::Affi, "(\\a@stat:bool. (a@stat, a@stat)) true");
  bad->kids[0]->ty =
      Type::make(TyCon::LolliStatic, {Type::boolean(), Type::make(TyCon::Tensor, {Type::boolean(), Type::boolean()})});
  FreshSupply fs;
  auto code = affine::compile(affine::default_rules(), *bad, fs);
  auto v = check_phantom_compiled(code, "double static use", 1000);
  CHECK_FALSE(v.pass);
  CHECK(v.outcome.rfind("stuck", 0) == 0);
}

TEST_CASE("phantom: programs with only dynamic binders never mint a flag") {
  auto e = checked(Pair::Affine, Lang::Affi,
                   "let (a@dyn, b@dyn) = ((\\x@dyn:bool. x) true, false) in (\\y@dyn:bool. (y, a)) b");
  auto code = compile(Pair::Affine, *e);
  bool minted = false;
  auto r = lcvm::run(lcvm::Config::initial(code.lcvm, lcvm::GcPolicy::AtCallGc, true), 100000,
                     [&](std::uint64_t, const lcvm::Config& before, const lcvm::StepInfo&) {
                       minted = minted || !before.phantom.empty();
                     });
  CHECK(r.outcome.kind == Outcome::Kind::Value);
  CHECK_FALSE(minted);
  CHECK(r.final.phantom.empty());
}

TEST_CASE("fuzz writes one JSON verdict per line and reports coverage") {
  GenConfig cfg;
  cfg.pair = Pair::Affine;
  cfg.seed = 3;
  std::ostringstream out;
  auto s = fuzz(cfg, 50, 100000, &out);
  CHECK(s.terms == 50);
  CHECK(s.verdicts == 100);  // type safety and phantom
  CHECK(s.failures == 0);
  int lines = 0;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line); ++lines) CHECK(line.front() == '{');
  CHECK(lines == s.verdicts);
  std::ostringstream again;
  fuzz(cfg, 50, 100000, &again);
  CHECK(out.str() == again.str());
}
