#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "polybridge/refpair.hpp"
#include "polybridge/registry.hpp"

using namespace polybridge;
using namespace polybridge::interop;
using SRule = Rule<StackTarget>;

static Type tb() { return Type::boolean(); }
static Type ti() { return Type::integer(); }
static Type mk(TyCon c, std::vector<Type> a) { return Type::make(c, std::move(a)); }

TEST_CASE("an empty registry derives nothing") {
  Registry<StackTarget> reg(Lang::RefHL, Lang::RefLL);
  CHECK_FALSE(derive(reg, tb(), ti()));
}

TEST_CASE("register then derive") {
  Registry<StackTarget> reg(Lang::RefHL, Lang::RefLL);
  reg.add(SRule{"bool-int", tb(), ti(), {}, {}, {}, "", nullptr});
  auto r = derive(reg, tb(), ti());
  REQUIRE(r);
  CHECK(r.ok->glue_ab.empty());
  CHECK(r.ok->glue_ba.empty());
  CHECK_FALSE(derive(reg, tb(), mk(TyCon::Ref, {ti()})));
}

TEST_CASE("a duplicate head replaces the earlier rule") {
  Registry<StackTarget> reg(Lang::RefHL, Lang::RefLL);
  reg.add(SRule{"first", tb(), ti(), {}, {stack::push(stack::Value(std::int64_t{1}))}, {}, "", nullptr});
  reg.add(SRule{"second", tb(), ti(), {}, {stack::push(stack::Value(std::int64_t{2}))}, {}, "", nullptr});
  CHECK(reg.rules().size() == 1);
  auto r = derive(reg, tb(), ti());
  REQUIRE(r);
  CHECK(r.ok->rule->name == "second");
  CHECK(stack::print_program_inline(r.ok->glue_ab) == "push 2");
}

TEST_CASE("ref pair derivations") {
  auto reg = refpair::default_rules();
  auto refs = derive(reg, mk(TyCon::Ref, {tb()}), mk(TyCon::Ref, {ti()}));
  REQUIRE(refs);
  CHECK(refs.ok->glue_ab.empty());
  CHECK(refs.ok->glue_ba.empty());

  auto sum = derive(reg, mk(TyCon::Sum, {tb(), tb()}), mk(TyCon::Array, {ti()}));
  REQUIRE(sum);
  CHECK(sum.ok->children.size() == 2);
  std::string ba = stack::print_program_inline(sum.ok->glue_ba);
  CHECK(ba.find("less?; if0 { fail Conv } { }") != std::string::npos);
  CHECK_FALSE(StackTarget::has_holes(sum.ok->glue_ab));
  CHECK_FALSE(StackTarget::has_holes(sum.ok->glue_ba));

  auto bad = derive(reg, tb(), mk(TyCon::Ref, {ti()}));
  CHECK_FALSE(bad);

  // a failing premise names the offending sub-pair
  auto nested = derive(reg, mk(TyCon::Sum, {tb(), mk(TyCon::Ref, {tb()})}), mk(TyCon::Array, {ti()}));
  REQUIRE_FALSE(nested);
  REQUIRE_FALSE(nested.err.trail.empty());
  CHECK(nested.err.trail.back().find("ref bool") != std::string::npos);
}

TEST_CASE("derivation is deterministic and emitted glue is fresh per use") {
  auto reg = refpair::default_rules();
  Type a = mk(TyCon::Prod, {tb(), mk(TyCon::Sum, {tb(), tb()})});
  auto d1 = derive(reg, a, mk(TyCon::Array, {ti()}));
  CHECK_FALSE(d1);  // bool+bool is not int
  auto r1 = derive(reg, mk(TyCon::Prod, {tb(), tb()}), mk(TyCon::Array, {ti()}));
  auto r2 = derive(reg, mk(TyCon::Prod, {tb(), tb()}), mk(TyCon::Array, {ti()}));
  REQUIRE(r1);
  REQUIRE(r2);
  CHECK(programs_equal(r1.ok->glue_ab, r2.ok->glue_ab));
  CHECK(programs_equal(r1.ok->glue_ba, r2.ok->glue_ba));

  FreshSupply fs;
  auto g1 = r1.ok->emit(Dir::AtoB, fs);
  auto g2 = r1.ok->emit(Dir::AtoB, fs);
  CHECK_FALSE(programs_equal(g1, g2));  // binders renamed apart
}

TEST_CASE("check_boundary picks the host-directed direction") {
  auto reg = refpair::default_rules();
  Dir d;
  auto r = check_boundary(reg, Lang::RefHL, tb(), ti(), d);
  REQUIRE(r);
  CHECK(d == Dir::BtoA);
  auto r2 = check_boundary(reg, Lang::RefLL, ti(), tb(), d);
  REQUIRE(r2);
  CHECK(d == Dir::AtoB);
}

TEST_CASE("rule listing") {
  auto lines = describe_rules(refpair::default_rules(), false);
  CHECK(lines.size() == 4);
  bool saw_bool = false;
  for (auto& l : lines)
    if (l.find("bool") != std::string::npos && l.find("int") != std::string::npos) saw_bool = true;
  CHECK(saw_bool);
}

TEST_CASE("lcvm templates rename binders and splice the input") {
  Registry<LcvmTarget> reg(Lang::Affi, Lang::MiniML);
  using LRule = Rule<LcvmTarget>;
  using namespace polybridge::lcvm;
  LRule r;
  r.name = "bool-int";
  r.a = tb();
  r.b = ti();
  r.glue_ab = if_(input(), num(0), num(1));
  r.glue_ba = let("x", input(), var("x"));
  reg.add(r);
  auto d = derive(reg, tb(), ti());
  REQUIRE(d);
  FreshSupply fs;
  Expr in = var("v");
  Expr g = d.ok->emit(Dir::BtoA, fs, &in);
  CHECK(print_expr(g) == "let x#0 = v in x#0");
  CHECK(print_expr(d.ok->emit(Dir::AtoB, fs, &in)) == "if v {0} {1}");
}
