#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "polybridge/refpair.hpp"

using namespace polybridge;
using namespace polybridge::stack;

static const refpair::Registry& rules() {
  static const refpair::Registry reg = refpair::default_rules();
  return reg;
}

static Type ty(Lang l, const std::string& s) { return src::parse_type(l, s); }

static src::ExprPtr checked(Lang l, const std::string& text) {
  auto e = src::parse(l, text);
  refpair::typecheck(rules(), *e);
  return e;
}

static bool rejects(Lang l, const std::string& text) {
  try {
    checked(l, text);
    return false;
  } catch (const StaticError&) {
    return true;
  }
}

static RunResult run_text(Lang l, const std::string& text) {
  auto e = checked(l, text);
  FreshSupply fs;
  return run(refpair::compile(rules(), *e, fs), 100000);
}

static std::string result(Lang l, const std::string& text) {
  auto r = run_text(l, text);
  if (r.outcome.kind == Outcome::Kind::Value) return print_value(*r.value);
  return r.outcome.describe();
}

TEST_CASE("refhl statics") {
  CHECK(print_type(checked(Lang::RefHL, "if true then ref false else ref true")->ty) == "ref bool");
  CHECK(print_type(checked(Lang::RefHL, "ll[| 5 |] : bool")->ty) == "bool");
  CHECK(rejects(Lang::RefHL, "ll[| 5 |] : ref bool"));
  CHECK(rejects(Lang::RefHL, "if () then true else false"));
  CHECK(rejects(Lang::RefHL, "x"));
  CHECK(rejects(Lang::RefHL, "(\\x:bool. x) ()"));
  CHECK(print_type(checked(Lang::RefHL, "match inl[bool + unit] true x{x} y{false}")->ty) == "bool");
  CHECK(print_type(checked(Lang::RefHL, "ll[| [0, 1] |] : bool + bool")->ty) == "bool + bool");
  CHECK(print_type(checked(Lang::RefHL, "ll[| [0, 1] |] : bool * bool")->ty) == "bool * bool");
  CHECK(rejects(Lang::RefHL, "ll[| [0, 1] |] : bool * ref bool"));
}

TEST_CASE("refll statics") {
  CHECK(print_type(checked(Lang::RefLL, "[1, 2, 3]")->ty) == "[int]");
  CHECK(print_type(checked(Lang::RefLL, "[1, 2][0]")->ty) == "int");
  CHECK(rejects(Lang::RefLL, "1[0]"));
  CHECK(rejects(Lang::RefLL, "[1, 2][[0]]"));
  CHECK(print_type(checked(Lang::RefLL, "hl[| true |] : int")->ty) == "int");
  CHECK(print_type(checked(Lang::RefLL, "[: int]")->ty) == "[int]");
  CHECK(rejects(Lang::RefLL, "hl[| true |] : [int]"));
  CHECK(rejects(Lang::RefLL, "[1, hl[| () |] : int]"));
}

TEST_CASE("compiled programs run") {
  CHECK(result(Lang::RefHL, "inl[bool + bool] true") == "[0, 0]");
  CHECK(result(Lang::RefHL, "if false then ll[| 1 |] : bool else ll[| 2 |] : bool") == "2");
  CHECK(result(Lang::RefLL, "2 + 3") == "5");
  CHECK(result(Lang::RefLL, "[4, 5, 6][2]") == "6");
  CHECK(result(Lang::RefLL, "[4, 5, 6][3]") == "fail Idx");
  CHECK(result(Lang::RefLL, "(\\x:int. x + x) 21") == "42");
  CHECK(result(Lang::RefHL, "fst (true, false)") == "0");
  CHECK(result(Lang::RefHL, "snd (true, false)") == "1");
  CHECK(result(Lang::RefHL, "match inr[bool + bool] false x{true} y{y}") == "1");
  CHECK(result(Lang::RefHL, "!(ref false)") == "1");
  CHECK(result(Lang::RefLL, "hl[| match ll[| [1, 0] |] : bool + bool x{x} y{y} |] : int") == "0");
  CHECK(result(Lang::RefLL, "hl[| match ll[| [2, 0] |] : bool + bool x{x} y{y} |] : int") == "fail Conv");
  CHECK(result(Lang::RefLL, "hl[| match ll[| [0] |] : bool + bool x{x} y{y} |] : int") == "fail Conv");
}

TEST_CASE("ref glue is empty and writes are visible through both aliases") {
  FreshSupply fs;
  CHECK(refpair::boundary_glue(rules(), Lang::RefHL, ty(Lang::RefHL, "ref bool"), ty(Lang::RefLL, "ref int"), fs).empty());
  CHECK(refpair::boundary_glue(rules(), Lang::RefLL, ty(Lang::RefLL, "ref int"), ty(Lang::RefHL, "ref bool"), fs).empty());
  CHECK(refpair::boundary_glue(rules(), Lang::RefHL, Type::boolean(), Type::integer(), fs).empty());
  CHECK(refpair::boundary_glue(rules(), Lang::RefLL, Type::integer(), Type::boolean(), fs).empty());

  // write through the RefLL alias, read through the RefHL one
  CHECK(result(Lang::RefHL,
               "(\\r:ref bool. (\\x:bool. !r) (ll[| (hl[| r |] : ref int) := 1 |] : bool)) (ref true)") == "1");
  // and the other way round
  CHECK(result(Lang::RefLL,
               "(\\r:ref int. (\\x:int. !r) (hl[| (\\u:unit. true) ((ll[| r |] : ref bool) := true) |] : int)) (ref 7)") ==
        "0");
  // exactly one heap cell
  auto r = run_text(Lang::RefHL, "(\\r:ref bool. (\\x:bool. !r) (ll[| (hl[| r |] : ref int) := 1 |] : bool)) (ref true)");
  CHECK(r.final.heap.size() == 1);
}

static Value arr(std::vector<std::int64_t> xs) {
  std::vector<Value> v;
  for (auto x : xs) v.push_back(Value(x));
  return array(std::move(v));
}

static std::string apply_glue(const Program& glue, const Value& in) {
  Config c = Config::initial(glue);
  c.stack.push_back(in);
  auto r = run(c, 10000);
  if (r.outcome.kind != Outcome::Kind::Value) return r.outcome.describe();
  REQUIRE(r.residual.empty());
  return print_value(*r.value);
}

static void all_arrays(std::vector<std::vector<std::int64_t>>& out) {
  out.push_back({});
  for (std::size_t n = 1; n <= 3; ++n) {
    std::vector<std::int64_t> cur(n, -1);
    while (true) {
      out.push_back(cur);
      std::size_t i = 0;
      while (i < n && cur[i] == 2) cur[i++] = -1;
      if (i == n) break;
      ++cur[i];
    }
  }
}

TEST_CASE("array to sum glue agrees with a direct semantic oracle") {
  FreshSupply fs;
  Program glue = refpair::boundary_glue(rules(), Lang::RefHL, ty(Lang::RefHL, "bool + bool"), ty(Lang::RefLL, "[int]"), fs);
  CHECK(stack::print_program_inline(glue).find("less?; if0 { fail Conv } { }") != std::string::npos);
  std::vector<std::vector<std::int64_t>> inputs;
  all_arrays(inputs);
  CHECK(inputs.size() == 1 + 4 + 16 + 64);
  for (const auto& a : inputs) {
    std::string want;
    if (a.size() < 2 || (a[0] != 0 && a[0] != 1))
      want = "fail Conv";
    else
      want = print_value(arr({a[0], a[1]}));
    INFO(print_value(arr(a)));
    CHECK(apply_glue(glue, arr(a)) == want);
  }
  CHECK(apply_glue(glue, arr({1, 0})) == "[1, 0]");
  CHECK(apply_glue(glue, arr({7})) == "fail Conv");
}

TEST_CASE("array to pair glue agrees with a direct semantic oracle") {
  FreshSupply fs;
  Program glue = refpair::boundary_glue(rules(), Lang::RefHL, ty(Lang::RefHL, "bool * bool"), ty(Lang::RefLL, "[int]"), fs);
  std::vector<std::vector<std::int64_t>> inputs;
  all_arrays(inputs);
  for (const auto& a : inputs) {
    std::string want = a.size() < 2 ? "fail Conv" : print_value(arr({a[0], a[1]}));
    INFO(print_value(arr(a)));
    CHECK(apply_glue(glue, arr(a)) == want);
  }
}

TEST_CASE("sum and pair to array glue") {
  FreshSupply fs;
  Program sum = refpair::boundary_glue(rules(), Lang::RefLL, ty(Lang::RefLL, "[int]"), ty(Lang::RefHL, "bool + bool"), fs);
  for (std::int64_t tag : {0, 1})
    for (std::int64_t p : {0, 1}) CHECK(apply_glue(sum, arr({tag, p})) == print_value(arr({tag, p})));
  Program pair = refpair::boundary_glue(rules(), Lang::RefLL, ty(Lang::RefLL, "[int]"), ty(Lang::RefHL, "bool * bool"), fs);
  CHECK(apply_glue(pair, arr({1, 0})) == "[1, 0]");
  // nested: a pair of sums converts componentwise, with each guard in place
  Program nested = refpair::boundary_glue(rules(), Lang::RefHL, ty(Lang::RefHL, "(bool + bool) * (bool + bool)"),
                                          ty(Lang::RefLL, "[[int]]"), fs);
  CHECK(apply_glue(nested, array({arr({0, 1}), arr({1, 1})})) == "[[0, 1], [1, 1]]");
  CHECK(apply_glue(nested, array({arr({0, 1}), arr({3, 1})})) == "fail Conv");
  CHECK(apply_glue(nested, array({arr({0, 1})})) == "fail Conv");
}
