#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <sstream>

#include "polybridge/gclinear.hpp"

using namespace polybridge;
using namespace polybridge::lcvm;

static const gclinear::Registry& rules() {
  static const gclinear::Registry reg = gclinear::default_rules();
  return reg;
}

static std::string slurp(const std::string& rel) {
  std::ifstream in(std::string(POLYBRIDGE_SOURCE_DIR) + "/" + rel);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static src::ExprPtr checked(Lang l, const std::string& text, std::vector<gclinear::LinearUse>* uses = nullptr) {
  auto e = src::parse(l, text);
  gclinear::typecheck(rules(), *e, {}, uses);
  return e;
}

static Expr compiled(Lang l, const std::string& text) {
  auto e = checked(l, text);
  FreshSupply fs;
  return gclinear::compile(rules(), *e, fs);
}

static RunResult run_text(Lang l, const std::string& text, GcPolicy p = GcPolicy::AtCallGc) {
  return run(Config::initial(compiled(l, text), p), 100000);
}

static std::string rejection(Lang l, const std::string& text) {
  try {
    checked(l, text);
    return "";
  } catch (const StaticError& e) {
    return e.diag().message;
  }
}

static Type l3t(const std::string& s) { return src::parse_type(Lang::L3, s); }
static Type mlt(const std::string& s) { return src::parse_type(Lang::MiniML, s); }

TEST_CASE("samples") {
  CHECK(run_text(Lang::MiniML, slurp("samples/gclinear/church_second.mml")).outcome.describe() == "value 1");
  CHECK(run_text(Lang::L3, slurp("samples/gclinear/church_convert.l3")).outcome.describe() == "value 0");
  CHECK(run_text(Lang::L3, slurp("samples/gclinear/ref_handoff.l3")).outcome.describe() == "value 0");
  CHECK(run_text(Lang::L3, slurp("samples/gclinear/swap_free.l3")).outcome.describe() == "value 0");
  CHECK(print_type(checked(Lang::MiniML, slurp("samples/gclinear/church_second.mml"))->ty) == "foreign<bool>");
}

TEST_CASE("l3 statics") {
  const char* roundtrip = "let <z, p> = new true in let (c, ptr) = p in free <z, (c, ptr)>";
  CHECK(print_type(checked(Lang::L3, roundtrip)->ty) == "bool");
  CHECK(run_text(Lang::L3, roundtrip).outcome.describe() == "value 0");
  CHECK(print_type(checked(Lang::L3, "new true")->ty) == "exists z. Cap z bool * Ptr z");

  // capabilities are linear
  CHECK(rejection(Lang::L3, "let <z, p> = new true in let (c, ptr) = p in "
                            "(swap c ptr false, free <z, (c, ptr)>)")
            .find("used more than once") != std::string::npos);
  CHECK(rejection(Lang::L3, "let <z, p> = new true in true").find("never used") != std::string::npos);
  CHECK(rejection(Lang::L3, "\\x:bool * bool. true").find("never used") != std::string::npos);
  CHECK(rejection(Lang::L3, "\\x:bool. true").empty());

  // dupl and drop only on Duplicable types
  CHECK(rejection(Lang::L3, "let <z, p> = new true in let (c, ptr) = p in let (a, b) = dupl c in true")
            .find("Duplicable") != std::string::npos);
  CHECK(rejection(Lang::L3, "let <z, p> = new true in let (c, ptr) = p in let (a, b) = dupl ptr in free <z, (c, a)>")
            .empty());
  CHECK(rejection(Lang::L3, "drop true").empty());
  CHECK(rejection(Lang::L3, "drop (new true)").find("Duplicable") != std::string::npos);
  CHECK(rejection(Lang::L3, "let !f = !(\\x:bool. x) in (f true, f false)").empty());
  CHECK(rejection(Lang::L3, "\\x:bool * bool. !x").find("uses no linear") != std::string::npos);

  // locations stay in scope
  CHECK(rejection(Lang::L3, "let <z, p> = new true in p").find("escapes") != std::string::npos);
  CHECK(rejection(Lang::L3, "\\x:Ptr q. x").find("unbound location") != std::string::npos);
  CHECK(print_type(checked(Lang::L3, "/\\z. \\c:Cap z bool. c")->ty) == "forall z. Cap z bool -o Cap z bool");

  // if branches use the same linear variables
  CHECK(rejection(Lang::L3, "let <z, p> = new true in if true then free <z, p> else true").find("branches") !=
        std::string::npos);
}

TEST_CASE("boundary statics") {
  CHECK(rejection(Lang::MiniML, "l3[| new true |] : foreign<exists z. Cap z bool * Ptr z>").find("Duplicable") !=
        std::string::npos);
  CHECK(rejection(Lang::MiniML, "l3[| true |] : foreign<bool>").empty());
  CHECK(rejection(Lang::MiniML, "l3[| true |] : int").find("no conversion rule") != std::string::npos);
  // a miniml closure could run its body twice
  CHECK(rejection(Lang::L3, "let <z, p> = new true in "
                            "ml[| !((\\u:unit. l3[| <z, p> |] : ref foreign<bool>) ()) |] : bool")
            .find("may not capture") != std::string::npos);
  CHECK(rejection(Lang::L3, "let <z, p> = new true in ml[| !(l3[| <z, p> |] : ref foreign<bool>) |] : bool").empty());
  CHECK(rejection(Lang::L3, "ml[| ref (l3[| true |] : forall a. a -> a -> a) |] : exists z. Cap z bool * !Ptr z")
            .empty());
  CHECK(rejection(Lang::L3, "ml<l3[| false |] : foreign<bool>> : bool").empty());
  CHECK(rejection(Lang::MiniML, "affi[| true |] : int").find("gclinear") != std::string::npos);
}

TEST_CASE("compiled memory operations") {
  auto r = run_text(Lang::L3, "new true");
  CHECK(print_expr(r.final.expr) == "((), &0)");
  REQUIRE(r.final.heap.count(0));
  CHECK(r.final.heap.at(0).tag == Tag::Manual);
  CHECK(print_expr(r.final.heap.at(0).value) == "0");

  auto s = run_text(Lang::L3, "let <z, p> = new true in let (c, ptr) = p in "
                              "let (c2, old) = swap c ptr false in <z, (c2, (ptr, old))>");
  CHECK(print_expr(s.final.expr) == "((), (&0, 0))");
  CHECK(s.final.heap.at(0).tag == Tag::Manual);
  CHECK(print_expr(s.final.heap.at(0).value) == "1");

  auto f = run_text(Lang::L3, "let <z, p> = new false in free <z, p>");
  CHECK(f.outcome.describe() == "value 1");
  CHECK(f.final.heap.empty());
}

TEST_CASE("ref glue moves the cell to the collector") {
  FreshSupply fs;
  Expr pkg = let("x", alloc(num(0)), pair(unit(), var("x")));
  Expr to_ml = gclinear::boundary_glue(rules(), Lang::MiniML, mlt("ref foreign<bool>"),
                                       l3t("exists z. Cap z bool * !Ptr z"), pkg, fs);
  auto read = run(Config::initial(let("y", to_ml, deref(var("y")))), 100);
  CHECK(read.outcome.describe() == "value 0");
  CHECK(read.final.heap.at(0).tag == Tag::Gc);
  auto freed = run(Config::initial(let("y", to_ml, free_(var("y")))), 100);
  CHECK(freed.outcome.describe() == "fail Ptr");

  // the payload is converted in place
  Expr church_pkg = let("x", alloc(num(1)), pair(unit(), var("x")));
  Expr to_church = gclinear::boundary_glue(rules(), Lang::MiniML, mlt("ref (forall a. a -> a -> a)"),
                                           l3t("exists z. Cap z bool * !Ptr z"), church_pkg, fs);
  auto c = run(Config::initial(let("y", to_church, app(app(app(deref(var("y")), unit()), num(7)), num(8)))), 100);
  CHECK(c.outcome.describe() == "value 8");

  // the other way copies into a fresh manual cell
  Expr to_l3 = gclinear::boundary_glue(rules(), Lang::L3, l3t("exists z. Cap z bool * !Ptr z"),
                                       mlt("ref foreign<bool>"), ref(num(1)), fs);
  auto back = run(Config::initial(let("q", to_l3, free_(snd(var("q"))))), 100);
  CHECK(back.outcome.kind == Outcome::Kind::Value);
  auto copy = run(Config::initial(to_l3), 100);
  CHECK(copy.final.heap.size() == 2);
  CHECK(copy.final.heap.at(0).tag == Tag::Gc);
  CHECK(copy.final.heap.at(1).tag == Tag::Manual);
}

TEST_CASE("church boolean glue") {
  FreshSupply fs;
  Type church = mlt("forall a. a -> a -> a");
  Expr tru = compiled(Lang::MiniML, "/\\a. \\x:a. \\y:a. x");
  Expr fls = compiled(Lang::MiniML, "/\\a. \\x:a. \\y:a. y");
  auto to_bool = [&](Expr e) { return gclinear::boundary_glue(rules(), Lang::L3, Type::boolean(), church, e, fs); };
  auto to_church = [&](Expr e) { return gclinear::boundary_glue(rules(), Lang::MiniML, church, Type::boolean(), e, fs); };
  CHECK(run(Config::initial(to_bool(tru)), 100).outcome.describe() == "value 0");
  CHECK(run(Config::initial(to_bool(fls)), 100).outcome.describe() == "value 1");
  for (std::int64_t b : {0, 1})
    CHECK(run(Config::initial(to_bool(to_church(num(b)))), 100).outcome.value == std::to_string(b));
  // foreign glue is the identity
  Expr v = num(5);
  CHECK(expr_equal(gclinear::boundary_glue(rules(), Lang::MiniML, mlt("foreign<bool>"), Type::boolean(), v, fs), v));
}

TEST_CASE("gc policies agree and nothing fails") {
  for (const char* f : {"samples/gclinear/church_convert.l3", "samples/gclinear/ref_handoff.l3",
                        "samples/gclinear/swap_free.l3"}) {
    Expr e = compiled(Lang::L3, slurp(f));
    auto a = run(Config::initial(e, GcPolicy::AtCallGc), 100000);
    auto b = run(Config::initial(e, GcPolicy::Never), 100000);
    auto c = run(Config::initial(e, GcPolicy::EveryAlloc), 100000);
    INFO(f);
    CHECK(a.outcome.kind == Outcome::Kind::Value);
    CHECK(values_equiv(a.final.expr, a.final.heap, b.final.expr, b.final.heap));
    CHECK(values_equiv(a.final.expr, a.final.heap, c.final.expr, c.final.heap));
  }
  // garbage then an answer: every-alloc ends with the smallest heap
  const char* garbage = "ml[| (\\a:ref int. (\\b:ref int. l3[| true |] : foreign<bool>) (ref 2)) (ref 1) |] : bool";
  auto never = run_text(Lang::L3, garbage, GcPolicy::Never);
  auto every = run_text(Lang::L3, garbage, GcPolicy::EveryAlloc);
  CHECK(never.outcome.describe() == "value 0");
  CHECK(every.outcome.describe() == "value 0");
  CHECK(every.final.heap.size() < never.final.heap.size());
}

TEST_CASE("linear bindings are each consumed once") {
  std::vector<gclinear::LinearUse> uses;
  checked(Lang::L3, slurp("samples/gclinear/swap_free.l3"), &uses);
  int caps = 0;
  for (const auto& u : uses) {
    CHECK(u.uses == 1);
    if (u.type.is(TyCon::Cap)) ++caps;
  }
  CHECK(caps == 2);
}
