#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "polybridge/lcvm.hpp"

using namespace polybridge;
using namespace polybridge::lcvm;

static RunResult go(const std::string& text, GcPolicy policy = GcPolicy::AtCallGc, bool phantom = false,
                    std::uint64_t fuel = 100000) {
  return run(Config::initial(parse_expr(text), policy, phantom), fuel);
}

TEST_CASE("beta and basic forms") {
  CHECK(go("(\\x{x}) 5").outcome.value == "5");
  CHECK(go("fst (1, 2)").outcome.value == "1");
  CHECK(go("snd (1, 2)").outcome.value == "2");
  CHECK(go("match inl 3 a{a} b{0}").outcome.value == "3");
  CHECK(go("match inr 3 a{0} b{(b, b)}").outcome.value == "(3, 3)");
  CHECK(go("if 0 {1} {2}").outcome.value == "1");
  CHECK(go("if 7 {1} {2}").outcome.value == "2");
  CHECK(go("if () {1} {2}").outcome.code == ErrorCode::Type);
  CHECK(go("let x = 4 in (x, x)").outcome.value == "(4, 4)");
  CHECK(go("(\\f{f 1}) \\y{(y, y)}").outcome.value == "(1, 1)");
}

TEST_CASE("shape errors and failure propagation") {
  CHECK(go("fst 1").outcome.code == ErrorCode::Type);
  CHECK(go("1 2").outcome.code == ErrorCode::Type);
  CHECK(go("match 1 a{a} b{b}").outcome.code == ErrorCode::Type);
  CHECK(go("!5").outcome.code == ErrorCode::Type);
  CHECK(go("x").outcome.code == ErrorCode::Type);
  auto f = go("(1, fail Conv)");
  CHECK(f.outcome.kind == Outcome::Kind::Fail);
  CHECK(f.outcome.code == ErrorCode::Conv);
  CHECK(go("fail Conv").outcome.code == ErrorCode::Conv);
}

TEST_CASE("references and the manual heap") {
  CHECK(go("let x = ref 1 in !x").outcome.value == "1");
  CHECK(go("let x = ref 1 in let _ = x := 9 in !x").outcome.value == "9");
  CHECK(go("let x = alloc 1 in let _ = x := 2 in !x").outcome.value == "2");

  Config c = Config::initial(parse_expr("free &0"));
  c.heap[0] = Cell{Tag::Gc, num(3)};
  CHECK(run(c, 10).outcome.code == ErrorCode::Ptr);
  CHECK(go("free &0").outcome.code == ErrorCode::Ptr);
  CHECK(go("!&4").outcome.code == ErrorCode::Ptr);

  Config m = Config::initial(parse_expr("gcmov &0"));
  m.heap[0] = Cell{Tag::Manual, num(3)};
  auto r = run(m, 10);
  CHECK(r.outcome.value == "&0");
  REQUIRE(r.final.heap.count(0));
  CHECK(r.final.heap.at(0).tag == Tag::Gc);
  CHECK(go("let l = ref 1 in gcmov l").outcome.code == ErrorCode::Ptr);

  auto fr = go("let l = alloc 1 in let _ = free l in alloc 5");
  CHECK(fr.outcome.value == "&0");  // the freed id is re-used
}

TEST_CASE("thunk guard fails on the second force") {
  Expr t = thunk(num(5));
  auto once = run(Config::initial(app(t, unit())), 1000);
  CHECK(once.outcome.value == "5");
  Expr twice = let("t", t, seq(app(var("t"), unit()), app(var("t"), unit())));
  auto r = run(Config::initial(twice), 1000);
  CHECK(r.outcome.kind == Outcome::Kind::Fail);
  CHECK(r.outcome.code == ErrorCode::Conv);
}

TEST_CASE("collect_garbage examples") {
  Heap h{{0, Cell{Tag::Gc, num(1)}}};
  collect_garbage(h, {}, {});
  CHECK(h.empty());

  Heap h2{{0, Cell{Tag::Manual, loc(1)}}, {1, Cell{Tag::Gc, num(2)}}};
  collect_garbage(h2, {}, {});
  CHECK(h2.size() == 2);

  Heap h3{{0, Cell{Tag::Gc, loc(1)}}, {1, Cell{Tag::Gc, num(2)}}};
  collect_garbage(h3, {0}, {});
  CHECK(h3.size() == 2);

  Heap h4{{0, Cell{Tag::Gc, num(1)}}};
  collect_garbage(h4, {}, {0});
  CHECK(h4.size() == 1);
}

// Independent reachability: repeated relaxation over an adjacency matrix.
static std::set<std::uint64_t> reachable3(const Heap& h, std::set<std::uint64_t> seed) {
  for (auto& [l, c] : h)
    if (c.tag == Tag::Manual) seed.insert(l);
  bool grew = true;
  while (grew) {
    grew = false;
    for (auto& [l, c] : h) {
      if (!seed.count(l)) continue;
      for (auto t : locations(c.value))
        if (seed.insert(t).second) grew = true;
    }
  }
  return seed;
}

TEST_CASE("collect_garbage agrees with brute force on every 3-location heap") {
  // each location: absent, manual, or gc; value: int or a pointer to 0..2
  int checked = 0;
  for (int shape = 0; shape < 27; ++shape) {
    for (int vals = 0; vals < 64; ++vals) {
      for (int rootmask = 0; rootmask < 8; ++rootmask) {
        Heap h;
        int s = shape, v = vals;
        for (std::uint64_t l = 0; l < 3; ++l, s /= 3, v /= 4) {
          int kind = s % 3, val = v % 4;
          if (kind == 0) continue;
          Expr stored = val == 3 ? num(7) : loc(val);
          h[l] = Cell{kind == 1 ? Tag::Manual : Tag::Gc, stored};
        }
        std::set<std::uint64_t> roots;
        for (std::uint64_t l = 0; l < 3; ++l)
          if (rootmask & (1 << l)) roots.insert(l);
        auto live = reachable3(h, roots);
        Heap g = h;
        collect_garbage(g, roots, {});
        for (auto& [l, c] : h) {
          bool keep = c.tag == Tag::Manual || live.count(l);
          CHECK(g.count(l) == (keep ? 1u : 0u));
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 27 * 64 * 8);
}

TEST_CASE("gc policies") {
  std::string prog = "let a = ref 1 in let b = ref 2 in let _ = callgc in !b";
  auto never = go(prog, GcPolicy::Never);
  auto at = go(prog, GcPolicy::AtCallGc);
  auto every = go(prog, GcPolicy::EveryAlloc);
  CHECK(never.outcome.value == "2");
  CHECK(at.outcome.value == "2");
  CHECK(every.outcome.value == "2");
  CHECK(never.final.heap.size() == 2);
  CHECK(at.final.heap.size() == 1);  // a is dead at callgc

  std::vector<GcEvent> events;
  Config c = Config::initial(parse_expr("let a = ref 1 in let _ = callgc in !a"));
  c.on_collect = [&](const GcEvent& e) { events.push_back(e); };
  auto r = run(c, 1000);
  CHECK(r.outcome.value == "1");
  REQUIRE(events.size() == 1);
  CHECK(events[0].after.size() == 1);
}

TEST_CASE("phantom oracle") {
  Config c = Config::initial(protect(num(5), 0), GcPolicy::AtCallGc, true);
  c.phantom.insert(0);
  c.next_flag = 1;
  auto info = step(c);
  CHECK(info.protect_step);
  CHECK(c.phantom.empty());
  CHECK(expr_equal(c.expr, num(5)));

  auto ok = go("(\\a@stat{a}) 5", GcPolicy::AtCallGc, true);
  CHECK(ok.outcome.value == "5");

  auto dbl = go("(\\a@stat{(a, a)}) 5", GcPolicy::AtCallGc, true);
  CHECK(dbl.outcome.kind == Outcome::Kind::Stuck);
  // without the oracle the same program runs fine
  CHECK(go("(\\a@stat{(a, a)}) 5").outcome.value == "(5, 5)");

  auto let_dbl = go("let a@stat = 5 in (a, a)", GcPolicy::AtCallGc, true);
  CHECK(let_dbl.outcome.kind == Outcome::Kind::Stuck);
}

TEST_CASE("erasure") {
  CHECK(expr_equal(erase(protect(num(5), 3)), num(5)));
  Expr e = lam("x", pair(protect(var("x"), 1), protect(protect(num(2), 2), 3)));
  CHECK(expr_equal(erase(e), lam("x", pair(var("x"), num(2)))));
  CHECK(expr_equal(erase(erase(e)), erase(e)));
}

static Expr random_expr(std::mt19937_64& rng, int depth, std::vector<std::string>& scope) {
  auto leaf = [&]() -> Expr {
    switch (rng() % 4) {
      case 0: return num(static_cast<std::int64_t>(rng() % 3));
      case 1: return unit();
      case 2: if (!scope.empty()) return var(scope[rng() % scope.size()]); return num(1);
      default: return rng() % 4 ? num(0) : fail(ErrorCode::Conv);
    }
  };
  if (depth == 0) return leaf();
  auto sub = [&]() { return random_expr(rng, depth - 1, scope); };
  auto bind = [&](const std::string& x) {
    scope.push_back(x);
    Expr b = sub();
    scope.pop_back();
    return b;
  };
  switch (rng() % 14) {
    case 0: return pair(sub(), sub());
    case 1: return fst(sub());
    case 2: return if_(sub(), sub(), sub());
    case 3: { Expr a = sub(); return let("v" + std::to_string(depth), a, bind("v" + std::to_string(depth)), rng() % 2); }
    case 4: return lam("w" + std::to_string(depth), bind("w" + std::to_string(depth)), rng() % 2);
    case 5: return app(sub(), sub());
    case 6: return ref(sub());
    case 7: return deref(sub());
    case 8: return assign(sub(), sub());
    case 9: return inl(sub());
    case 10: { Expr s = sub(); Expr l = bind("p"); Expr r = bind("q"); return match(s, "p", l, "q", r); }
    case 11: return rng() % 2 ? callgc() : alloc(sub());
    case 12: return rng() % 2 ? free_(sub()) : gcmov(sub());
    default: return leaf();
  }
}

TEST_CASE("random terms: print/parse round trip, determinism, erasure simulation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1500; ++i) {
    std::vector<std::string> scope;
    Expr e = random_expr(rng, 4, scope);
    CHECK(expr_equal(parse_expr(print_expr(e)), e));

    auto a = run(Config::initial(e), 300);
    auto b = run(Config::initial(e), 300);
    CHECK(a.outcome == b.outcome);

    // the phantom run, with protect steps removed, is the plain run
    Config pc = Config::initial(e, GcPolicy::AtCallGc, true);
    Config plain = Config::initial(e);
    bool diverged = false;
    for (int k = 0; k < 300 && !pc.stuck; ++k) {
      auto info = step(pc);
      if (info.status == StepStatus::Terminal || pc.stuck) break;
      if (info.protect_step) continue;
      step(plain);
      if (!expr_equal(erase(pc.expr), plain.expr) || erase_heap(pc.heap).size() != plain.heap.size()) {
        diverged = true;
        break;
      }
    }
    CHECK_FALSE(diverged);
  }
}

TEST_CASE("values_equiv respects location bijections") {
  Heap ha{{0, Cell{Tag::Gc, num(1)}}};
  Heap hb{{3, Cell{Tag::Gc, num(1)}}};
  CHECK(values_equiv(loc(0), ha, loc(3), hb));
  Heap hc{{3, Cell{Tag::Gc, num(2)}}};
  CHECK_FALSE(values_equiv(loc(0), ha, loc(3), hc));
  CHECK_FALSE(values_equiv(pair(loc(0), loc(0)), ha, pair(loc(3), loc(4)),
                           Heap{{3, Cell{Tag::Gc, num(1)}}, {4, Cell{Tag::Gc, num(1)}}}));
}
