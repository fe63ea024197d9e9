#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "polybridge/lcvm.hpp"
#include "polybridge/stacklang.hpp"
#include "polybridge/syntax.hpp"

namespace polybridge::testkit {

enum class Pair { Ref, Affine, GcLinear };

const char* pair_name(Pair p);  // ref | affine | gclinear
std::optional<Pair> parse_pair(const std::string& s);
std::vector<Lang> pair_langs(Pair p);

struct GenConfig {
  Pair pair = Pair::Ref;
  int max_size = 30;            // rough node budget
  std::uint64_t seed = 0;
  double boundary_prob = 0.25;  // chance of trying a boundary at a node
  double elim_weight = 0.5;     // chance of an elimination form over an introduction form
  int max_type_depth = 2;
};

// Checks e with its pair's checker, annotating node types.  Throws
// StaticError when ill-typed.
Type typecheck(Pair p, src::Expr& e);
bool well_typed(Pair p, const src::Expr& e);

// A closed, checker-accepted term of ground type, a pure function of
// (cfg, index).
src::ExprPtr generate(const GenConfig& cfg, std::uint64_t index);

// How many candidates the last generate() call on this thread discarded.
int last_rejections();

// "lang:op" counters over checked terms.
using Coverage = std::map<std::string, int>;
void count_ops(const src::Expr& e, Coverage& into);
// Every constructor a pair's generator is expected to reach.
std::vector<std::string> constructors(Pair p);

struct Compiled {
  Pair pair = Pair::Ref;
  stack::Program stack;  // ref pair
  lcvm::Expr lcvm;       // affine and gclinear pairs
};
// Compiles a checked term.
Compiled compile(Pair p, const src::Expr& e);

struct Execution {
  Outcome outcome;
  std::string value;  // printed final value (empty unless outcome is a value)
  std::size_t heap_size = 0;
};
Execution execute(const Compiled& c, std::uint64_t fuel, lcvm::GcPolicy policy = lcvm::GcPolicy::AtCallGc,
                  bool phantom = false);

struct Verdict {
  std::string property;  // type-safety | gc-differential | phantom
  Pair pair = Pair::Ref;
  std::string program;
  std::string outcome;
  std::vector<std::string> permitted;
  bool pass = true;
  std::string witness;  // smallest failing program found when !pass
  std::string witness_outcome;
  std::string to_jsonl() const;
};

// Outcomes a pair's type-safety property allows: "value", "fail Conv", ...,
// and "fuel".
std::vector<std::string> permitted_outcomes(Pair p);
std::string outcome_class(const Outcome& o);

Verdict check_type_safety(Pair p, const src::Expr& e, std::uint64_t fuel);
// Same property with a caller-supplied compile-and-run step, so the
// verdict and shrinking machinery can be pointed at deliberately broken
// glue.
using Runner = std::function<Outcome(const src::Expr&)>;
Verdict check_type_safety(Pair p, const src::Expr& e, const Runner& run);
Verdict check_gc_differential(Pair p, const src::Expr& e, std::uint64_t fuel);
// Affine pair only: the compiled program under phantom flags must never
// get stuck, and erasing flags must give the plain run step for step.
Verdict check_phantom(const src::Expr& e, std::uint64_t fuel);
// Same check on an already compiled LCVM program (which need not come
// from a checked term).
Verdict check_phantom_compiled(const lcvm::Expr& code, const std::string& label, std::uint64_t fuel);

// Greedy shrinking: repeatedly replaces a node by a same-typed child or a
// constant while the result stays well-typed and still_fails holds.
src::ExprPtr shrink(Pair p, const src::Expr& e, const std::function<bool(const src::Expr&)>& still_fails,
                    int max_steps = 500);

struct FuzzSummary {
  int terms = 0;
  int verdicts = 0;
  int failures = 0;
  int rejected_candidates = 0;
  Coverage coverage;
};

// Generates n terms and runs every property that applies to the pair,
// writing one JSON line per verdict to jsonl when given.
FuzzSummary fuzz(const GenConfig& cfg, int n, std::uint64_t fuel, std::ostream* jsonl);

}  // namespace polybridge::testkit
