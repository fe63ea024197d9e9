#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polybridge/core.hpp"

namespace polybridge::lcvm {

enum class LOp {
  Unit, Int, Loc, Var,
  Pair, Fst, Snd, Inl, Inr,
  If, Match, Let, Lam, App,
  Ref, Deref, Assign, Fail,
  Alloc, Free, GcMov, CallGc,
  Protect,      // phantom oracle only
  Input, Hole   // glue templates only
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  LOp op = LOp::Unit;
  std::int64_t n = 0;          // Int
  std::uint64_t loc = 0;       // Loc; flag for Protect
  std::string x, y;            // binders; Var name; Hole name
  bool stat = false;           // Lam / Let binder is static (phantom flags minted on application)
  ErrorCode code = ErrorCode::Type;
  std::vector<Expr> kids;
};

Expr unit();
Expr num(std::int64_t n);
Expr loc(std::uint64_t l);
Expr var(const std::string& x);
Expr pair(Expr a, Expr b);
Expr fst(Expr e);
Expr snd(Expr e);
Expr inl(Expr e);
Expr inr(Expr e);
Expr if_(Expr c, Expr zero, Expr nonzero);
Expr match(Expr e, const std::string& x, Expr left, const std::string& y, Expr right);
Expr let(const std::string& x, Expr bound, Expr body, bool stat = false);
Expr lam(const std::string& x, Expr body, bool stat = false);
Expr app(Expr f, Expr a);
Expr app(Expr f, Expr a, Expr b);
Expr ref(Expr e);
Expr deref(Expr e);
Expr assign(Expr l, Expr v);
Expr fail(ErrorCode c);
Expr alloc(Expr e);
Expr free_(Expr e);
Expr gcmov(Expr e);
Expr callgc();
Expr protect(Expr e, std::uint64_t flag);
Expr input();
Expr hole(const std::string& name, Expr arg);

// thunk(e) = let r = ref 1 in \_{ if !r {fail Conv} {r := 0; e} }
Expr thunk(Expr e, const std::string& flag_name = "r");
// e1; e2 encoded as let _ = e1 in e2
Expr seq(Expr a, Expr b);

bool is_value(const Expr& e);  // syntactic values (Protect is never a value)
bool expr_equal(const Expr& a, const Expr& b);
bool alpha_equal(const Expr& a, const Expr& b);

Expr subst(const Expr& e, const std::string& x, const Expr& v);
std::set<std::string> free_vars(const Expr& e);
std::set<std::uint64_t> locations(const Expr& e);
Expr erase(const Expr& e);  // drops Protect wrappers
std::size_t expr_size(const Expr& e);

// ---- machine ----

enum class Tag { Manual, Gc };
struct Cell {
  Tag tag;
  Expr value;
};
using Heap = std::map<std::uint64_t, Cell>;

enum class GcPolicy { AtCallGc, Never, EveryAlloc };
const char* gc_policy_name(GcPolicy p);
std::optional<GcPolicy> parse_gc_policy(const std::string& s);

struct GcEvent {
  Heap before;
  std::set<std::uint64_t> roots;  // free locations of the current expression
  std::set<std::uint64_t> pinned;
  Heap after;
};

struct Config {
  Heap heap;
  Expr expr;
  std::set<std::uint64_t> pinned;
  GcPolicy policy = GcPolicy::AtCallGc;
  bool phantom_mode = false;
  std::set<std::uint64_t> phantom;  // live flags
  std::uint64_t next_flag = 0;
  bool stuck = false;
  std::function<void(const GcEvent&)> on_collect;

  static Config initial(Expr e, GcPolicy policy = GcPolicy::AtCallGc, bool phantom = false);
};

// Marks from roots, pinned locations and every manual cell; sweeps
// unmarked gc cells.  Returns the swept ids.
std::set<std::uint64_t> collect_garbage(Heap& h, const std::set<std::uint64_t>& roots,
                                        const std::set<std::uint64_t>& pinned);

// Lowest id not in the heap.
std::uint64_t fresh_location(const Heap& h);

enum class StepStatus { Stepped, Terminal };

struct StepInfo {
  StepStatus status = StepStatus::Terminal;
  Expr redex;                // the contracted subterm
  bool protect_step = false; // consumed a phantom flag
  bool failed = false;
};

StepInfo step(Config& c);

struct RunResult {
  Outcome outcome;
  Config final;
};

using TraceHook = std::function<void(std::uint64_t k, const Config& before, const StepInfo& info)>;
RunResult run(Config c, std::uint64_t fuel, const TraceHook& trace = nullptr);

Heap erase_heap(const Heap& h);

// Compares two values (with their reachable heap fragments) up to a
// bijection on locations.
bool values_equiv(const Expr& a, const Heap& ha, const Expr& b, const Heap& hb);

// ---- text format ----
std::string print_expr(const Expr& e);
Expr parse_expr(const std::string& text);

}  // namespace polybridge::lcvm
