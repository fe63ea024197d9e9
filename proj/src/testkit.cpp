#include "polybridge/testkit.hpp"

#include "json.hpp"

#include "gen_common.hpp"
#include "polybridge/affine.hpp"
#include "polybridge/gclinear.hpp"
#include "polybridge/refpair.hpp"

namespace polybridge::testkit {

namespace {

const refpair::Registry& ref_rules() {
  static const refpair::Registry r = refpair::default_rules();
  return r;
}
const affine::Registry& affine_rules() {
  static const affine::Registry r = affine::default_rules();
  return r;
}
const gclinear::Registry& gclinear_rules() {
  static const gclinear::Registry r = gclinear::default_rules();
  return r;
}

thread_local int g_rejections = 0;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

src::ExprPtr fallback(Pair p) {
  switch (p) {
    case Pair::Ref: return src::make(Lang::RefHL, src::Op::True);
    case Pair::Affine: return src::make(Lang::Affi, src::Op::True);
    case Pair::GcLinear: return src::make(Lang::L3, src::Op::True);
  }
  return nullptr;
}

}  // namespace

const char* pair_name(Pair p) {
  switch (p) {
    case Pair::Ref: return "ref";
    case Pair::Affine: return "affine";
    case Pair::GcLinear: return "gclinear";
  }
  return "?";
}

std::optional<Pair> parse_pair(const std::string& s) {
  if (s == "ref") return Pair::Ref;
  if (s == "affine") return Pair::Affine;
  if (s == "gclinear") return Pair::GcLinear;
  return std::nullopt;
}

std::vector<Lang> pair_langs(Pair p) {
  switch (p) {
    case Pair::Ref: return {Lang::RefHL, Lang::RefLL};
    case Pair::Affine: return {Lang::Affi, Lang::MiniML};
    case Pair::GcLinear: return {Lang::L3, Lang::MiniML};
  }
  return {};
}

Type typecheck(Pair p, src::Expr& e) {
  switch (p) {
    case Pair::Ref: return refpair::typecheck(ref_rules(), e);
    case Pair::Affine: return affine::typecheck(affine_rules(), e);
    case Pair::GcLinear: return gclinear::typecheck(gclinear_rules(), e);
  }
  throw std::logic_error("unknown pair");
}

bool well_typed(Pair p, const src::Expr& e) {
  auto copy = src::clone(e);
  try {
    typecheck(p, *copy);
    return true;
  } catch (const StaticError&) {
    return false;
  }
}

src::ExprPtr generate(const GenConfig& cfg, std::uint64_t index) {
  g_rejections = 0;
  detail::Rng rng(splitmix(cfg.seed ^ splitmix(index)));
  GenConfig c = cfg;
  for (int attempt = 0; attempt < 200; ++attempt) {
    // back off toward smaller terms when candidates keep failing
    c.max_size = std::max(1, cfg.max_size >> (attempt / 25));
    src::ExprPtr e;
    switch (cfg.pair) {
      case Pair::Ref: e = detail::gen_ref(rng, c); break;
      case Pair::Affine: e = detail::gen_affine(rng, c); break;
      case Pair::GcLinear: e = detail::gen_gclinear(rng, c); break;
    }
    try {
      typecheck(cfg.pair, *e);
      return e;
    } catch (const StaticError&) {
      ++g_rejections;
    }
  }
  auto e = fallback(cfg.pair);
  typecheck(cfg.pair, *e);
  return e;
}

int last_rejections() { return g_rejections; }

void count_ops(const src::Expr& e, Coverage& into) {
  src::walk(e, [&](const src::Expr& n) { ++into[std::string(lang_name(n.lang)) + ":" + src::op_name(n.op)]; });
}

std::vector<std::string> constructors(Pair p) {
  using src::Op;
  auto keys = [](Lang l, std::initializer_list<Op> ops) {
    std::vector<std::string> out;
    for (Op op : ops) out.push_back(std::string(lang_name(l)) + ":" + src::op_name(op));
    return out;
  };
  std::vector<std::string> all;
  auto add = [&](std::vector<std::string> v) { all.insert(all.end(), v.begin(), v.end()); };
  auto miniml = {Op::Unit, Op::Int, Op::Var, Op::Lam, Op::App, Op::Pair, Op::Fst, Op::Snd, Op::Inl, Op::Inr,
                 Op::Match, Op::TyLam, Op::TyApp, Op::Ref, Op::Deref, Op::Assign, Op::Boundary};
  switch (p) {
    case Pair::Ref:
      add(keys(Lang::RefHL, {Op::Unit, Op::True, Op::False, Op::Var, Op::Lam, Op::App, Op::Pair, Op::Fst, Op::Snd,
                             Op::Inl, Op::Inr, Op::Match, Op::If, Op::Ref, Op::Deref, Op::Assign, Op::Boundary}));
      add(keys(Lang::RefLL, {Op::Int, Op::Var, Op::Lam, Op::App, Op::Array, Op::Index, Op::Add, Op::If0, Op::Ref,
                             Op::Deref, Op::Assign, Op::Boundary}));
      break;
    case Pair::Affine:
      add(keys(Lang::Affi, {Op::Unit, Op::True, Op::False, Op::Int, Op::Var, Op::AVar, Op::Lam, Op::App, Op::Pair,
                            Op::Bang, Op::LetBang, Op::WithPair, Op::Proj1, Op::Proj2, Op::LetPair, Op::Boundary}));
      add(keys(Lang::MiniML, miniml));
      break;
    case Pair::GcLinear:
      add(keys(Lang::L3, {Op::Unit, Op::True, Op::False, Op::Var, Op::Lam, Op::App, Op::If, Op::Pair, Op::LetUnit,
                          Op::LetPair, Op::LetBang, Op::Bang, Op::Dupl, Op::Drop, Op::New, Op::Free, Op::Swap,
                          Op::LocLam, Op::LocApp, Op::Pack, Op::Unpack, Op::Boundary, Op::Foreign}));
      add(keys(Lang::MiniML, miniml));
      break;
  }
  return all;
}

Compiled compile(Pair p, const src::Expr& e) {
  Compiled c;
  c.pair = p;
  FreshSupply fs;
  switch (p) {
    case Pair::Ref: c.stack = refpair::compile(ref_rules(), e, fs); break;
    case Pair::Affine: c.lcvm = affine::compile(affine_rules(), e, fs); break;
    case Pair::GcLinear: c.lcvm = gclinear::compile(gclinear_rules(), e, fs); break;
  }
  return c;
}

Execution execute(const Compiled& c, std::uint64_t fuel, lcvm::GcPolicy policy, bool phantom) {
  Execution x;
  if (c.pair == Pair::Ref) {
    auto r = stack::run(stack::Config::initial(c.stack), fuel);
    x.outcome = r.outcome;
    if (r.value) x.value = stack::print_value(*r.value);
    x.heap_size = r.final.heap.size();
    return x;
  }
  auto r = lcvm::run(lcvm::Config::initial(c.lcvm, policy, phantom), fuel);
  x.outcome = r.outcome;
  if (r.outcome.kind == Outcome::Kind::Value) x.value = lcvm::print_expr(r.final.expr);
  x.heap_size = r.final.heap.size();
  return x;
}

std::string outcome_class(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Value: return "value";
    case Outcome::Kind::Fail: return std::string("fail ") + error_name(o.code);
    case Outcome::Kind::FuelExhausted: return "fuel exhausted";
    case Outcome::Kind::Stuck: return "stuck";
  }
  return "?";
}

std::vector<std::string> permitted_outcomes(Pair p) {
  switch (p) {
    case Pair::Ref: return {"value", "fail Conv", "fail Idx", "fuel exhausted"};
    case Pair::Affine: return {"value", "fail Conv", "fuel exhausted"};
    case Pair::GcLinear: return {"value", "fuel exhausted"};
  }
  return {};
}

std::string Verdict::to_jsonl() const {
  nlohmann::ordered_json j;
  j["property"] = property;
  j["pair"] = pair_name(pair);
  j["verdict"] = pass ? "PASS" : "FAIL";
  j["program"] = program;
  j["outcome"] = outcome;
  j["permitted"] = permitted;
  if (!pass) {
    j["witness"] = witness;
    j["witness_outcome"] = witness_outcome;
  }
  return j.dump();
}

namespace {

bool permitted(Pair p, const std::string& cls) {
  auto ok = permitted_outcomes(p);
  return std::find(ok.begin(), ok.end(), cls) != ok.end();
}

// Shrinks a failing program and records it on the verdict.  `observe`
// re-runs the property on a candidate and returns its outcome when the
// candidate still fails.
void attach_witness(Verdict& v, Pair p, const src::Expr& e,
                    const std::function<std::optional<std::string>(const src::Expr&)>& observe) {
  auto small = shrink(p, e, [&](const src::Expr& c) { return observe(c).has_value(); });
  v.witness = src::print(*small);
  v.witness_outcome = observe(*small).value_or(v.outcome);
}

}  // namespace

Verdict check_type_safety(Pair p, const src::Expr& e, std::uint64_t fuel) {
  return check_type_safety(p, e, [&](const src::Expr& t) { return execute(compile(p, t), fuel).outcome; });
}

Verdict check_type_safety(Pair p, const src::Expr& e, const Runner& run) {
  auto observe = [&](const src::Expr& t) -> std::optional<std::string> {
    Outcome o = run(t);
    if (permitted(p, outcome_class(o))) return std::nullopt;
    return o.describe();
  };
  Verdict v;
  v.property = "type-safety";
  v.pair = p;
  v.program = src::print(e);
  v.permitted = permitted_outcomes(p);
  Outcome o = run(e);
  v.outcome = o.describe();
  v.pass = permitted(p, outcome_class(o));
  if (!v.pass) attach_witness(v, p, e, observe);
  return v;
}

namespace {

// Independent reachability check for one collection: the survivors must be
// exactly the manual cells plus everything reachable from the roots, the
// pinned set and manual cells.
bool collection_exact(const lcvm::GcEvent& ev) {
  std::set<std::uint64_t> seen;
  std::vector<std::uint64_t> todo(ev.roots.begin(), ev.roots.end());
  todo.insert(todo.end(), ev.pinned.begin(), ev.pinned.end());
  for (const auto& [id, cell] : ev.before)
    if (cell.tag == lcvm::Tag::Manual) todo.push_back(id);
  while (!todo.empty()) {
    auto id = todo.back();
    todo.pop_back();
    if (!seen.insert(id).second) continue;
    auto it = ev.before.find(id);
    if (it == ev.before.end()) continue;
    for (auto l : lcvm::locations(it->second.value)) todo.push_back(l);
  }
  for (const auto& [id, cell] : ev.before) {
    bool kept = ev.after.count(id) > 0;
    if (kept != (seen.count(id) > 0)) return false;
  }
  return ev.after.size() <= ev.before.size();
}

struct PolicyRun {
  Outcome outcome;
  lcvm::Config final;
  bool collections_exact = true;
  int collections = 0;
};

PolicyRun run_policy(const lcvm::Expr& code, lcvm::GcPolicy policy, std::uint64_t fuel) {
  PolicyRun pr;
  auto cfg = lcvm::Config::initial(code, policy);
  cfg.on_collect = [&](const lcvm::GcEvent& ev) {
    ++pr.collections;
    if (!collection_exact(ev)) pr.collections_exact = false;
  };
  auto r = lcvm::run(std::move(cfg), fuel);
  pr.outcome = r.outcome;
  pr.final = std::move(r.final);
  pr.final.on_collect = nullptr;
  return pr;
}

std::optional<std::string> gc_disagreement(const lcvm::Expr& code, std::uint64_t fuel, std::string* summary) {
  const lcvm::GcPolicy policies[] = {lcvm::GcPolicy::Never, lcvm::GcPolicy::AtCallGc, lcvm::GcPolicy::EveryAlloc};
  std::vector<PolicyRun> runs;
  std::string text;
  for (auto pol : policies) {
    runs.push_back(run_policy(code, pol, fuel));
    if (!text.empty()) text += " | ";
    text += std::string(lcvm::gc_policy_name(pol)) + ": " + runs.back().outcome.describe();
  }
  if (summary) *summary = text;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].collections_exact) return text + " (collection kept or lost the wrong cells)";
    const auto& a = runs[0];
    const auto& b = runs[i];
    if (a.outcome.kind != b.outcome.kind) return text;
    if (a.outcome.kind == Outcome::Kind::Fail && a.outcome.code != b.outcome.code) return text;
    if (a.outcome.kind == Outcome::Kind::Value &&
        !lcvm::values_equiv(a.final.expr, a.final.heap, b.final.expr, b.final.heap))
      return text + " (values differ)";
  }
  return std::nullopt;
}

}  // namespace

Verdict check_gc_differential(Pair p, const src::Expr& e, std::uint64_t fuel) {
  Verdict v;
  v.property = "gc-differential";
  v.pair = p;
  v.program = src::print(e);
  v.permitted = {"agree"};
  if (p == Pair::Ref) {
    v.outcome = "not applicable";
    return v;
  }
  auto bad = gc_disagreement(compile(p, e).lcvm, fuel, &v.outcome);
  v.pass = !bad;
  if (!v.pass)
    attach_witness(v, p, e, [&](const src::Expr& t) { return gc_disagreement(compile(p, t).lcvm, fuel, nullptr); });
  return v;
}

namespace {

bool heaps_equal(const lcvm::Heap& a, const lcvm::Heap& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [id, cell] : a) {
    auto it = b.find(id);
    if (it == b.end() || it->second.tag != cell.tag || !lcvm::expr_equal(it->second.value, cell.value))
      return false;
  }
  return true;
}

// Runs the phantom and plain machines in lockstep.  Returns a description
// of the first problem, if any.
std::optional<std::string> phantom_problem(const lcvm::Expr& code, std::uint64_t fuel, std::string* outcome) {
  lcvm::Config aug = lcvm::Config::initial(code, lcvm::GcPolicy::AtCallGc, true);
  lcvm::Config plain = lcvm::Config::initial(code);
  std::uint64_t steps = 0;
  while (steps < fuel) {
    auto info = lcvm::step(aug);
    if (aug.stuck) {
      if (outcome) *outcome = "stuck";
      return "stuck after " + std::to_string(steps) + " steps";
    }
    if (info.status == lcvm::StepStatus::Terminal) break;
    if (info.protect_step) continue;
    ++steps;
    auto pinfo = lcvm::step(plain);
    if (pinfo.status == lcvm::StepStatus::Terminal || !lcvm::expr_equal(lcvm::erase(aug.expr), plain.expr) ||
        !heaps_equal(lcvm::erase_heap(aug.heap), plain.heap))
      return "erased trace diverges from the plain trace at step " + std::to_string(steps);
  }
  auto plain_next = lcvm::step(plain);
  if (steps < fuel && plain_next.status != lcvm::StepStatus::Terminal)
    return "plain trace continues after the augmented one stopped";
  if (outcome) {
    auto r = lcvm::run(lcvm::Config::initial(code), fuel);
    *outcome = r.outcome.describe();
  }
  return std::nullopt;
}

}  // namespace

Verdict check_phantom_compiled(const lcvm::Expr& code, const std::string& label, std::uint64_t fuel) {
  Verdict v;
  v.property = "phantom";
  v.pair = Pair::Affine;
  v.program = label;
  v.permitted = {"no stuck", "erasure replays"};
  auto bad = phantom_problem(code, fuel, &v.outcome);
  v.pass = !bad;
  if (bad) v.outcome = *bad;
  return v;
}

Verdict check_phantom(const src::Expr& e, std::uint64_t fuel) {
  auto code = compile(Pair::Affine, e).lcvm;
  Verdict v = check_phantom_compiled(code, src::print(e), fuel);
  if (!v.pass)
    attach_witness(v, Pair::Affine, e, [&](const src::Expr& t) {
      return phantom_problem(compile(Pair::Affine, t).lcvm, fuel, nullptr);
    });
  return v;
}

namespace {

// Pre-order slots of a tree.
void slots(const src::ExprPtr& e, std::vector<src::ExprPtr*>& out, src::ExprPtr* self) {
  out.push_back(self);
  for (auto& k : e->kids) slots(k, out, &k);
}

src::ExprPtr deep_copy(const src::ExprPtr& e) {
  auto c = std::make_shared<src::Expr>(*e);
  for (auto& k : c->kids) k = deep_copy(k);
  return c;
}

std::vector<src::ExprPtr> constants_of(Lang l, const Type& t) {
  std::vector<src::ExprPtr> out;
  if (!t.valid()) return out;
  auto mk = [&](src::Op op, std::int64_t n = 0) {
    auto e = src::make(l, op);
    e->num = n;
    out.push_back(e);
  };
  bool has_bool = l == Lang::RefHL || l == Lang::Affi || l == Lang::L3;
  bool has_int = l == Lang::RefLL || l == Lang::Affi || l == Lang::MiniML;
  if (t.is(TyCon::Bool) && has_bool) {
    mk(src::Op::True);
    mk(src::Op::False);
  }
  if (t.is(TyCon::Int) && has_int) {
    mk(src::Op::Int, 0);
    mk(src::Op::Int, 1);
  }
  if (t.is(TyCon::Unit) && l != Lang::RefLL) mk(src::Op::Unit);
  return out;
}

}  // namespace

src::ExprPtr shrink(Pair p, const src::Expr& e, const std::function<bool(const src::Expr&)>& still_fails,
                    int max_steps) {
  // work on an annotated copy so node types are available
  auto current = deep_copy(src::clone(e));
  try {
    typecheck(p, *current);
  } catch (const StaticError&) {
    return current;
  }
  for (int step = 0; step < max_steps; ++step) {
    std::vector<src::ExprPtr*> nodes;
    slots(current, nodes, &current);
    bool improved = false;
    for (std::size_t i = 0; i < nodes.size() && !improved; ++i) {
      const src::Expr& n = **nodes[i];
      std::vector<src::ExprPtr> candidates;
      for (const auto& k : n.kids)
        if (k->lang == n.lang && k->ty.valid() && n.ty.valid() && type_equal(k->ty, n.ty)) candidates.push_back(k);
      if (src::size(n) > 1)
        for (auto& c : constants_of(n.lang, n.ty)) candidates.push_back(c);
      for (const auto& cand : candidates) {
        auto trial = deep_copy(current);
        std::vector<src::ExprPtr*> tslots;
        slots(trial, tslots, &trial);
        *tslots[i] = deep_copy(cand);
        try {
          typecheck(p, *trial);
        } catch (const StaticError&) {
          continue;
        }
        if (!still_fails(*trial)) continue;
        current = trial;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return current;
}

FuzzSummary fuzz(const GenConfig& cfg, int n, std::uint64_t fuel, std::ostream* jsonl) {
  FuzzSummary s;
  auto emit = [&](const Verdict& v) {
    ++s.verdicts;
    if (!v.pass) ++s.failures;
    if (jsonl) *jsonl << v.to_jsonl() << "\n";
  };
  for (int i = 0; i < n; ++i) {
    auto e = generate(cfg, static_cast<std::uint64_t>(i));
    s.rejected_candidates += last_rejections();
    ++s.terms;
    count_ops(*e, s.coverage);
    emit(check_type_safety(cfg.pair, *e, fuel));
    if (cfg.pair == Pair::GcLinear) emit(check_gc_differential(cfg.pair, *e, fuel));
    if (cfg.pair == Pair::Affine) emit(check_phantom(*e, fuel));
  }
  return s;
}

}  // namespace polybridge::testkit
