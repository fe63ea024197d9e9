#include "polybridge/lcvm.hpp"

#include <stdexcept>

namespace polybridge::lcvm {

namespace {

Expr mk(LOp op, std::vector<Expr> kids = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->kids = std::move(kids);
  return n;
}

}  // namespace

Expr unit() { return mk(LOp::Unit); }
Expr num(std::int64_t v) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Int;
  n->n = v;
  return n;
}
Expr loc(std::uint64_t l) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Loc;
  n->loc = l;
  return n;
}
Expr var(const std::string& x) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Var;
  n->x = x;
  return n;
}
Expr pair(Expr a, Expr b) { return mk(LOp::Pair, {std::move(a), std::move(b)}); }
Expr fst(Expr e) { return mk(LOp::Fst, {std::move(e)}); }
Expr snd(Expr e) { return mk(LOp::Snd, {std::move(e)}); }
Expr inl(Expr e) { return mk(LOp::Inl, {std::move(e)}); }
Expr inr(Expr e) { return mk(LOp::Inr, {std::move(e)}); }
Expr if_(Expr c, Expr z, Expr nz) { return mk(LOp::If, {std::move(c), std::move(z), std::move(nz)}); }
Expr match(Expr e, const std::string& x, Expr l, const std::string& y, Expr r) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Match;
  n->x = x;
  n->y = y;
  n->kids = {std::move(e), std::move(l), std::move(r)};
  return n;
}
Expr let(const std::string& x, Expr bound, Expr body, bool stat) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Let;
  n->x = x;
  n->stat = stat;
  n->kids = {std::move(bound), std::move(body)};
  return n;
}
Expr lam(const std::string& x, Expr body, bool stat) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Lam;
  n->x = x;
  n->stat = stat;
  n->kids = {std::move(body)};
  return n;
}
Expr app(Expr f, Expr a) { return mk(LOp::App, {std::move(f), std::move(a)}); }
Expr app(Expr f, Expr a, Expr b) { return app(app(std::move(f), std::move(a)), std::move(b)); }
Expr ref(Expr e) { return mk(LOp::Ref, {std::move(e)}); }
Expr deref(Expr e) { return mk(LOp::Deref, {std::move(e)}); }
Expr assign(Expr l, Expr v) { return mk(LOp::Assign, {std::move(l), std::move(v)}); }
Expr fail(ErrorCode c) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Fail;
  n->code = c;
  return n;
}
Expr alloc(Expr e) { return mk(LOp::Alloc, {std::move(e)}); }
Expr free_(Expr e) { return mk(LOp::Free, {std::move(e)}); }
Expr gcmov(Expr e) { return mk(LOp::GcMov, {std::move(e)}); }
Expr callgc() { return mk(LOp::CallGc); }
Expr protect(Expr e, std::uint64_t flag) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Protect;
  n->loc = flag;
  n->kids = {std::move(e)};
  return n;
}
Expr input() { return mk(LOp::Input); }
Expr hole(const std::string& name, Expr arg) {
  auto n = std::make_shared<Node>();
  n->op = LOp::Hole;
  n->x = name;
  n->kids = {std::move(arg)};
  return n;
}

Expr seq(Expr a, Expr b) { return let("_", std::move(a), std::move(b)); }

Expr thunk(Expr e, const std::string& r) {
  return let(r, ref(num(1)),
             lam("_", if_(deref(var(r)), fail(ErrorCode::Conv), seq(assign(var(r), num(0)), std::move(e)))));
}

bool is_value(const Expr& e) {
  switch (e->op) {
    case LOp::Unit: case LOp::Int: case LOp::Loc: case LOp::Lam:
      return true;
    case LOp::Pair:
      return is_value(e->kids[0]) && is_value(e->kids[1]);
    case LOp::Inl: case LOp::Inr:
      return is_value(e->kids[0]);
    default:
      return false;
  }
}

// Which children does this node's binder scope over?  Returns the bound
// name for child i, or nullptr.
static const std::string* binder_for(const Node& n, std::size_t i) {
  switch (n.op) {
    case LOp::Let: return i == 1 ? &n.x : nullptr;
    case LOp::Lam: return i == 0 ? &n.x : nullptr;
    case LOp::Match:
      if (i == 1) return &n.x;
      if (i == 2) return &n.y;
      return nullptr;
    default: return nullptr;
  }
}

static bool node_head_equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.kids.size() != b.kids.size()) return false;
  switch (a.op) {
    case LOp::Int: return a.n == b.n;
    case LOp::Loc: case LOp::Protect: return a.loc == b.loc;
    case LOp::Fail: return a.code == b.code;
    case LOp::Let: case LOp::Lam: return a.stat == b.stat;
    case LOp::Hole: return a.x == b.x;
    default: return true;
  }
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!node_head_equal(*a, *b)) return false;
  if (a->op == LOp::Var || a->op == LOp::Let || a->op == LOp::Lam) {
    if (a->x != b->x) return false;
  }
  if (a->op == LOp::Match && (a->x != b->x || a->y != b->y)) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!expr_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

using Env = std::vector<std::pair<std::string, std::string>>;

static bool aeq(const Expr& a, const Expr& b, Env& env) {
  if (!node_head_equal(*a, *b)) return false;
  if (a->op == LOp::Var) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      bool la = it->first == a->x, lb = it->second == b->x;
      if (la || lb) return la && lb;
    }
    return a->x == b->x;
  }
  for (std::size_t i = 0; i < a->kids.size(); ++i) {
    const std::string* ba = binder_for(*a, i);
    const std::string* bb = binder_for(*b, i);
    if (ba) env.emplace_back(*ba, *bb);
    bool ok = aeq(a->kids[i], b->kids[i], env);
    if (ba) env.pop_back();
    if (!ok) return false;
  }
  return true;
}

bool alpha_equal(const Expr& a, const Expr& b) {
  Env env;
  return aeq(a, b, env);
}

static Expr subst_rec(const Expr& e, const std::string& x, const Expr& v) {
  if (e->op == LOp::Var) return e->x == x ? v : e;
  if (e->kids.empty()) return e;
  std::shared_ptr<Node> out;
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    const std::string* b = binder_for(*e, i);
    if (b && *b == x) continue;
    Expr k = subst_rec(e->kids[i], x, v);
    if (k != e->kids[i]) {
      if (!out) out = std::make_shared<Node>(*e);
      out->kids[i] = std::move(k);
    }
  }
  return out ? Expr(out) : e;
}

Expr subst(const Expr& e, const std::string& x, const Expr& v) { return subst_rec(e, x, v); }

static void fv(const Expr& e, std::vector<std::string>& bound, std::set<std::string>& out) {
  if (e->op == LOp::Var) {
    for (const auto& b : bound)
      if (b == e->x) return;
    out.insert(e->x);
    return;
  }
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    const std::string* b = binder_for(*e, i);
    if (b) bound.push_back(*b);
    fv(e->kids[i], bound, out);
    if (b) bound.pop_back();
  }
}

std::set<std::string> free_vars(const Expr& e) {
  std::vector<std::string> bound;
  std::set<std::string> out;
  fv(e, bound, out);
  return out;
}

static void locs(const Expr& e, std::set<std::uint64_t>& out) {
  if (e->op == LOp::Loc) out.insert(e->loc);
  for (const auto& k : e->kids) locs(k, out);
}

std::set<std::uint64_t> locations(const Expr& e) {
  std::set<std::uint64_t> out;
  locs(e, out);
  return out;
}

Expr erase(const Expr& e) {
  if (e->op == LOp::Protect) return erase(e->kids[0]);
  if (e->kids.empty()) return e;
  std::shared_ptr<Node> out;
  for (std::size_t i = 0; i < e->kids.size(); ++i) {
    Expr k = erase(e->kids[i]);
    if (k != e->kids[i]) {
      if (!out) out = std::make_shared<Node>(*e);
      out->kids[i] = std::move(k);
    }
  }
  return out ? Expr(out) : e;
}

std::size_t expr_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& k : e->kids) n += expr_size(k);
  return n;
}

const char* gc_policy_name(GcPolicy p) {
  switch (p) {
    case GcPolicy::AtCallGc: return "at-callgc";
    case GcPolicy::Never: return "never";
    case GcPolicy::EveryAlloc: return "every-alloc";
  }
  return "?";
}

std::optional<GcPolicy> parse_gc_policy(const std::string& s) {
  if (s == "at-callgc") return GcPolicy::AtCallGc;
  if (s == "never") return GcPolicy::Never;
  if (s == "every-alloc") return GcPolicy::EveryAlloc;
  return std::nullopt;
}

Config Config::initial(Expr e, GcPolicy policy, bool phantom) {
  Config c;
  c.expr = std::move(e);
  c.policy = policy;
  c.phantom_mode = phantom;
  return c;
}

std::set<std::uint64_t> collect_garbage(Heap& h, const std::set<std::uint64_t>& roots,
                                        const std::set<std::uint64_t>& pinned) {
  std::set<std::uint64_t> marked;
  std::vector<std::uint64_t> work(roots.begin(), roots.end());
  work.insert(work.end(), pinned.begin(), pinned.end());
  for (const auto& [id, cell] : h)
    if (cell.tag == Tag::Manual) work.push_back(id);
  while (!work.empty()) {
    std::uint64_t id = work.back();
    work.pop_back();
    if (!marked.insert(id).second) continue;
    auto it = h.find(id);
    if (it == h.end()) continue;
    for (auto l : locations(it->second.value))
      if (!marked.count(l)) work.push_back(l);
  }
  std::set<std::uint64_t> swept;
  for (auto it = h.begin(); it != h.end();) {
    if (it->second.tag == Tag::Gc && !marked.count(it->first)) {
      swept.insert(it->first);
      it = h.erase(it);
    } else {
      ++it;
    }
  }
  return swept;
}

std::uint64_t fresh_location(const Heap& h) {
  if (h.empty() || h.rbegin()->first + 1 == h.size()) return h.size();
  std::uint64_t id = 0;
  for (const auto& [k, _] : h) {
    if (k != id) break;
    ++id;
  }
  return id;
}

namespace {

struct Cx {
  Config& c;
  StepInfo info;
  std::optional<ErrorCode> failure;
  bool stuck = false;
};

Expr with_kid(const Expr& e, std::size_t i, Expr k) {
  auto n = std::make_shared<Node>(*e);
  n->kids[i] = std::move(k);
  return n;
}

void collect(Cx& cx) {
  Config& c = cx.c;
  auto roots = locations(c.expr);
  if (c.on_collect) {
    GcEvent ev;
    ev.before = c.heap;
    ev.roots = roots;
    ev.pinned = c.pinned;
    collect_garbage(c.heap, roots, c.pinned);
    ev.after = c.heap;
    c.on_collect(ev);
  } else {
    collect_garbage(c.heap, roots, c.pinned);
  }
}

Expr die(Cx& cx, const Expr& at, ErrorCode code) {
  cx.failure = code;
  cx.info.redex = at;
  return fail(code);
}

// Bind a value, minting a phantom flag when the binder is static.
Expr bind(Cx& cx, const Expr& body, const std::string& x, const Expr& v, bool stat) {
  if (cx.c.phantom_mode && stat) {
    std::uint64_t f = cx.c.next_flag++;
    cx.c.phantom.insert(f);
    return subst(body, x, protect(v, f));
  }
  return subst(body, x, v);
}

const std::uint64_t* as_loc(const Expr& e) { return e->op == LOp::Loc ? &e->loc : nullptr; }

// Returns nullptr when e is a value, otherwise the reduct of e.
Expr red(const Expr& e, Cx& cx);

// Reduces the first non-value among the listed children.
Expr congr(const Expr& e, Cx& cx, std::initializer_list<std::size_t> order) {
  for (auto i : order) {
    Expr r = red(e->kids[i], cx);
    if (r) return (cx.failure || cx.stuck) ? r : with_kid(e, i, std::move(r));
  }
  return nullptr;
}

Expr red(const Expr& e, Cx& cx) {
  switch (e->op) {
    case LOp::Unit: case LOp::Int: case LOp::Loc: case LOp::Lam:
      return nullptr;
    case LOp::Pair:
      return congr(e, cx, {0, 1});
    case LOp::Inl: case LOp::Inr:
      return congr(e, cx, {0});
    case LOp::Var: case LOp::Input: case LOp::Hole:
      return die(cx, e, ErrorCode::Type);
    case LOp::Fail:
      return die(cx, e, e->code);
    default:
      break;
  }

  // evaluate operands first
  switch (e->op) {
    case LOp::If: case LOp::Match: case LOp::Let:
    case LOp::Fst: case LOp::Snd: case LOp::Ref: case LOp::Deref:
    case LOp::Alloc: case LOp::Free: case LOp::GcMov: case LOp::Protect:
      if (Expr r = congr(e, cx, {0})) return r;
      break;
    case LOp::App: case LOp::Assign:
      if (Expr r = congr(e, cx, {0, 1})) return r;
      break;
    default:
      break;
  }

  cx.info.redex = e;
  const Expr& a = e->kids.empty() ? e : e->kids[0];
  Config& c = cx.c;
  switch (e->op) {
    case LOp::Fst:
    case LOp::Snd:
      if (a->op != LOp::Pair) return die(cx, e, ErrorCode::Type);
      return a->kids[e->op == LOp::Fst ? 0 : 1];
    case LOp::If:
      if (a->op != LOp::Int) return die(cx, e, ErrorCode::Type);
      return a->n == 0 ? e->kids[1] : e->kids[2];
    case LOp::Match:
      if (a->op == LOp::Inl) return subst(e->kids[1], e->x, a->kids[0]);
      if (a->op == LOp::Inr) return subst(e->kids[2], e->y, a->kids[0]);
      return die(cx, e, ErrorCode::Type);
    case LOp::Let:
      return bind(cx, e->kids[1], e->x, a, e->stat);
    case LOp::App: {
      const Expr& f = e->kids[0];
      if (f->op != LOp::Lam) return die(cx, e, ErrorCode::Type);
      return bind(cx, f->kids[0], f->x, e->kids[1], f->stat);
    }
    case LOp::Ref:
    case LOp::Alloc: {
      if (c.policy == GcPolicy::EveryAlloc) collect(cx);
      std::uint64_t id = fresh_location(c.heap);
      c.heap[id] = Cell{e->op == LOp::Ref ? Tag::Gc : Tag::Manual, a};
      return loc(id);
    }
    case LOp::Deref: {
      auto l = as_loc(a);
      if (!l) return die(cx, e, ErrorCode::Type);
      auto it = c.heap.find(*l);
      if (it == c.heap.end()) return die(cx, e, ErrorCode::Ptr);
      return it->second.value;
    }
    case LOp::Assign: {
      auto l = as_loc(a);
      if (!l) return die(cx, e, ErrorCode::Type);
      auto it = c.heap.find(*l);
      if (it == c.heap.end()) return die(cx, e, ErrorCode::Ptr);
      it->second.value = e->kids[1];
      return unit();
    }
    case LOp::Free: {
      auto l = as_loc(a);
      if (!l) return die(cx, e, ErrorCode::Type);
      auto it = c.heap.find(*l);
      if (it == c.heap.end() || it->second.tag != Tag::Manual) return die(cx, e, ErrorCode::Ptr);
      c.heap.erase(it);
      return unit();
    }
    case LOp::GcMov: {
      auto l = as_loc(a);
      if (!l) return die(cx, e, ErrorCode::Type);
      auto it = c.heap.find(*l);
      if (it == c.heap.end() || it->second.tag != Tag::Manual) return die(cx, e, ErrorCode::Ptr);
      it->second.tag = Tag::Gc;
      return a;
    }
    case LOp::CallGc:
      if (c.policy != GcPolicy::Never) collect(cx);
      return unit();
    case LOp::Protect: {
      if (!c.phantom_mode) return die(cx, e, ErrorCode::Type);
      auto it = c.phantom.find(e->loc);
      if (it == c.phantom.end()) {
        cx.stuck = true;
        return e;
      }
      c.phantom.erase(it);
      cx.info.protect_step = true;
      return a;
    }
    default:
      return die(cx, e, ErrorCode::Type);
  }
}

}  // namespace

StepInfo step(Config& c) {
  if (c.stuck || c.expr->op == LOp::Fail) return {};
  Cx cx{c, {}, std::nullopt, false};
  Expr r = red(c.expr, cx);
  if (!r) return {};
  if (cx.stuck) {
    c.stuck = true;
    cx.info.status = StepStatus::Terminal;
    return cx.info;
  }
  cx.info.status = StepStatus::Stepped;
  if (cx.failure) {
    c.expr = fail(*cx.failure);
    cx.info.failed = true;
  } else {
    c.expr = std::move(r);
  }
  return cx.info;
}

RunResult run(Config c, std::uint64_t fuel, const TraceHook& trace) {
  std::uint64_t k = 0;
  RunResult res;
  while (true) {
    if (c.stuck) {
      res.outcome.kind = Outcome::Kind::Stuck;
      break;
    }
    if (c.expr->op == LOp::Fail) {
      res.outcome.kind = Outcome::Kind::Fail;
      res.outcome.code = c.expr->code;
      break;
    }
    if (is_value(c.expr)) {
      res.outcome.kind = Outcome::Kind::Value;
      res.outcome.value = print_expr(c.expr);
      break;
    }
    if (k == fuel) {
      res.outcome.kind = Outcome::Kind::FuelExhausted;
      break;
    }
    StepInfo info = step(c);
    if (c.stuck) {
      res.outcome.kind = Outcome::Kind::Stuck;
      break;
    }
    if (trace) trace(k, c, info);
    ++k;
  }
  res.outcome.steps = k;
  res.final = std::move(c);
  return res;
}

Heap erase_heap(const Heap& h) {
  Heap out;
  for (const auto& [id, cell] : h) out[id] = Cell{cell.tag, erase(cell.value)};
  return out;
}

namespace {

struct Bij {
  const Heap& ha;
  const Heap& hb;
  std::map<std::uint64_t, std::uint64_t> fwd, bwd;
};

bool veq(const Expr& a, const Expr& b, Bij& bj, Env& env);

bool loc_eq(std::uint64_t la, std::uint64_t lb, Bij& bj) {
  auto f = bj.fwd.find(la);
  auto g = bj.bwd.find(lb);
  if (f != bj.fwd.end() || g != bj.bwd.end())
    return f != bj.fwd.end() && g != bj.bwd.end() && f->second == lb && g->second == la;
  bj.fwd[la] = lb;
  bj.bwd[lb] = la;
  auto ca = bj.ha.find(la);
  auto cb = bj.hb.find(lb);
  if ((ca == bj.ha.end()) != (cb == bj.hb.end())) return false;
  if (ca == bj.ha.end()) return true;
  if (ca->second.tag != cb->second.tag) return false;
  Env env;
  return veq(ca->second.value, cb->second.value, bj, env);
}

bool veq(const Expr& a, const Expr& b, Bij& bj, Env& env) {
  if (a->op == LOp::Loc && b->op == LOp::Loc) return loc_eq(a->loc, b->loc, bj);
  if (!node_head_equal(*a, *b)) return false;
  if (a->op == LOp::Var) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      bool la = it->first == a->x, lb = it->second == b->x;
      if (la || lb) return la && lb;
    }
    return a->x == b->x;
  }
  for (std::size_t i = 0; i < a->kids.size(); ++i) {
    const std::string* ba = binder_for(*a, i);
    const std::string* bb = binder_for(*b, i);
    if (ba) env.emplace_back(*ba, *bb);
    bool ok = veq(a->kids[i], b->kids[i], bj, env);
    if (ba) env.pop_back();
    if (!ok) return false;
  }
  return true;
}

}  // namespace

bool values_equiv(const Expr& a, const Heap& ha, const Expr& b, const Heap& hb) {
  Bij bj{ha, hb, {}, {}};
  Env env;
  return veq(a, b, bj, env);
}

}  // namespace polybridge::lcvm
