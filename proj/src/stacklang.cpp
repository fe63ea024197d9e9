#include "polybridge/stacklang.hpp"

#include <stdexcept>

namespace polybridge::stack {

Value array(std::vector<Value> elems) {
  return Value(ArrayVal{std::make_shared<const std::vector<Value>>(std::move(elems))});
}
Value var(const std::string& name) { return Value(VarRef{name}); }
Value thunk(Program body) { return Value(Thunk{std::make_shared<const Program>(std::move(body))}); }

static ProgramPtr share(Program p) { return std::make_shared<const Program>(std::move(p)); }

Instr push(Value v) {
  Instr i;
  i.op = Op::Push;
  i.value = std::move(v);
  return i;
}
static Instr simple(Op op) {
  Instr i;
  i.op = op;
  return i;
}
Instr add() { return simple(Op::Add); }
Instr less() { return simple(Op::Less); }
Instr call() { return simple(Op::Call); }
Instr idx() { return simple(Op::Idx); }
Instr len() { return simple(Op::Len); }
Instr alloc() { return simple(Op::Alloc); }
Instr read() { return simple(Op::Read); }
Instr write() { return simple(Op::Write); }
Instr if0(Program zero, Program nonzero) {
  Instr i = simple(Op::If0);
  i.body = share(std::move(zero));
  i.alt = share(std::move(nonzero));
  return i;
}
Instr lam(std::vector<std::string> params, Program body) {
  Instr i = simple(Op::Lam);
  i.params = std::move(params);
  i.body = share(std::move(body));
  return i;
}
Instr fail(ErrorCode c) {
  Instr i = simple(Op::Fail);
  i.code = c;
  return i;
}
Instr hole(const std::string& name) {
  Instr i = simple(Op::Hole);
  i.hole = name;
  return i;
}

Program swap_() { return {lam({"x"}, {lam({"y"}, {push(var("x")), push(var("y"))})})}; }
Program drop_() { return {lam({"x"}, {})}; }
Program dup_() { return {lam({"x"}, {push(var("x")), push(var("x"))})}; }

void append(Program& a, const Program& b) { a.insert(a.end(), b.begin(), b.end()); }

Program concat(std::initializer_list<Program> parts) {
  Program out;
  for (const auto& p : parts) append(out, p);
  return out;
}

bool operator==(const Value& a, const Value& b) {
  if (a.v.index() != b.v.index()) return false;
  if (auto n = a.as_int()) return *n == *b.as_int();
  if (auto l = a.as_loc()) return l->id == b.as_loc()->id;
  if (auto r = a.as_var()) return r->name == b.as_var()->name;
  if (auto t = a.as_thunk()) return programs_equal(*t->body, *b.as_thunk()->body);
  const auto& ea = *a.as_array()->elems;
  const auto& eb = *b.as_array()->elems;
  return ea == eb;
}

bool operator==(const Instr& a, const Instr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Push: return a.value == b.value;
    case Op::Lam: return a.params == b.params && programs_equal(*a.body, *b.body);
    case Op::If0: return programs_equal(*a.body, *b.body) && programs_equal(*a.alt, *b.alt);
    case Op::Fail: return a.code == b.code;
    case Op::Hole: return a.hole == b.hole;
    default: return true;
  }
}

bool programs_equal(const Program& a, const Program& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

// ---- substitution ----

using Smap = std::map<std::string, Value>;

static std::optional<Program> subst_opt(const Program& p, const Smap& s);

static std::optional<Value> subst_value(const Value& v, const Smap& s) {
  if (auto r = v.as_var()) {
    auto it = s.find(r->name);
    if (it != s.end()) return it->second;
    return std::nullopt;
  }
  if (auto t = v.as_thunk()) {
    auto np = subst_opt(*t->body, s);
    if (!np) return std::nullopt;
    return Value(Thunk{share(std::move(*np))});
  }
  if (auto a = v.as_array()) {
    std::optional<std::vector<Value>> out;
    const auto& es = *a->elems;
    for (std::size_t i = 0; i < es.size(); ++i) {
      auto nv = subst_value(es[i], s);
      if (nv && !out) out.emplace(es.begin(), es.begin() + i);
      if (out) out->push_back(nv ? *nv : es[i]);
    }
    if (!out) return std::nullopt;
    return array(std::move(*out));
  }
  return std::nullopt;
}

static ProgramPtr subst_ptr(const ProgramPtr& p, const Smap& s, bool& changed) {
  auto np = subst_opt(*p, s);
  if (!np) return p;
  changed = true;
  return share(std::move(*np));
}

static std::optional<Instr> subst_instr(const Instr& in, const Smap& s) {
  switch (in.op) {
    case Op::Push: {
      auto nv = subst_value(in.value, s);
      if (!nv) return std::nullopt;
      return push(std::move(*nv));
    }
    case Op::If0: {
      bool changed = false;
      Instr out = in;
      out.body = subst_ptr(in.body, s, changed);
      out.alt = subst_ptr(in.alt, s, changed);
      if (!changed) return std::nullopt;
      return out;
    }
    case Op::Lam: {
      bool shadows = false;
      for (const auto& x : in.params)
        if (s.count(x)) shadows = true;
      bool changed = false;
      Instr out = in;
      if (shadows) {
        Smap inner = s;
        for (const auto& x : in.params) inner.erase(x);
        if (inner.empty()) return std::nullopt;
        out.body = subst_ptr(in.body, inner, changed);
      } else {
        out.body = subst_ptr(in.body, s, changed);
      }
      if (!changed) return std::nullopt;
      return out;
    }
    default:
      return std::nullopt;
  }
}

static std::optional<Program> subst_opt(const Program& p, const Smap& s) {
  std::optional<Program> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto ni = subst_instr(p[i], s);
    if (ni && !out) out.emplace(p.begin(), p.begin() + i);
    if (out) out->push_back(ni ? std::move(*ni) : p[i]);
  }
  return out;
}

Program subst(const Program& p, const Smap& s) {
  auto r = subst_opt(p, s);
  return r ? std::move(*r) : p;
}

// ---- machine ----

Config Config::initial(Program p) {
  Config c;
  if (!p.empty()) c.program.push_back(Frame{share(std::move(p)), 0});
  return c;
}

bool Config::program_empty() const {
  for (const auto& f : program)
    if (f.pc < f.prog->size()) return false;
  return true;
}

const Instr* Config::next_instr() const {
  for (auto it = program.rbegin(); it != program.rend(); ++it)
    if (it->pc < it->prog->size()) return &(*it->prog)[it->pc];
  return nullptr;
}

Program Config::remaining() const {
  Program out;
  for (auto it = program.rbegin(); it != program.rend(); ++it)
    for (std::size_t i = it->pc; i < it->prog->size(); ++i) out.push_back((*it->prog)[i]);
  return out;
}

static bool has_unbound(const Value& v) {
  if (v.as_var()) return true;
  if (auto a = v.as_array())
    for (const auto& e : *a->elems)
      if (has_unbound(e)) return true;
  return false;
}

static std::uint64_t fresh_loc(const Heap& h) {
  if (h.empty() || h.rbegin()->first + 1 == h.size()) return h.size();
  std::uint64_t id = 0;
  for (const auto& [k, _] : h) {
    if (k != id) break;
    ++id;
  }
  return id;
}

StepStatus step(Config& c) {
  if (c.failed) return StepStatus::Terminal;
  while (!c.program.empty() && c.program.back().pc >= c.program.back().prog->size()) c.program.pop_back();
  if (c.program.empty()) return StepStatus::Terminal;

  ProgramPtr hold = c.program.back().prog;
  const Instr& in = (*hold)[c.program.back().pc++];
  auto& S = c.stack;

  auto die = [&](ErrorCode e) {
    c.failed = e;
    c.stack.clear();
    c.program.clear();
    return StepStatus::Stepped;
  };
  auto prepend = [&](const ProgramPtr& p) {
    if (!p->empty()) c.program.push_back(Frame{p, 0});
  };

  switch (in.op) {
    case Op::Push:
      if (has_unbound(in.value)) return die(ErrorCode::Type);
      S.push_back(in.value);
      break;
    case Op::Add: {
      if (S.size() < 2) return die(ErrorCode::Type);
      auto n = S[S.size() - 1].as_int();
      auto m = S[S.size() - 2].as_int();
      if (!n || !m) return die(ErrorCode::Type);
      std::int64_t r = static_cast<std::int64_t>(static_cast<std::uint64_t>(*n) + static_cast<std::uint64_t>(*m));
      S.pop_back();
      S.back() = Value(r);
      break;
    }
    case Op::Less: {
      if (S.size() < 2) return die(ErrorCode::Type);
      auto n = S[S.size() - 1].as_int();   // top
      auto m = S[S.size() - 2].as_int();   // n'
      if (!n || !m) return die(ErrorCode::Type);
      std::int64_t b = *n < *m ? 0 : 1;
      S.pop_back();
      S.back() = Value(b);
      break;
    }
    case Op::If0: {
      if (S.empty()) return die(ErrorCode::Type);
      auto n = S.back().as_int();
      if (!n) return die(ErrorCode::Type);
      bool zero = *n == 0;
      S.pop_back();
      prepend(zero ? in.body : in.alt);
      break;
    }
    case Op::Lam: {
      if (S.size() < in.params.size()) return die(ErrorCode::Type);
      Smap s;
      // later parameters shadow earlier ones, as with nested lams
      for (const auto& x : in.params) {
        s[x] = S.back();
        S.pop_back();
      }
      auto body = subst_opt(*in.body, s);
      prepend(body ? share(std::move(*body)) : in.body);
      break;
    }
    case Op::Call: {
      if (S.empty()) return die(ErrorCode::Type);
      auto t = S.back().as_thunk();
      if (!t) return die(ErrorCode::Type);
      ProgramPtr body = t->body;
      S.pop_back();
      prepend(body);
      break;
    }
    case Op::Idx: {
      if (S.size() < 2) return die(ErrorCode::Type);
      auto n = S[S.size() - 1].as_int();
      auto a = S[S.size() - 2].as_array();
      if (!n || !a) return die(ErrorCode::Type);
      const auto& es = *a->elems;
      if (*n < 0 || static_cast<std::uint64_t>(*n) >= es.size()) return die(ErrorCode::Idx);
      Value v = es[static_cast<std::size_t>(*n)];
      S.pop_back();
      S.back() = std::move(v);
      break;
    }
    case Op::Len: {
      if (S.empty()) return die(ErrorCode::Type);
      auto a = S.back().as_array();
      if (!a) return die(ErrorCode::Type);
      S.back() = Value(static_cast<std::int64_t>(a->elems->size()));
      break;
    }
    case Op::Alloc: {
      if (S.empty()) return die(ErrorCode::Type);
      std::uint64_t id = fresh_loc(c.heap);
      c.heap[id] = S.back();
      S.back() = Value(Loc{id});
      break;
    }
    case Op::Read: {
      if (S.empty()) return die(ErrorCode::Type);
      auto l = S.back().as_loc();
      if (!l) return die(ErrorCode::Type);
      auto it = c.heap.find(l->id);
      if (it == c.heap.end()) return die(ErrorCode::Type);
      S.back() = it->second;
      break;
    }
    case Op::Write: {
      if (S.size() < 2) return die(ErrorCode::Type);
      auto l = S[S.size() - 2].as_loc();
      if (!l) return die(ErrorCode::Type);
      auto it = c.heap.find(l->id);
      if (it == c.heap.end()) return die(ErrorCode::Type);
      it->second = S.back();
      S.pop_back();
      S.pop_back();
      break;
    }
    case Op::Fail:
      return die(in.code);
    case Op::Hole:
      return die(ErrorCode::Type);
  }
  return StepStatus::Stepped;
}

std::optional<Config> step_copy(const Config& c) {
  Config d = c;
  if (step(d) == StepStatus::Terminal) return std::nullopt;
  return d;
}

static RunResult finish(Config c, std::uint64_t steps) {
  RunResult r;
  r.outcome.steps = steps;
  if (c.failed) {
    r.outcome.kind = Outcome::Kind::Fail;
    r.outcome.code = *c.failed;
  } else if (c.stack.empty()) {
    // an empty program with nothing on the stack produced no value
    r.outcome.kind = Outcome::Kind::Fail;
    r.outcome.code = ErrorCode::Type;
  } else {
    r.outcome.kind = Outcome::Kind::Value;
    r.value = c.stack.back();
    r.outcome.value = print_value(*r.value);
    r.residual.assign(c.stack.begin(), c.stack.end() - 1);
  }
  r.final = std::move(c);
  return r;
}

RunResult run(Config c, std::uint64_t fuel, const TraceHook& trace) {
  std::uint64_t k = 0;
  while (true) {
    if (c.failed || c.program_empty()) return finish(std::move(c), k);
    if (k == fuel) {
      RunResult r;
      r.outcome.kind = Outcome::Kind::FuelExhausted;
      r.outcome.steps = k;
      r.final = std::move(c);
      return r;
    }
    if (trace) trace(k, c, *c.next_instr());
    step(c);
    ++k;
  }
}

RunResult run(const Program& p, std::uint64_t fuel) { return run(Config::initial(p), fuel); }

bool heaps_equal(const Heap& a, const Heap& b) { return a == b; }

}  // namespace polybridge::stack
