#include "polybridge/refpair.hpp"

namespace polybridge::refpair {

using namespace stack;
using interop::Dir;
using interop::hole_name;
using src::Op;

namespace {

Program dup() { return dup_(); }
Program swp() { return swap_(); }

// fails with Conv unless the array on top has at least two elements
Program len_guard() {
  return concat({dup(), {len(), push(Value(std::int64_t{2}))}, swp(), {less(), if0({fail(ErrorCode::Conv)}, {})}});
}

Instr pushn(std::int64_t n) { return push(Value(n)); }

}  // namespace

Registry default_rules() {
  Registry reg(Lang::RefHL, Lang::RefLL);
  using R = interop::Rule<interop::StackTarget>;
  Type b = Type::boolean(), i = Type::integer();

  reg.add(R{"bool-int", b, i, {}, {}, {}, "", nullptr});
  reg.add(R{"refbool-refint", Type::make(TyCon::Ref, {b}), Type::make(TyCon::Ref, {i}), {}, {}, {}, "", nullptr});

  {
    R r;
    r.name = "sum-array";
    r.a = Type::make(TyCon::Sum, {Type::meta("t1"), Type::meta("t2")});
    r.b = Type::make(TyCon::Array, {i});
    r.premises = {{Type::meta("t1"), i}, {Type::meta("t2"), i}};
    Program tag_payload = concat({dup(), {pushn(1), idx()}, swp(), {pushn(0), idx()}, dup()});
    Program rebuild = {lam({"x_v"}, {lam({"x_t"}, {push(array({var("x_t"), var("x_v")}))})})};
    r.glue_ab = concat({tag_payload,
                        {if0(concat({swp(), {hole(hole_name(0, Dir::AtoB))}}),
                             concat({swp(), {hole(hole_name(1, Dir::AtoB))}}))},
                        rebuild});
    r.glue_ba = concat({len_guard(), tag_payload,
                        {if0(concat({swp(), {hole(hole_name(0, Dir::BtoA))}}),
                             concat({dup(), {pushn(-1), add(),
                                             if0(concat({swp(), {hole(hole_name(1, Dir::BtoA))}}),
                                                 {fail(ErrorCode::Conv)})}}))},
                        rebuild});
    reg.add(std::move(r));
  }
  {
    R r;
    r.name = "pair-array";
    r.a = Type::make(TyCon::Prod, {Type::meta("t1"), Type::meta("t2")});
    r.b = Type::make(TyCon::Array, {Type::meta("t")});
    r.premises = {{Type::meta("t1"), Type::meta("t")}, {Type::meta("t2"), Type::meta("t")}};
    Program rebuild = {lam({"x2"}, {lam({"x1"}, {push(array({var("x1"), var("x2")}))})})};
    auto body = [&](Dir d) {
      return concat({dup(), {pushn(0), idx(), hole(hole_name(0, d))}, swp(),
                     {pushn(1), idx(), hole(hole_name(1, d))}, rebuild});
    };
    r.glue_ab = body(Dir::AtoB);
    r.glue_ba = concat({len_guard(), body(Dir::BtoA)});
    reg.add(std::move(r));
  }
  return reg;
}

namespace {

[[noreturn]] void type_error(const src::Expr& e, const std::string& msg) { fail_static("typecheck", e.span, msg); }

void expect(const src::Expr& e, const Type& got, const Type& want, const char* what) {
  if (!type_equal(got, want))
    type_error(e, std::string(what) + ": expected " + print_type(want) + " but found " + print_type(got));
}

Type check(const Registry& reg, src::Expr& e, const Context& ctx);

Type check_hl(const Registry& reg, src::Expr& e, const Context& ctx) {
  auto sub = [&](std::size_t i, const Context& c) { return check(reg, *e.kids[i], c); };
  switch (e.op) {
    case Op::Unit: return Type::unit();
    case Op::True: case Op::False: return Type::boolean();
    case Op::Var: {
      auto it = ctx.hl.find(e.name);
      if (it == ctx.hl.end()) type_error(e, "unbound refhl variable '" + e.name + "'");
      return it->second;
    }
    case Op::Inl: case Op::Inr: {
      if (!e.ann.is(TyCon::Sum)) type_error(e, "injection annotation must be a sum type");
      Type t = sub(0, ctx);
      expect(e, t, e.ann.arg(e.op == Op::Inl ? 0 : 1), "injected value");
      return e.ann;
    }
    case Op::Pair: return Type::make(TyCon::Prod, {sub(0, ctx), sub(1, ctx)});
    case Op::Fst: case Op::Snd: {
      Type t = sub(0, ctx);
      if (!t.is(TyCon::Prod)) type_error(e, "projection from non-pair type " + print_type(t));
      return t.arg(e.op == Op::Fst ? 0 : 1);
    }
    case Op::If: {
      expect(*e.kids[0], sub(0, ctx), Type::boolean(), "if condition");
      Type a = sub(1, ctx), b = sub(2, ctx);
      expect(*e.kids[2], b, a, "else branch");
      return a;
    }
    case Op::Lam: {
      Context inner = ctx;
      inner.hl[e.name] = e.ann;
      return Type::make(TyCon::Arrow, {e.ann, sub(0, inner)});
    }
    case Op::App: {
      Type f = sub(0, ctx);
      if (!f.is(TyCon::Arrow)) type_error(e, "applying a non-function of type " + print_type(f));
      expect(*e.kids[1], sub(1, ctx), f.arg(0), "argument");
      return f.arg(1);
    }
    case Op::Match: {
      Type s = sub(0, ctx);
      if (!s.is(TyCon::Sum)) type_error(e, "match on non-sum type " + print_type(s));
      Context l = ctx, r = ctx;
      l.hl[e.name] = s.arg(0);
      r.hl[e.name2] = s.arg(1);
      Type a = sub(1, l), b = sub(2, r);
      expect(*e.kids[2], b, a, "match branch");
      return a;
    }
    case Op::Ref: return Type::make(TyCon::Ref, {sub(0, ctx)});
    case Op::Deref: {
      Type t = sub(0, ctx);
      if (!t.is(TyCon::Ref)) type_error(e, "dereferencing non-reference type " + print_type(t));
      return t.arg(0);
    }
    case Op::Assign: {
      Type t = sub(0, ctx);
      if (!t.is(TyCon::Ref)) type_error(e, "assigning to non-reference type " + print_type(t));
      expect(*e.kids[1], sub(1, ctx), t.arg(0), "assigned value");
      return Type::unit();
    }
    default:
      type_error(e, std::string("unexpected ") + src::op_name(e.op) + " in refhl");
  }
}

Type check_ll(const Registry& reg, src::Expr& e, const Context& ctx) {
  auto sub = [&](std::size_t i, const Context& c) { return check(reg, *e.kids[i], c); };
  switch (e.op) {
    case Op::Int: return Type::integer();
    case Op::Var: {
      auto it = ctx.ll.find(e.name);
      if (it == ctx.ll.end()) type_error(e, "unbound refll variable '" + e.name + "'");
      return it->second;
    }
    case Op::Array: {
      if (e.kids.empty()) return Type::make(TyCon::Array, {e.ann});
      Type t = sub(0, ctx);
      for (std::size_t i = 1; i < e.kids.size(); ++i) expect(*e.kids[i], sub(i, ctx), t, "array element");
      return Type::make(TyCon::Array, {t});
    }
    case Op::Index: {
      Type a = sub(0, ctx);
      if (!a.is(TyCon::Array)) type_error(e, "indexing non-array type " + print_type(a));
      expect(*e.kids[1], sub(1, ctx), Type::integer(), "index");
      return a.arg(0);
    }
    case Op::Add:
      expect(*e.kids[0], sub(0, ctx), Type::integer(), "left operand of +");
      expect(*e.kids[1], sub(1, ctx), Type::integer(), "right operand of +");
      return Type::integer();
    case Op::If0: {
      expect(*e.kids[0], sub(0, ctx), Type::integer(), "if0 condition");
      Type a = sub(1, ctx), b = sub(2, ctx);
      expect(*e.kids[2], b, a, "else branch");
      return a;
    }
    case Op::Lam: {
      Context inner = ctx;
      inner.ll[e.name] = e.ann;
      return Type::make(TyCon::Arrow, {e.ann, sub(0, inner)});
    }
    case Op::App: {
      Type f = sub(0, ctx);
      if (!f.is(TyCon::Arrow)) type_error(e, "applying a non-function of type " + print_type(f));
      expect(*e.kids[1], sub(1, ctx), f.arg(0), "argument");
      return f.arg(1);
    }
    case Op::Ref: return Type::make(TyCon::Ref, {sub(0, ctx)});
    case Op::Deref: {
      Type t = sub(0, ctx);
      if (!t.is(TyCon::Ref)) type_error(e, "dereferencing non-reference type " + print_type(t));
      return t.arg(0);
    }
    case Op::Assign: {
      Type t = sub(0, ctx);
      if (!t.is(TyCon::Ref)) type_error(e, "assigning to non-reference type " + print_type(t));
      expect(*e.kids[1], sub(1, ctx), t.arg(0), "assigned value");
      return Type::integer();
    }
    default:
      type_error(e, std::string("unexpected ") + src::op_name(e.op) + " in refll");
  }
}

Type check(const Registry& reg, src::Expr& e, const Context& ctx) {
  Type t;
  if (e.op == Op::Boundary) {
    src::Expr& inner = *e.kids[0];
    Type it = check(reg, inner, ctx);
    Dir d;
    auto res = interop::check_boundary(reg, e.lang, e.ann, it, d);
    if (!res) fail_static("convert", e.span, res.err.reason, res.err.trail);
    t = e.ann;
  } else if (e.lang == Lang::RefHL) {
    t = check_hl(reg, e, ctx);
  } else if (e.lang == Lang::RefLL) {
    t = check_ll(reg, e, ctx);
  } else {
    type_error(e, std::string(lang_name(e.lang)) + " code cannot appear in the ref pair");
  }
  e.ty = t;
  return t;
}

// ---------------- compiler ----------------

Program comp(const Registry& reg, const src::Expr& e, FreshSupply& fs);

Program pair_of(const std::vector<Program>& parts, FreshSupply& fs) {
  // e1+, .., en+, lam xn .. x1.(push [x1 .. xn])
  Program out;
  for (const auto& p : parts) append(out, p);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < parts.size(); ++i) names.push_back(fs.fresh("x" + std::to_string(i + 1)));
  std::vector<Value> elems;
  for (const auto& n : names) elems.push_back(var(n));
  std::vector<std::string> params(names.rbegin(), names.rend());
  out.push_back(lam(std::move(params), {push(array(std::move(elems)))}));
  return out;
}

Program comp(const Registry& reg, const src::Expr& e, FreshSupply& fs) {
  auto k = [&](std::size_t i) { return comp(reg, *e.kids[i], fs); };
  switch (e.op) {
    case Op::Unit: return {pushn(0)};
    case Op::True: return {pushn(0)};
    case Op::False: return {pushn(1)};
    case Op::Int: return {pushn(e.num)};
    case Op::Var: return {push(var(e.name))};
    case Op::Inl:
    case Op::Inr: {
      Program out = k(0);
      std::string x = fs.fresh("x");
      out.push_back(lam({x}, {push(array({Value(std::int64_t{e.op == Op::Inl ? 0 : 1}), var(x)}))}));
      return out;
    }
    case Op::If:
    case Op::If0: {
      Program out = k(0);
      Program t = k(1);
      out.push_back(if0(std::move(t), k(2)));
      return out;
    }
    case Op::Match: {
      Program out = k(0);
      append(out, concat({dup(), {pushn(1), idx()}, swp(), {pushn(0), idx()}}));
      Program l = k(1);
      Program r = k(2);
      out.push_back(if0({lam({e.name}, std::move(l))}, {lam({e.name2}, std::move(r))}));
      return out;
    }
    case Op::Pair: {
      Program a = k(0);
      Program b = k(1);
      return pair_of({a, b}, fs);
    }
    case Op::Array: {
      std::vector<Program> parts;
      for (std::size_t i = 0; i < e.kids.size(); ++i) parts.push_back(k(i));
      if (parts.empty()) return {push(array({}))};
      return pair_of(parts, fs);
    }
    case Op::Fst:
    case Op::Snd: {
      Program out = k(0);
      out.push_back(pushn(e.op == Op::Fst ? 0 : 1));
      out.push_back(idx());
      return out;
    }
    case Op::Index: {
      Program out = k(0);
      append(out, k(1));
      out.push_back(idx());
      return out;
    }
    case Op::Add: {
      Program out = k(0);
      append(out, k(1));
      append(out, swp());
      out.push_back(add());
      return out;
    }
    case Op::Lam: return {push(thunk({lam({e.name}, k(0))}))};
    case Op::App: {
      Program out = k(0);
      append(out, k(1));
      append(out, swp());
      out.push_back(call());
      return out;
    }
    case Op::Ref: {
      Program out = k(0);
      out.push_back(alloc());
      return out;
    }
    case Op::Deref: {
      Program out = k(0);
      out.push_back(read());
      return out;
    }
    case Op::Assign: {
      Program out = k(0);
      append(out, k(1));
      out.push_back(write());
      out.push_back(pushn(0));
      return out;
    }
    case Op::Boundary: {
      Program out = k(0);
      append(out, boundary_glue(reg, e.lang, e.ann, e.kids[0]->ty, fs));
      return out;
    }
    default:
      fail_static("compile", e.span, std::string("cannot compile ") + src::op_name(e.op));
  }
}

}  // namespace

Type typecheck(const Registry& reg, src::Expr& e, const Context& ctx) { return check(reg, e, ctx); }

Program compile(const Registry& reg, const src::Expr& e, FreshSupply& fs) { return comp(reg, e, fs); }

Program boundary_glue(const Registry& reg, Lang host, const Type& host_type, const Type& inner, FreshSupply& fs) {
  Dir d;
  auto res = interop::check_boundary(reg, host, host_type, inner, d);
  if (!res) fail_static("convert", {}, res.err.reason, res.err.trail);
  return res.ok->emit(d, fs);
}

}  // namespace polybridge::refpair
