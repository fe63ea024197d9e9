#include "polybridge/registry.hpp"

#include <stdexcept>

namespace polybridge::interop {

std::string hole_name(std::size_t premise, Dir d) {
  return std::to_string(premise) + (d == Dir::AtoB ? ".ab" : ".ba");
}

static std::pair<std::size_t, Dir> parse_hole(const std::string& h) {
  auto dot = h.find('.');
  if (dot == std::string::npos) throw std::logic_error("bad hole name " + h);
  std::size_t i = std::stoul(h.substr(0, dot));
  return {i, h.substr(dot + 1) == "ab" ? Dir::AtoB : Dir::BtoA};
}

// ---- StackLang glue ----

namespace {

using Renames = std::vector<std::pair<std::string, std::string>>;

std::string lookup(const Renames& env, const std::string& x) {
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == x) return it->second;
  return x;
}

stack::Program inst_prog(const stack::Program& p, Renames& env, const StackTarget::Fill& fill, FreshSupply& fs);

stack::Value inst_value(const stack::Value& v, Renames& env, const StackTarget::Fill& fill, FreshSupply& fs) {
  if (auto r = v.as_var()) return stack::var(lookup(env, r->name));
  if (auto a = v.as_array()) {
    std::vector<stack::Value> es;
    for (const auto& e : *a->elems) es.push_back(inst_value(e, env, fill, fs));
    return stack::array(std::move(es));
  }
  if (auto t = v.as_thunk()) return stack::thunk(inst_prog(*t->body, env, fill, fs));
  return v;
}

stack::Program inst_prog(const stack::Program& p, Renames& env, const StackTarget::Fill& fill, FreshSupply& fs) {
  stack::Program out;
  for (const auto& in : p) {
    switch (in.op) {
      case stack::Op::Hole:
        stack::append(out, fill(in.hole, nullptr));
        break;
      case stack::Op::Push:
        out.push_back(stack::push(inst_value(in.value, env, fill, fs)));
        break;
      case stack::Op::If0:
        out.push_back(stack::if0(inst_prog(*in.body, env, fill, fs), inst_prog(*in.alt, env, fill, fs)));
        break;
      case stack::Op::Lam: {
        std::vector<std::string> ps;
        for (const auto& x : in.params) {
          ps.push_back(fs.fresh(x));
          env.emplace_back(x, ps.back());
        }
        stack::Program body = inst_prog(*in.body, env, fill, fs);
        env.resize(env.size() - in.params.size());
        out.push_back(stack::lam(std::move(ps), std::move(body)));
        break;
      }
      default:
        out.push_back(in);
    }
  }
  return out;
}

bool prog_has_holes(const stack::Program& p);

bool value_has_holes(const stack::Value& v) {
  if (auto a = v.as_array())
    for (const auto& e : *a->elems)
      if (value_has_holes(e)) return true;
  if (auto t = v.as_thunk()) return prog_has_holes(*t->body);
  return false;
}

bool prog_has_holes(const stack::Program& p) {
  for (const auto& in : p) {
    if (in.op == stack::Op::Hole) return true;
    if (in.op == stack::Op::Push && value_has_holes(in.value)) return true;
    if (in.body && prog_has_holes(*in.body)) return true;
    if (in.alt && prog_has_holes(*in.alt)) return true;
  }
  return false;
}

}  // namespace

stack::Program StackTarget::instantiate(const Code& tmpl, const Code*, const Fill& fill, FreshSupply& fs) {
  Renames env;
  return inst_prog(tmpl, env, fill, fs);
}

bool StackTarget::has_holes(const Code& c) { return prog_has_holes(c); }

std::string StackTarget::print(const Code& c) { return stack::print_program_inline(c); }

// ---- LCVM glue ----

namespace {

lcvm::Expr inst_expr(const lcvm::Expr& e, Renames& env, const lcvm::Expr* input, const LcvmTarget::Fill& fill,
                     FreshSupply& fs) {
  using lcvm::LOp;
  switch (e->op) {
    case LOp::Var: return lcvm::var(lookup(env, e->x));
    case LOp::Input: return input ? *input : e;
    case LOp::Hole: {
      lcvm::Expr arg = inst_expr(e->kids[0], env, input, fill, fs);
      return fill(e->x, &arg);
    }
    default: break;
  }
  auto n = std::make_shared<lcvm::Node>(*e);
  auto fresh = [&](const std::string& x) { return x == "_" ? x : fs.fresh(x); };
  switch (e->op) {
    case LOp::Let: {
      n->kids[0] = inst_expr(e->kids[0], env, input, fill, fs);
      n->x = fresh(e->x);
      env.emplace_back(e->x, n->x);
      n->kids[1] = inst_expr(e->kids[1], env, input, fill, fs);
      env.pop_back();
      return n;
    }
    case LOp::Lam: {
      n->x = fresh(e->x);
      env.emplace_back(e->x, n->x);
      n->kids[0] = inst_expr(e->kids[0], env, input, fill, fs);
      env.pop_back();
      return n;
    }
    case LOp::Match: {
      n->kids[0] = inst_expr(e->kids[0], env, input, fill, fs);
      n->x = fresh(e->x);
      env.emplace_back(e->x, n->x);
      n->kids[1] = inst_expr(e->kids[1], env, input, fill, fs);
      env.pop_back();
      n->y = fresh(e->y);
      env.emplace_back(e->y, n->y);
      n->kids[2] = inst_expr(e->kids[2], env, input, fill, fs);
      env.pop_back();
      return n;
    }
    default:
      for (auto& k : n->kids) k = inst_expr(k, env, input, fill, fs);
      return n;
  }
}

bool expr_has_holes(const lcvm::Expr& e) {
  if (e->op == lcvm::LOp::Hole) return true;
  for (const auto& k : e->kids)
    if (expr_has_holes(k)) return true;
  return false;
}

}  // namespace

lcvm::Expr LcvmTarget::instantiate(const Code& tmpl, const Code* input, const Fill& fill, FreshSupply& fs) {
  Renames env;
  return inst_expr(tmpl, env, input, fill, fs);
}

bool LcvmTarget::has_holes(const Code& c) { return expr_has_holes(c); }

std::string LcvmTarget::print(const Code& c) { return lcvm::print_expr(c); }

// ---- derivations ----

template <class Target>
typename Target::Code Derivation<Target>::emit(Dir d, FreshSupply& fs, const typename Target::Code* input) const {
  const auto& tmpl = d == Dir::AtoB ? rule->glue_ab : rule->glue_ba;
  typename Target::Fill fill = [&](const std::string& h, const typename Target::Code* arg) {
    auto [i, dir] = parse_hole(h);
    if (i >= children.size()) throw std::logic_error("glue hole without premise: " + h);
    return children[i].emit(dir, fs, arg);
  };
  return Target::instantiate(tmpl, input, fill, fs);
}

template <class Target>
void Registry<Target>::add(Rule<Target> r) {
  auto p = std::make_shared<const Rule<Target>>(std::move(r));
  for (auto& existing : rules_) {
    if (type_equal(existing->a, p->a) && type_equal(existing->b, p->b)) {
      existing = p;
      return;
    }
  }
  rules_.push_back(std::move(p));
}

static std::string pair_text(const Type& a, const Type& b) { return print_type(a) + " ~ " + print_type(b); }

template <class Target>
static DeriveResult<Target> derive_rec(const Registry<Target>& reg, const Type& a, const Type& b, int depth) {
  DeriveResult<Target> res;
  res.err.a = a;
  res.err.b = b;
  if (depth > 64) {
    res.err.reason = "derivation too deep";
    res.err.trail.push_back(pair_text(a, b));
    return res;
  }
  std::string side_failed;
  const auto& rules = reg.rules();
  for (auto it = rules.rbegin(); it != rules.rend(); ++it) {
    const auto& r = *it;
    TypeBindings bind;
    if (!match_type(r->a, a, bind) || !match_type(r->b, b, bind)) continue;
    if (r->side && !r->side(bind)) {
      side_failed = r->side_label;
      continue;
    }
    Derivation<Target> d;
    d.rule = r;
    d.a = a;
    d.b = b;
    d.bindings = bind;
    for (const auto& p : r->premises) {
      auto child = derive_rec(reg, instantiate_pattern(p.a, bind), instantiate_pattern(p.b, bind), depth + 1);
      if (!child) {
        child.err.trail.insert(child.err.trail.begin(), pair_text(a, b));
        child.err.a = a;
        child.err.b = b;
        return child;
      }
      d.children.push_back(std::move(*child.ok));
    }
    FreshSupply fs0;
    d.glue_ab = d.emit(Dir::AtoB, fs0);
    FreshSupply fs1;
    d.glue_ba = d.emit(Dir::BtoA, fs1);
    res.ok = std::move(d);
    return res;
  }
  res.err.reason = side_failed.empty() ? "no conversion rule relates " + pair_text(a, b)
                                       : pair_text(a, b) + " requires " + side_failed;
  res.err.trail.push_back(pair_text(a, b));
  return res;
}

template <class Target>
DeriveResult<Target> derive(const Registry<Target>& reg, const Type& a, const Type& b) {
  Type na = reg.normalize_a ? reg.normalize_a(a) : a;
  Type nb = reg.normalize_b ? reg.normalize_b(b) : b;
  return derive_rec(reg, na, nb, 0);
}

template <class Target>
DeriveResult<Target> check_boundary(const Registry<Target>& reg, Lang host, const Type& host_type,
                                    const Type& foreign_type, Dir& dir_out) {
  if (host == reg.lang_a) {
    dir_out = Dir::BtoA;
    return derive(reg, host_type, foreign_type);
  }
  dir_out = Dir::AtoB;
  return derive(reg, foreign_type, host_type);
}

template <class Target>
std::vector<std::string> describe_rules(const Registry<Target>& reg, bool with_glue) {
  std::vector<std::string> out;
  for (const auto& r : reg.rules()) {
    std::string line = r->name + ": " + pair_text(r->a, r->b);
    if (!r->premises.empty()) {
      line += "  if ";
      for (std::size_t i = 0; i < r->premises.size(); ++i) {
        if (i) line += ", ";
        line += pair_text(r->premises[i].a, r->premises[i].b);
      }
    }
    if (!r->side_label.empty()) line += "  [" + r->side_label + "]";
    out.push_back(line);
    if (with_glue) {
      out.push_back("  " + std::string(lang_name(reg.lang_a)) + " -> " + lang_name(reg.lang_b) + ": " +
                    Target::print(r->glue_ab));
      out.push_back("  " + std::string(lang_name(reg.lang_b)) + " -> " + lang_name(reg.lang_a) + ": " +
                    Target::print(r->glue_ba));
    }
  }
  return out;
}

template struct Derivation<StackTarget>;
template struct Derivation<LcvmTarget>;
template class Registry<StackTarget>;
template class Registry<LcvmTarget>;
template DeriveResult<StackTarget> derive(const Registry<StackTarget>&, const Type&, const Type&);
template DeriveResult<LcvmTarget> derive(const Registry<LcvmTarget>&, const Type&, const Type&);
template DeriveResult<StackTarget> check_boundary(const Registry<StackTarget>&, Lang, const Type&, const Type&,
                                                  Dir&);
template DeriveResult<LcvmTarget> check_boundary(const Registry<LcvmTarget>&, Lang, const Type&, const Type&,
                                                 Dir&);
template std::vector<std::string> describe_rules(const Registry<StackTarget>&, bool);
template std::vector<std::string> describe_rules(const Registry<LcvmTarget>&, bool);

}  // namespace polybridge::interop
