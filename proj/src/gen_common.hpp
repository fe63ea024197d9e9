#pragma once

// Shared plumbing for the per-pair term generators.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "polybridge/registry.hpp"
#include "polybridge/syntax.hpp"
#include "polybridge/testkit.hpp"

namespace polybridge::testkit::detail {

// Only raw engine output is used so sequences agree across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  int below(std::size_t n) { return n <= 1 ? 0 : static_cast<int>(g_() % n); }
  bool chance(double p) { return static_cast<double>(g_() >> 11) * 0x1.0p-53 < p; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(v.size()))];
  }

 private:
  std::mt19937_64 g_;
};

// Deals a node budget out to `parts` children.
inline std::vector<int> split(Rng& rng, int budget, int parts) {
  std::vector<int> out(static_cast<std::size_t>(parts), 0);
  for (int i = 0; i < budget; ++i) ++out[static_cast<std::size_t>(rng.below(static_cast<std::size_t>(parts)))];
  return out;
}

using src::ExprPtr;
using src::Op;

inline ExprPtr node(Lang l, Op op, std::vector<ExprPtr> kids = {}) { return src::make(l, op, std::move(kids)); }

inline ExprPtr named(Lang l, Op op, const std::string& name, std::vector<ExprPtr> kids = {}) {
  auto e = node(l, op, std::move(kids));
  e->name = name;
  return e;
}

inline ExprPtr annotated(Lang l, Op op, const Type& t, std::vector<ExprPtr> kids = {}) {
  auto e = node(l, op, std::move(kids));
  e->ann = t;
  return e;
}

inline ExprPtr lam(Lang l, const std::string& x, const Type& t, ExprPtr body, src::Mode m = src::Mode::Dyn) {
  auto e = annotated(l, Op::Lam, t, {std::move(body)});
  e->name = x;
  e->mode = m;
  return e;
}

inline ExprPtr boundary(Lang host, const Type& host_type, ExprPtr inner) {
  return annotated(host, Op::Boundary, host_type, {std::move(inner)});
}

inline Type ty(TyCon c, std::vector<Type> args = {}, std::string name = {}) {
  return Type::make(c, std::move(args), std::move(name));
}

// Foreign types σ from `candidates` for which host<< e : σ >> : host_type
// is accepted, memoized per host type.
template <class Target>
class PartnerTable {
 public:
  PartnerTable(const interop::Registry<Target>& reg, Lang host, std::vector<Type> candidates)
      : reg_(reg), host_(host), candidates_(std::move(candidates)) {}

  const std::vector<Type>& of(const Type& host_type) {
    std::string key = print_type(host_type);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<Type> out;
    for (const auto& c : candidates_) {
      interop::Dir dir;
      if (interop::check_boundary(reg_, host_, host_type, c, dir)) out.push_back(c);
    }
    return cache_.emplace(key, std::move(out)).first->second;
  }

 private:
  const interop::Registry<Target>& reg_;
  Lang host_;
  std::vector<Type> candidates_;
  std::map<std::string, std::vector<Type>> cache_;
};

// Closes a set of leaf types under the given constructors up to depth.
std::vector<Type> enumerate_types(const std::vector<Type>& leaves, const std::vector<TyCon>& unary,
                                  const std::vector<TyCon>& binary, int depth);

ExprPtr gen_ref(Rng& rng, const GenConfig& cfg);
ExprPtr gen_affine(Rng& rng, const GenConfig& cfg);
ExprPtr gen_gclinear(Rng& rng, const GenConfig& cfg);

}  // namespace polybridge::testkit::detail
