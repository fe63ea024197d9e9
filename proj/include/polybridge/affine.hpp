#pragma once

#include <map>
#include <set>
#include <string>

#include "polybridge/lcvm.hpp"
#include "polybridge/registry.hpp"
#include "polybridge/syntax.hpp"

namespace polybridge::affine {

using Registry = interop::Registry<interop::LcvmTarget>;

// unit ~ unit, bool ~ int, t1 * t2 ~ t1 * t2, t1 -o t2 ~ (unit -> t1) -> t2
Registry default_rules();

struct AffineBinding {
  Type type;
  src::Mode mode = src::Mode::Dyn;
  int id = 0;
};

struct Context {
  std::set<std::string> tyvars;                  // MiniML type variables
  std::map<std::string, Type> ml;                // MiniML variables
  std::map<std::string, Type> affi;              // Affi unrestricted variables
  std::map<std::string, AffineBinding> affine;   // Affi affine variables
};

// Checks an Affi or MiniML term (by its lang tag), annotating each node's
// ty.  Affi variables written without a mode are resolved to the mode of
// their binder.
Type typecheck(const Registry& reg, src::Expr& e, const Context& ctx = {});

// Compiles a checked term to LCVM.
lcvm::Expr compile(const Registry& reg, const src::Expr& e, FreshSupply& fs);

// Administrative simplification applied after compiling: a let whose bound
// expression is a value is inlined, and so is a let whose variable is used
// once, not under a lambda, as the first thing its body evaluates.
lcvm::Expr simplify(const lcvm::Expr& e);

// Conversion glue around `input` at a boundary with host type host_type
// whose inner term has type inner.
lcvm::Expr boundary_glue(const Registry& reg, Lang host, const Type& host_type, const Type& inner,
                         const lcvm::Expr& input, FreshSupply& fs);

}  // namespace polybridge::affine
