#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "polybridge/lcvm.hpp"
#include "polybridge/registry.hpp"
#include "polybridge/syntax.hpp"

namespace polybridge::gclinear {

using Registry = interop::Registry<interop::LcvmTarget>;

// exists z. Cap z t * !Ptr z ~ ref t, t ~ foreign<t> for Duplicable t,
// bool ~ forall a. a -> a -> a
Registry default_rules();

// The package type produced by new and taken by free.
Type ref_package(const Type& payload, const std::string& loc = "z");

// Variables given here are treated as unrestricted.
struct Context {
  std::set<std::string> locvars;       // L3 location variables
  std::set<std::string> tyvars;        // MiniML type variables
  std::map<std::string, Type> l3;      // L3 variables
  std::map<std::string, Type> ml;      // MiniML variables
};

// One entry per linear L3 binder seen while checking.
struct LinearUse {
  std::string name;
  Type type;
  int uses = 0;
};

// Checks an L3 or MiniML term (by its lang tag), annotating each node's
// ty.  Linear L3 bindings must be consumed exactly once.
Type typecheck(const Registry& reg, src::Expr& e, const Context& ctx = {},
               std::vector<LinearUse>* linear_uses = nullptr);

// Compiles a checked term to LCVM.
lcvm::Expr compile(const Registry& reg, const src::Expr& e, FreshSupply& fs);

lcvm::Expr boundary_glue(const Registry& reg, Lang host, const Type& host_type, const Type& inner,
                         const lcvm::Expr& input, FreshSupply& fs);

}  // namespace polybridge::gclinear
