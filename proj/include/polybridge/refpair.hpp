#pragma once

#include <map>
#include <string>

#include "polybridge/registry.hpp"
#include "polybridge/stacklang.hpp"
#include "polybridge/syntax.hpp"

namespace polybridge::refpair {

using Registry = interop::Registry<interop::StackTarget>;

// bool ~ int, ref bool ~ ref int, t1 + t2 ~ [int], t1 * t2 ~ [t]
Registry default_rules();

// Variables in scope on each side of the boundary.
struct Context {
  std::map<std::string, Type> hl;
  std::map<std::string, Type> ll;
};

// Checks a RefHL or RefLL term (by its lang tag), annotating each node's ty.
Type typecheck(const Registry& reg, src::Expr& e, const Context& ctx = {});

// Compiles a checked term to StackLang.
stack::Program compile(const Registry& reg, const src::Expr& e, FreshSupply& fs);

// The conversion glue spliced at a boundary with host type `host` whose
// inner term has type `inner`.
stack::Program boundary_glue(const Registry& reg, Lang host, const Type& host_type, const Type& inner,
                             FreshSupply& fs);

}  // namespace polybridge::refpair
