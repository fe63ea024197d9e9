#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace polybridge {

// Which source language a type or term belongs to.
enum class Lang { RefHL, RefLL, Affi, MiniML, L3 };

const char* lang_name(Lang l);  // "refhl", "refll", "affi", "mml", "l3"
const char* lang_tag(Lang l);   // boundary tag: "hl", "ll", "affi", "ml", "l3"

// One constructor set covers all five source languages.  A checker only
// ever produces the constructors of its own language.
enum class TyCon {
  Unit, Bool, Int,
  Sum, Prod, Arrow, Ref,     // RefHL / MiniML
  Array,                     // RefLL
  Lolli, LolliStatic, Bang, With, Tensor,  // Affi (Tensor and Lolli also L3)
  Forall, TVar, Foreign,     // MiniML
  Exists, Ptr, Cap,          // L3 (Forall over location variables too)
  Meta                       // pattern variable in conversion rules
};

struct TypeNode;

class Type {
 public:
  Type() = default;
  explicit Type(std::shared_ptr<const TypeNode> n) : node_(std::move(n)) {}

  static Type unit();
  static Type boolean();
  static Type integer();
  static Type make(TyCon c, std::vector<Type> args = {}, std::string name = {});
  static Type var(const std::string& n) { return make(TyCon::TVar, {}, n); }
  static Type meta(const std::string& n) { return make(TyCon::Meta, {}, n); }

  bool valid() const { return node_ != nullptr; }
  TyCon con() const;
  const std::string& name() const;
  const std::vector<Type>& args() const;
  const Type& arg(std::size_t i) const { return args().at(i); }

  bool is(TyCon c) const { return valid() && con() == c; }

 private:
  std::shared_ptr<const TypeNode> node_;
};

struct TypeNode {
  TyCon con;
  std::string name;  // binder for Forall/Exists, variable for TVar/Meta/Ptr/Cap
  std::vector<Type> args;
};

// Alpha-equivalence.
bool type_equal(const Type& a, const Type& b);

// Free type / location variables.
std::set<std::string> free_type_vars(const Type& t);

// Capture-avoiding substitution of a type (or location) variable.
Type subst_type(const Type& t, const std::string& var, const Type& with);

// Renaming for location variables (Ptr/Cap carry their variable in name()).
Type rename_loc(const Type& t, const std::string& from, const std::string& to);

std::string print_type(const Type& t);

// L3 duplicable types: unit, bool, Ptr z, !t.
bool l3_duplicable(const Type& t);

// Rewrites every Ptr z not already under a ! into !Ptr z.  Two L3 types
// are interchangeable iff their canonical forms are alpha-equal.
Type l3_canonical(const Type& t);

// Pattern matching for conversion rules: Meta nodes bind (consistently).
// Bound variables of the pattern are matched up to renaming, and a meta
// may not capture a variable bound inside the pattern.
using TypeBindings = std::map<std::string, Type>;
bool match_type(const Type& pattern, const Type& t, TypeBindings& out);
Type instantiate_pattern(const Type& pattern, const TypeBindings& b);

}  // namespace polybridge
