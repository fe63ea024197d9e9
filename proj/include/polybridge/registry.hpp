#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polybridge/core.hpp"
#include "polybridge/lcvm.hpp"
#include "polybridge/stacklang.hpp"
#include "polybridge/types.hpp"

namespace polybridge::interop {

// Direction of a conversion: AtoB turns a value of the rule's left-hand
// type into one of its right-hand type.
enum class Dir { AtoB, BtoA };

// Hole naming inside glue templates: premise i, direction d.
std::string hole_name(std::size_t premise, Dir d);

struct StackTarget {
  using Code = stack::Program;
  using Fill = std::function<Code(const std::string& hole, const Code* arg)>;
  // Renames every lam binder of the template fresh and splices holes.
  static Code instantiate(const Code& tmpl, const Code* input, const Fill& fill, FreshSupply& fs);
  static bool has_holes(const Code& c);
  static std::string print(const Code& c);
};

struct LcvmTarget {
  using Code = lcvm::Expr;
  using Fill = std::function<Code(const std::string& hole, const Code* arg)>;
  // Renames template binders fresh, replaces Input by *input (when given)
  // and each Hole(name, arg) by fill(name, instantiated arg).
  static Code instantiate(const Code& tmpl, const Code* input, const Fill& fill, FreshSupply& fs);
  static bool has_holes(const Code& c);
  static std::string print(const Code& c);
};

struct Premise {
  Type a;
  Type b;
};

template <class Target>
struct Rule {
  std::string name;
  Type a;  // head pattern, left language
  Type b;  // head pattern, right language
  std::vector<Premise> premises;
  typename Target::Code glue_ab;
  typename Target::Code glue_ba;
  std::string side_label;
  std::function<bool(const TypeBindings&)> side;
};

template <class Target>
struct Derivation {
  std::shared_ptr<const Rule<Target>> rule;
  Type a, b;
  TypeBindings bindings;
  std::vector<Derivation> children;
  // Canonical, hole-free glue (instantiated from a supply starting at 0).
  typename Target::Code glue_ab;
  typename Target::Code glue_ba;

  // Instantiates the glue for one direction with names from fs.  For
  // LCVM glue `input` is the converted expression.
  typename Target::Code emit(Dir d, FreshSupply& fs, const typename Target::Code* input = nullptr) const;
};

struct NotConvertible {
  Type a, b;
  std::string reason;
  std::vector<std::string> trail;  // outer pairs first
};

template <class Target>
struct DeriveResult {
  std::optional<Derivation<Target>> ok;
  NotConvertible err;
  explicit operator bool() const { return ok.has_value(); }
};

template <class Target>
class Registry {
 public:
  Registry(Lang a, Lang b) : lang_a(a), lang_b(b) {}

  // A rule whose head patterns are alpha-equal to an existing rule
  // replaces it in place.
  void add(Rule<Target> r);
  const std::vector<std::shared_ptr<const Rule<Target>>>& rules() const { return rules_; }

  Lang lang_a, lang_b;
  std::function<Type(const Type&)> normalize_a, normalize_b;

 private:
  std::vector<std::shared_ptr<const Rule<Target>>> rules_;
};

template <class Target>
DeriveResult<Target> derive(const Registry<Target>& reg, const Type& a, const Type& b);

template <class Target>
struct Boundary {
  Derivation<Target> derivation;
  Dir dir;  // direction that turns the foreign value into a host value
  typename Target::Code emit(FreshSupply& fs, const typename Target::Code* input = nullptr) const {
    return derivation.emit(dir, fs, input);
  }
};

// Host-directed lookup for a boundary  host_lang<< e : foreign_type >> : host_type.
template <class Target>
DeriveResult<Target> check_boundary(const Registry<Target>& reg, Lang host, const Type& host_type,
                                    const Type& foreign_type, Dir& dir_out);

// One line per rule:  a ~ b   [side condition]
template <class Target>
std::vector<std::string> describe_rules(const Registry<Target>& reg, bool with_glue);

extern template struct Derivation<StackTarget>;
extern template struct Derivation<LcvmTarget>;
extern template class Registry<StackTarget>;
extern template class Registry<LcvmTarget>;

}  // namespace polybridge::interop
