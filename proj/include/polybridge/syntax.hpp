#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polybridge/core.hpp"
#include "polybridge/types.hpp"

namespace polybridge::src {

enum class Mode { Dyn, Stat };

enum class Op {
  Unit, True, False, Int, Var,
  AVar,                  // Affi affine variable occurrence (carries a mode)
  Lam, App, Pair, Fst, Snd, Inl, Inr, Match,
  If,                    // if e then e else e (RefHL, L3)
  If0,                   // RefLL
  Ref, Deref, Assign,
  Array, Index, Add,     // RefLL
  TyLam, TyApp,          // MiniML
  Bang, LetBang,         // Affi, L3
  WithPair, Proj1, Proj2,// Affi
  LetPair,               // Affi, L3
  LetUnit, Dupl, Drop, New, Free, Swap,
  LocLam, LocApp, Pack, Unpack,  // L3 location abstraction
  Boundary,              // tag<< e >> : host type
  Foreign                // L3 ml< e > : t
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  Lang lang = Lang::MiniML;
  Op op = Op::Unit;
  Span span;
  std::int64_t num = 0;
  std::string name, name2;
  Mode mode = Mode::Dyn, mode2 = Mode::Dyn;
  Type ann;                   // annotation (lambda parameter, sum type, type argument, boundary type)
  std::vector<ExprPtr> kids;
  Type ty;                    // filled in by the type checker
};

ExprPtr make(Lang l, Op op, std::vector<ExprPtr> kids = {});

// Deep structural equality, ignoring spans and checker annotations.
bool same_syntax(const Expr& a, const Expr& b);
ExprPtr clone(const Expr& e);
std::size_t size(const Expr& e);

std::optional<Lang> lang_from_extension(const std::string& path);
std::optional<Lang> lang_from_name(const std::string& s);  // refhl | refll | affi | mml | l3
std::optional<Lang> lang_from_tag(const std::string& tag); // hl | ll | affi | ml | l3

ExprPtr parse(Lang lang, const std::string& text);
Type parse_type(Lang lang, const std::string& text);
std::string print(const Expr& e);

const char* op_name(Op op);

// Visits every node (pre-order).
template <class F>
void walk(const Expr& e, F&& f) {
  f(e);
  for (const auto& k : e.kids) walk(*k, f);
}

}  // namespace polybridge::src
