#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polybridge/core.hpp"

namespace polybridge {

enum class TokKind { Ident, Int, Sym, End };

struct Token {
  TokKind kind;
  std::string text;  // identifier, symbol (Unicode symbols are folded to ASCII spellings)
  std::int64_t value = 0;
  Span span;
};

// Folded spellings:  λ -> "\"   Λ -> "/\"   ⊸ -> "-o"   ⊗ × -> "*"   → -> "->"
// ∀ -> forall   ∃ -> exists   ⟪ -> "[|"   ⟫ -> "|]"   ⟨ -> "<"   ⟩ -> ">"
// • and ∘ stay as themselves.  Comments run from // to end of line.
std::vector<Token> lex(const std::string& src);

// Cursor over a token vector with the usual helpers; errors are reported
// as StaticError in the "parse" phase.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == TokKind::End; }
  bool is_sym(const char* s, std::size_t k = 0) const;
  bool is_ident(const char* s, std::size_t k = 0) const;
  bool accept_sym(const char* s);
  bool accept_ident(const char* s);
  const Token& expect_sym(const char* s);
  void expect_ident_kw(const char* s);
  std::string expect_ident(const char* what);
  std::int64_t expect_int();
  [[noreturn]] void error(const std::string& msg) const;
  std::size_t pos() const { return pos_; }
  void reset(std::size_t p) { pos_ = p; }
  Span span_from(std::size_t start_tok) const;

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace polybridge
