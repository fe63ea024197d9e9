#include "polybridge/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>

namespace polybridge {

namespace {

struct Fold {
  const char* utf8;
  const char* sym;
  bool ident;
};

const Fold kFolds[] = {
    {"\xCE\xBB", "\\", false},          // λ
    {"\xCE\x9B", "/\\", false},         // Λ
    {"\xE2\x8A\xB8", "-o", false},      // ⊸
    {"\xE2\x8A\x97", "*", false},       // ⊗
    {"\xC3\x97", "*", false},           // ×
    {"\xE2\x86\x92", "->", false},      // →
    {"\xE2\x88\x80", "forall", true},   // ∀
    {"\xE2\x88\x83", "exists", true},   // ∃
    {"\xE2\x9F\xAA", "[|", false},      // ⟪
    {"\xE2\x9F\xAB", "|]", false},      // ⟫
    {"\xE2\x9F\xA8", "<", false},       // ⟨
    {"\xE2\x9F\xA9", ">", false},       // ⟩
    {"\xE2\x80\xA2", "\xE2\x80\xA2", false},  // •
    {"\xE2\x88\x98", "\xE2\x88\x98", false},  // ∘
    {"\xE2\x88\xBC", "~", false},       // ∼
};

const char* kSyms[] = {"[|", "|]", ":=", "->", "-*", "/\\", "(", ")", "[", "]", "{", "}", "<", ">",
                       ",", ".", ":", ";", "=", "\\", "!", "&", "*", "+", "@", "-", "~", "?", "|"};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '\'' || c == '#' || c == '?' || c >= 0x80;
}

std::size_t utf8_len(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

const Fold* fold_at(const std::string& s, std::size_t i) {
  for (const auto& f : kFolds) {
    std::size_t n = std::strlen(f.utf8);
    if (s.compare(i, n, f.utf8) == 0) return &f;
  }
  return nullptr;
}

}  // namespace

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0, n = src.size();
  while (i < n) {
    unsigned char c = src[i];
    if (std::isspace(c)) { ++i; continue; }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    std::size_t start = i;
    if (const Fold* f = fold_at(src, i)) {
      i += std::strlen(f->utf8);
      out.push_back({f->ident ? TokKind::Ident : TokKind::Sym, f->sym, 0, {start, i}});
      continue;
    }
    if (std::isdigit(c)) {
      std::uint64_t v = 0;
      bool overflow = false;
      while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) {
        std::uint64_t d = src[i] - '0';
        if (v > (UINT64_MAX - d) / 10) overflow = true;
        v = v * 10 + d;
        ++i;
      }
      if (overflow || v > static_cast<std::uint64_t>(INT64_MAX) + 1)
        fail_static("parse", {start, i}, "integer literal out of range");
      Token t{TokKind::Int, src.substr(start, i - start), 0, {start, i}};
      t.value = static_cast<std::int64_t>(v);
      out.push_back(t);
      continue;
    }
    // -o is a symbol only when not followed by more identifier characters
    if (c == '-' && i + 1 < n && src[i + 1] == 'o' &&
        (i + 2 >= n || !ident_char(static_cast<unsigned char>(src[i + 2])))) {
      i += 2;
      out.push_back({TokKind::Sym, "-o", 0, {start, i}});
      continue;
    }
    if (ident_start(c)) {
      while (i < n) {
        unsigned char d = src[i];
        if (d >= 0x80) {
          if (fold_at(src, i)) break;
          i += utf8_len(d);
          continue;
        }
        if (!ident_char(d)) break;
        ++i;
      }
      out.push_back({TokKind::Ident, src.substr(start, i - start), 0, {start, i}});
      continue;
    }
    bool matched = false;
    for (const char* s : kSyms) {
      std::size_t len = std::strlen(s);
      if (src.compare(i, len, s) == 0) {
        i += len;
        out.push_back({TokKind::Sym, s, 0, {start, i}});
        matched = true;
        break;
      }
    }
    if (!matched) fail_static("parse", {start, start + 1}, std::string("unexpected character '") + src[i] + "'");
  }
  out.push_back({TokKind::End, "<end of input>", 0, {n, n}});
  return out;
}

const Token& TokenStream::peek(std::size_t k) const {
  std::size_t p = pos_ + k;
  return p < toks_.size() ? toks_[p] : toks_.back();
}

const Token& TokenStream::next() {
  const Token& t = peek();
  if (pos_ < toks_.size() - 1) ++pos_;
  return t;
}

bool TokenStream::is_sym(const char* s, std::size_t k) const {
  const Token& t = peek(k);
  return t.kind == TokKind::Sym && t.text == s;
}

bool TokenStream::is_ident(const char* s, std::size_t k) const {
  const Token& t = peek(k);
  return t.kind == TokKind::Ident && t.text == s;
}

bool TokenStream::accept_sym(const char* s) {
  if (!is_sym(s)) return false;
  next();
  return true;
}

bool TokenStream::accept_ident(const char* s) {
  if (!is_ident(s)) return false;
  next();
  return true;
}

const Token& TokenStream::expect_sym(const char* s) {
  if (!is_sym(s)) error(std::string("expected '") + s + "' but found '" + peek().text + "'");
  return next();
}

void TokenStream::expect_ident_kw(const char* s) {
  if (!is_ident(s)) error(std::string("expected '") + s + "' but found '" + peek().text + "'");
  next();
}

std::string TokenStream::expect_ident(const char* what) {
  if (peek().kind != TokKind::Ident) error(std::string("expected ") + what + " but found '" + peek().text + "'");
  return next().text;
}

std::int64_t TokenStream::expect_int() {
  bool neg = accept_sym("-");
  if (peek().kind != TokKind::Int) error("expected integer literal but found '" + peek().text + "'");
  const Token& t = next();
  std::uint64_t mag = static_cast<std::uint64_t>(t.value);
  if (!neg && t.text == "9223372036854775808") error("integer literal out of range");
  return neg ? static_cast<std::int64_t>(0 - mag) : t.value;
}

void TokenStream::error(const std::string& msg) const {
  fail_static("parse", peek().span, msg);
}

Span TokenStream::span_from(std::size_t start_tok) const {
  std::size_t s = start_tok < toks_.size() ? toks_[start_tok].span.start : 0;
  std::size_t e = pos_ > 0 ? toks_[pos_ - 1].span.end : s;
  return {s, std::max(s, e)};
}

}  // namespace polybridge
