#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace polybridge {

// Runtime error codes shared by both target machines.
enum class ErrorCode { Conv, Idx, Type, Ptr };

const char* error_name(ErrorCode c);
std::optional<ErrorCode> parse_error_name(const std::string& s);

// Fresh-name supply.  Names come out as hint#k with a per-supply counter,
// so two supplies started from the same state hand out the same sequence.
class FreshSupply {
 public:
  explicit FreshSupply(std::uint64_t start = 0) : next_(start) {}
  std::string fresh(const std::string& hint);
  std::uint64_t peek() const { return next_; }

 private:
  std::uint64_t next_;
};

// strips a trailing #k added by FreshSupply
std::string base_name(const std::string& name);

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  std::string phase;  // parse | typecheck | convert | compile | runtime | usage
  std::string file;
  Span span;
  Severity severity = Severity::Error;
  std::string message;
  std::vector<std::string> notes;

  std::string render() const;
  std::string render_json() const;
};

// Thrown by parsers, checkers and compilers.
class StaticError : public std::runtime_error {
 public:
  explicit StaticError(Diagnostic d);
  const Diagnostic& diag() const { return diag_; }
  Diagnostic& diag() { return diag_; }

 private:
  Diagnostic diag_;
};

[[noreturn]] void fail_static(const std::string& phase, Span span, const std::string& msg,
                              std::vector<std::string> notes = {});

// Result of running a target program.
struct Outcome {
  enum class Kind { Value, Fail, FuelExhausted, Stuck };
  Kind kind = Kind::Value;
  ErrorCode code = ErrorCode::Type;
  std::string value;  // printed value when kind == Value
  std::uint64_t steps = 0;

  std::string describe() const;  // "value 0", "fail Conv", "fuel exhausted", "stuck"
  bool operator==(const Outcome&) const = default;
};

namespace exit_codes {
inline constexpr int value = 0;
inline constexpr int conv = 10;
inline constexpr int idx = 11;
inline constexpr int type = 12;
inline constexpr int ptr = 13;
inline constexpr int fuel = 20;
inline constexpr int stuck = 21;
inline constexpr int static_error = 2;
inline constexpr int usage = 64;
}  // namespace exit_codes

int exit_code(const Outcome& o);

}  // namespace polybridge
