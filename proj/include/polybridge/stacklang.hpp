#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "polybridge/core.hpp"

namespace polybridge::stack {

struct Instr;
using Program = std::vector<Instr>;
using ProgramPtr = std::shared_ptr<const Program>;

struct Value;

struct Thunk {
  ProgramPtr body;
};
struct Loc {
  std::uint64_t id;
};
struct ArrayVal {
  std::shared_ptr<const std::vector<Value>> elems;
};
// Only appears in programs before a lam substitutes it away.
struct VarRef {
  std::string name;
};

struct Value {
  std::variant<std::int64_t, Thunk, Loc, ArrayVal, VarRef> v;

  Value() : v(std::int64_t{0}) {}
  Value(std::int64_t n) : v(n) {}
  Value(Thunk t) : v(std::move(t)) {}
  Value(Loc l) : v(l) {}
  Value(ArrayVal a) : v(std::move(a)) {}
  Value(VarRef r) : v(std::move(r)) {}

  const std::int64_t* as_int() const { return std::get_if<std::int64_t>(&v); }
  const Thunk* as_thunk() const { return std::get_if<Thunk>(&v); }
  const Loc* as_loc() const { return std::get_if<Loc>(&v); }
  const ArrayVal* as_array() const { return std::get_if<ArrayVal>(&v); }
  const VarRef* as_var() const { return std::get_if<VarRef>(&v); }
};

Value array(std::vector<Value> elems);
Value var(const std::string& name);
Value thunk(Program body);

enum class Op { Push, Add, Less, If0, Lam, Call, Idx, Len, Alloc, Read, Write, Fail, Hole };

struct Instr {
  Op op = Op::Add;
  Value value;                      // Push
  std::vector<std::string> params;  // Lam; params[0] receives the top of the stack
  ProgramPtr body;                  // Lam body, If0 zero-branch
  ProgramPtr alt;                   // If0 nonzero-branch
  ErrorCode code = ErrorCode::Type; // Fail
  std::string hole;                 // Hole (glue templates only)
};

// constructors
Instr push(Value v);
Instr add();
Instr less();
Instr if0(Program zero, Program nonzero);
Instr lam(std::vector<std::string> params, Program body);
Instr call();
Instr idx();
Instr len();
Instr alloc();
Instr read();
Instr write();
Instr fail(ErrorCode c);
Instr hole(const std::string& name);

// Standard macros.
Program swap_();
Program drop_();
Program dup_();

// Appends b to a.
void append(Program& a, const Program& b);
Program concat(std::initializer_list<Program> parts);

bool operator==(const Value& a, const Value& b);
bool operator==(const Instr& a, const Instr& b);
bool programs_equal(const Program& a, const Program& b);

// Simultaneous substitution; stops at lam binders that shadow.
Program subst(const Program& p, const std::map<std::string, Value>& s);

// ---- machine ----

using Heap = std::map<std::uint64_t, Value>;

struct Frame {
  ProgramPtr prog;
  std::size_t pc = 0;
};

// Machine configuration <H; S; P>.  The program is kept as a stack of
// frames; prepending a block pushes a frame.
struct Config {
  Heap heap;
  std::vector<Value> stack;  // back() is the top
  std::optional<ErrorCode> failed;
  std::vector<Frame> program;

  static Config initial(Program p);
  bool program_empty() const;
  const Instr* next_instr() const;
  Program remaining() const;
};

enum class StepStatus { Stepped, Terminal };

// Advances c by one step in place.  Terminal when the program is empty or
// the configuration has failed.
StepStatus step(Config& c);
// Pure wrapper.
std::optional<Config> step_copy(const Config& c);

struct RunResult {
  Outcome outcome;
  std::optional<Value> value;    // top of stack on success
  std::vector<Value> residual;   // stack below the value
  Config final;
};

using TraceHook = std::function<void(std::uint64_t k, const Config& before, const Instr& next)>;
RunResult run(Config c, std::uint64_t fuel, const TraceHook& trace = nullptr);
RunResult run(const Program& p, std::uint64_t fuel = 1000000);

// ---- text format ----
std::string print_value(const Value& v);
std::string print_instr_inline(const Instr& i);
std::string print_program(const Program& p);          // one instruction per line
std::string print_program_inline(const Program& p);   // single line, ';'-separated
Program parse_program(const std::string& text);
Value parse_value(const std::string& text);

// Location-bijection-free structural equality of heaps.
bool heaps_equal(const Heap& a, const Heap& b);

}  // namespace polybridge::stack
