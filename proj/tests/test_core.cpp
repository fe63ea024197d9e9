#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "json.hpp"
#include "polybridge/core.hpp"

using namespace polybridge;

TEST_CASE("fresh names") {
  FreshSupply s;
  CHECK(s.fresh("x") == "x#0");
  CHECK(s.fresh("x") == "x#1");
  CHECK(s.fresh("y#0") == "y#2");
  CHECK(base_name("r#12") == "r");
  CHECK(base_name("plain") == "plain");

  FreshSupply a, b;
  std::set<std::string> seen;
  for (int i = 0; i < 10000; ++i) {
    auto n = a.fresh("v");
    CHECK(n == b.fresh("v"));
    seen.insert(n);
  }
  CHECK(seen.size() == 10000);
}

TEST_CASE("exit codes") {
  Outcome v;
  v.kind = Outcome::Kind::Value;
  v.value = "7";
  CHECK(exit_code(v) == 0);
  std::set<int> codes{exit_code(v)};
  for (ErrorCode c : {ErrorCode::Conv, ErrorCode::Idx, ErrorCode::Type, ErrorCode::Ptr}) {
    Outcome f;
    f.kind = Outcome::Kind::Fail;
    f.code = c;
    codes.insert(exit_code(f));
  }
  Outcome fuel;
  fuel.kind = Outcome::Kind::FuelExhausted;
  Outcome stuck;
  stuck.kind = Outcome::Kind::Stuck;
  codes.insert(exit_code(fuel));
  codes.insert(exit_code(stuck));
  CHECK(codes == std::set<int>{0, 10, 11, 12, 13, 20, 21});

  Outcome conv;
  conv.kind = Outcome::Kind::Fail;
  conv.code = ErrorCode::Conv;
  CHECK(exit_code(conv) == 10);
  CHECK(exit_code(fuel) == 20);
  CHECK(conv.describe() == "fail Conv");
  CHECK(v.describe() == "value 7");
}

TEST_CASE("error names round trip") {
  for (ErrorCode c : {ErrorCode::Conv, ErrorCode::Idx, ErrorCode::Type, ErrorCode::Ptr})
    CHECK(parse_error_name(error_name(c)) == c);
  CHECK_FALSE(parse_error_name("Boom").has_value());
}

TEST_CASE("diagnostics") {
  try {
    fail_static("typecheck", Span{3, 9}, "bad thing", {"because"});
    FAIL("expected a throw");
  } catch (const StaticError& e) {
    Diagnostic d = e.diag();
    d.file = "a.affi";
    CHECK(d.render() == "typecheck:a.affi:3-9: error: bad thing\n  note: because");
    auto j = nlohmann::json::parse(d.render_json());
    CHECK(j["phase"] == "typecheck");
    CHECK(j["start"] == 3);
    CHECK(j["end"] == 9);
    CHECK(j["message"] == "bad thing");
    CHECK(d.render_json().find('\n') == std::string::npos);
  }
}
