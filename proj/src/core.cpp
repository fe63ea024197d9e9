#include "polybridge/core.hpp"

#include "json.hpp"
#include <sstream>

namespace polybridge {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::Conv: return "Conv";
    case ErrorCode::Idx: return "Idx";
    case ErrorCode::Type: return "Type";
    case ErrorCode::Ptr: return "Ptr";
  }
  return "?";
}

std::optional<ErrorCode> parse_error_name(const std::string& s) {
  if (s == "Conv") return ErrorCode::Conv;
  if (s == "Idx") return ErrorCode::Idx;
  if (s == "Type") return ErrorCode::Type;
  if (s == "Ptr") return ErrorCode::Ptr;
  return std::nullopt;
}

std::string FreshSupply::fresh(const std::string& hint) {
  return base_name(hint) + "#" + std::to_string(next_++);
}

std::string base_name(const std::string& name) {
  auto pos = name.find('#');
  return pos == std::string::npos ? name : name.substr(0, pos);
}

static const char* severity_name(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "error";
}

std::string Diagnostic::render() const {
  std::ostringstream os;
  os << phase << ':' << (file.empty() ? "<input>" : file) << ':' << span.start << '-' << span.end
     << ": " << severity_name(severity) << ": " << message;
  for (const auto& n : notes) os << "\n  note: " << n;
  return os.str();
}

std::string Diagnostic::render_json() const {
  nlohmann::json j;
  j["phase"] = phase;
  j["file"] = file.empty() ? "<input>" : file;
  j["start"] = span.start;
  j["end"] = span.end;
  j["severity"] = severity_name(severity);
  j["message"] = message;
  if (!notes.empty()) j["notes"] = notes;
  return j.dump();
}

StaticError::StaticError(Diagnostic d) : std::runtime_error(d.message), diag_(std::move(d)) {}

void fail_static(const std::string& phase, Span span, const std::string& msg,
                 std::vector<std::string> notes) {
  Diagnostic d;
  d.phase = phase;
  d.span = span;
  d.message = msg;
  d.notes = std::move(notes);
  throw StaticError(std::move(d));
}

std::string Outcome::describe() const {
  switch (kind) {
    case Kind::Value: return "value " + value;
    case Kind::Fail: return std::string("fail ") + error_name(code);
    case Kind::FuelExhausted: return "fuel exhausted";
    case Kind::Stuck: return "stuck";
  }
  return "?";
}

int exit_code(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::Value: return exit_codes::value;
    case Outcome::Kind::FuelExhausted: return exit_codes::fuel;
    case Outcome::Kind::Stuck: return exit_codes::stuck;
    case Outcome::Kind::Fail:
      switch (o.code) {
        case ErrorCode::Conv: return exit_codes::conv;
        case ErrorCode::Idx: return exit_codes::idx;
        case ErrorCode::Type: return exit_codes::type;
        case ErrorCode::Ptr: return exit_codes::ptr;
      }
  }
  return exit_codes::type;
}

}  // namespace polybridge
