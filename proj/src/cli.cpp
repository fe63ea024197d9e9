#include "polybridge/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "polybridge/affine.hpp"
#include "polybridge/gclinear.hpp"
#include "polybridge/refpair.hpp"
#include "polybridge/testkit.hpp"

namespace polybridge::cli {

namespace {

using testkit::Pair;

struct Options {
  std::string command;
  std::string input;
  std::string inline_text;
  std::string lang;
  std::string pair;
  std::string output;
  std::uint64_t fuel = 1000000;
  std::string gc = "at-callgc";
  bool phantom = false;
  bool json = false;
  bool glue = false;
  bool simplify = false;
  std::optional<std::uint64_t> seed;
  int n = 100;
  int max_size = 30;
  double boundary_prob = 0.25;
};

// Signals a usage error; reported with exit code 64.
struct Usage {
  std::string message;
};

enum class Target { None, Stack, Lcvm };

struct Loaded {
  std::string file;
  std::string text;
  Pair pair = Pair::Ref;
  Target target = Target::None;
  Lang lang = Lang::RefHL;  // root language when target is None
};

Pair pair_of(Lang l) {
  switch (l) {
    case Lang::RefHL: case Lang::RefLL: return Pair::Ref;
    case Lang::Affi: return Pair::Affine;
    case Lang::L3: return Pair::GcLinear;
    case Lang::MiniML: break;
  }
  return Pair::Affine;
}

Lang default_root(Pair p) { return testkit::pair_langs(p).front(); }

bool belongs(Lang l, Pair p) {
  for (Lang x : testkit::pair_langs(p))
    if (x == l) return true;
  return false;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Usage{"cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// A MiniML root says which pair it belongs to through its boundaries.
Pair pair_of_miniml(const std::string& text, const std::string& file) {
  auto e = src::parse(Lang::MiniML, text);
  bool affi = false, l3 = false;
  src::walk(*e, [&](const src::Expr& n) {
    affi = affi || n.lang == Lang::Affi;
    l3 = l3 || n.lang == Lang::L3;
  });
  if (affi && l3) throw Usage{file + ": a program may not mix affi and l3 code"};
  return l3 ? Pair::GcLinear : Pair::Affine;
}

Loaded load(const Options& o) {
  Loaded l;
  std::optional<Pair> forced;
  if (!o.pair.empty()) {
    forced = testkit::parse_pair(o.pair);
    if (!forced) throw Usage{"unknown pair '" + o.pair + "' (expected ref, affine or gclinear)"};
  }
  if (!o.inline_text.empty() && !o.input.empty()) throw Usage{"give either a file or -e, not both"};
  if (o.inline_text.empty() && o.input.empty()) throw Usage{"no input: give a file or -e"};

  std::optional<Lang> lang;
  if (!o.lang.empty()) {
    lang = src::lang_from_name(o.lang);
    if (!lang) throw Usage{"unknown language '" + o.lang + "' (expected refhl, refll, affi, mml or l3)"};
  }
  if (!o.inline_text.empty()) {
    l.file = "<inline>";
    l.text = o.inline_text;
    if (!lang && !forced) throw Usage{"-e needs --lang or --pair"};
    if (!lang) lang = default_root(*forced);
  } else {
    l.file = o.input;
    if (ends_with(o.input, ".slang") || ends_with(o.input, ".lcvm")) {
      l.text = read_file(o.input);
      l.target = ends_with(o.input, ".slang") ? Target::Stack : Target::Lcvm;
      if (forced && (*forced == Pair::Ref) != (l.target == Target::Stack))
        throw Usage{o.input + ": target program does not belong to pair " + o.pair};
      l.pair = forced.value_or(l.target == Target::Stack ? Pair::Ref : Pair::Affine);
      return l;
    }
    if (!lang) lang = src::lang_from_extension(o.input);
    if (!lang) throw Usage{o.input + ": unknown extension (expected .refhl, .refll, .affi, .mml, .l3, .slang or .lcvm)"};
    l.text = read_file(o.input);
  }
  l.lang = *lang;
  if (forced) {
    if (!belongs(l.lang, *forced))
      throw Usage{std::string(lang_name(l.lang)) + " is not a language of pair " + testkit::pair_name(*forced)};
    l.pair = *forced;
  } else {
    l.pair = l.lang == Lang::MiniML ? pair_of_miniml(l.text, l.file) : pair_of(l.lang);
  }
  return l;
}

src::ExprPtr check(const Loaded& l, Type* type_out = nullptr) {
  auto e = src::parse(l.lang, l.text);
  Type t = testkit::typecheck(l.pair, *e);
  if (type_out) *type_out = t;
  return e;
}

testkit::Compiled build(const Loaded& l, bool simplify) {
  testkit::Compiled c;
  c.pair = l.pair;
  if (l.target == Target::Stack) {
    c.stack = stack::parse_program(l.text);
    return c;
  }
  if (l.target == Target::Lcvm) {
    c.lcvm = lcvm::parse_expr(l.text);
    return c;
  }
  c = testkit::compile(l.pair, *check(l));
  if (simplify && l.pair == Pair::Affine) c.lcvm = affine::simplify(c.lcvm);
  return c;
}

std::string target_text(const testkit::Compiled& c) {
  if (c.pair == Pair::Ref) return stack::print_program(c.stack);
  return lcvm::print_expr(c.lcvm) + "\n";
}

void emit_outcome(std::ostream& out, const Options& o, const std::string& phase, const Outcome& r) {
  if (o.json) {
    nlohmann::ordered_json j;
    j["phase"] = phase;
    switch (r.kind) {
      case Outcome::Kind::Value: j["outcome"] = "value"; j["value"] = r.value; break;
      case Outcome::Kind::Fail: j["outcome"] = "fail"; j["failCode"] = error_name(r.code); break;
      case Outcome::Kind::FuelExhausted: j["outcome"] = "fuel-exhausted"; break;
      case Outcome::Kind::Stuck: j["outcome"] = "stuck"; break;
    }
    j["steps"] = r.steps;
    out << j.dump() << "\n";
    return;
  }
  if (r.kind == Outcome::Kind::Value)
    out << r.value << "\n";
  else
    out << r.describe() << "\n";
}

void emit_ok(std::ostream& out, const Options& o, const std::string& phase, const std::string& value) {
  if (o.json) {
    nlohmann::ordered_json j;
    j["phase"] = phase;
    j["outcome"] = "ok";
    j["value"] = value;
    j["steps"] = 0;
    out << j.dump() << "\n";
  } else {
    out << value;
    if (value.empty() || value.back() != '\n') out << "\n";
  }
}

void emit_step(std::ostream& out, const Options& o, std::uint64_t k, const std::string& text) {
  if (o.json) {
    nlohmann::ordered_json j;
    j["phase"] = "trace";
    j["outcome"] = "step";
    j["value"] = text;
    j["steps"] = k;
    out << j.dump() << "\n";
  } else {
    out << k << ": " << text << "\n";
  }
}

lcvm::GcPolicy policy(const Options& o) {
  auto p = lcvm::parse_gc_policy(o.gc);
  if (!p) throw Usage{"unknown gc policy '" + o.gc + "' (expected never, at-callgc or every-alloc)"};
  return *p;
}

std::string stack_text(const std::vector<stack::Value>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + stack::print_value(s[i]);
  return out + "]";
}

int execute(const Options& o, std::ostream& out, bool trace) {
  lcvm::GcPolicy gc = policy(o);
  Loaded l = load(o);
  if (o.phantom && l.pair == Pair::Ref) throw Usage{"--phantom-oracle applies only to LCVM programs"};
  auto c = build(l, false);
  Outcome r;
  if (c.pair == Pair::Ref) {
    stack::TraceHook hook;
    if (trace)
      hook = [&](std::uint64_t k, const stack::Config& before, const stack::Instr& next) {
        emit_step(out, o, k, stack::print_instr_inline(next) + "  stack " + stack_text(before.stack));
      };
    r = stack::run(stack::Config::initial(c.stack), o.fuel, hook).outcome;
  } else {
    lcvm::TraceHook hook;
    if (trace)
      hook = [&](std::uint64_t k, const lcvm::Config&, const lcvm::StepInfo& info) {
        std::string text = info.redex ? lcvm::print_expr(info.redex) : std::string("(none)");
        if (info.protect_step) text += "  [protect]";
        emit_step(out, o, k, text);
      };
    r = lcvm::run(lcvm::Config::initial(c.lcvm, gc, o.phantom), o.fuel, hook).outcome;
  }
  emit_outcome(out, o, "run", r);
  return exit_code(r);
}

int typecheck_cmd(const Options& o, std::ostream& out) {
  Loaded l = load(o);
  if (l.target != Target::None) throw Usage{"typecheck takes a source program"};
  Type t;
  check(l, &t);
  emit_ok(out, o, "typecheck", print_type(t));
  return 0;
}

int compile_cmd(const Options& o, std::ostream& out) {
  Loaded l = load(o);
  if (l.target != Target::None) throw Usage{"compile takes a source program"};
  std::string text = target_text(build(l, o.simplify));
  if (!o.output.empty()) {
    std::ofstream f(o.output, std::ios::binary);
    if (!f) throw Usage{"cannot write " + o.output};
    f << text;
    if (o.json) emit_ok(out, o, "compile", o.output);
    return 0;
  }
  emit_ok(out, o, "compile", text);
  return 0;
}

int convert_table_cmd(const Options& o, std::ostream& out) {
  if (o.pair.empty()) throw Usage{"convert-table needs --pair"};
  auto p = testkit::parse_pair(o.pair);
  if (!p) throw Usage{"unknown pair '" + o.pair + "'"};
  std::vector<std::string> lines;
  switch (*p) {
    case Pair::Ref: lines = interop::describe_rules(refpair::default_rules(), o.glue); break;
    case Pair::Affine: lines = interop::describe_rules(affine::default_rules(), o.glue); break;
    case Pair::GcLinear: lines = interop::describe_rules(gclinear::default_rules(), o.glue); break;
  }
  for (const auto& line : lines) {
    if (o.json) {
      nlohmann::ordered_json j;
      j["phase"] = "convert-table";
      j["outcome"] = "ok";
      j["value"] = line;
      j["steps"] = 0;
      out << j.dump() << "\n";
    } else {
      out << line << "\n";
    }
  }
  return 0;
}

int fuzz_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.pair.empty()) throw Usage{"fuzz needs --pair"};
  auto p = testkit::parse_pair(o.pair);
  if (!p) throw Usage{"unknown pair '" + o.pair + "'"};
  if (o.n < 0) throw Usage{"--n must be non-negative"};
  if (o.max_size < 1) throw Usage{"--max-size must be at least 1"};
  if (o.boundary_prob < 0 || o.boundary_prob > 1) throw Usage{"--boundary-prob must lie in [0, 1]"};
  testkit::GenConfig cfg;
  cfg.pair = *p;
  cfg.max_size = o.max_size;
  cfg.boundary_prob = o.boundary_prob;
  cfg.seed = o.seed.value_or(0);
  auto s = testkit::fuzz(cfg, o.n, o.fuel, &out);
  err << "fuzz " << testkit::pair_name(*p) << ": " << s.terms << " terms, " << s.verdicts << " verdicts, "
      << s.failures << " failures\n";
  return s.failures == 0 ? 0 : 1;
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("POLYBRIDGE_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used == std::string(v).size()) return n;
  } catch (const std::exception&) {
  }
  throw Usage{std::string("POLYBRIDGE_SEED is not a number: ") + v};
}

void usage_error(std::ostream& err, const Options& o, const std::string& message) {
  Diagnostic d;
  d.phase = "usage";
  d.file = o.input.empty() ? "<cli>" : o.input;
  d.message = message;
  err << (o.json ? d.render_json() : d.render()) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"polybridge: typecheck, compile, run and fuzz multi-language programs", "polybridge"};
  app.require_subcommand(1, 1);

  auto source = [&](CLI::App* c) {
    c->add_option("input", o.input, "source (.refhl .refll .affi .mml .l3) or target (.slang .lcvm) file");
    c->add_option("-e", o.inline_text, "program text instead of a file");
    c->add_option("--lang", o.lang, "root language of -e text: refhl, refll, affi, mml, l3");
    c->add_option("--pair", o.pair, "ref, affine or gclinear (inferred from the extension otherwise)");
    c->add_flag("--json", o.json, "one JSON object per line");
  };
  auto machine = [&](CLI::App* c) {
    c->add_option("--fuel", o.fuel, "step budget")->capture_default_str();
    c->add_option("--gc", o.gc, "never, at-callgc or every-alloc")->capture_default_str();
    c->add_flag("--phantom-oracle", o.phantom, "track static bindings with phantom flags");
    c->add_option("--seed", o.seed, "seed (falls back to POLYBRIDGE_SEED)");
  };

  auto* tc = app.add_subcommand("typecheck", "check a source program and print its type");
  source(tc);
  auto* cc = app.add_subcommand("compile", "print the target program");
  source(cc);
  cc->add_option("-o", o.output, "write the target program to a file");
  cc->add_flag("--simplify", o.simplify, "inline administrative lets (affine pair)");
  cc->add_option("--seed", o.seed, "seed (falls back to POLYBRIDGE_SEED)");
  auto* rc = app.add_subcommand("run", "run a program and print its value or failure");
  source(rc);
  machine(rc);
  auto* trc = app.add_subcommand("trace", "run a program printing every machine step");
  source(trc);
  machine(trc);
  auto* ct = app.add_subcommand("convert-table", "list a pair's conversion rules");
  ct->add_option("--pair", o.pair, "ref, affine or gclinear")->required();
  ct->add_flag("--glue", o.glue, "print the glue code of each rule");
  ct->add_flag("--json", o.json, "one JSON object per line");
  auto* fz = app.add_subcommand("fuzz", "generate well-typed programs and check the safety properties");
  fz->add_option("--pair", o.pair, "ref, affine or gclinear")->required();
  fz->add_option("--n", o.n, "number of programs")->capture_default_str();
  fz->add_option("--seed", o.seed, "seed (falls back to POLYBRIDGE_SEED)");
  fz->add_option("--fuel", o.fuel, "step budget per run")->capture_default_str();
  fz->add_option("--max-size", o.max_size, "node budget per program")->capture_default_str();
  fz->add_option("--boundary-prob", o.boundary_prob, "chance of a boundary at a node")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    usage_error(err, o, e.what());
    return exit_codes::usage;
  }

  try {
    if (!o.seed) o.seed = env_seed();
    if (tc->parsed()) return typecheck_cmd(o, out);
    if (cc->parsed()) return compile_cmd(o, out);
    if (rc->parsed()) return execute(o, out, false);
    if (trc->parsed()) return execute(o, out, true);
    if (ct->parsed()) return convert_table_cmd(o, out);
    if (fz->parsed()) return fuzz_cmd(o, out, err);
  } catch (const Usage& u) {
    usage_error(err, o, u.message);
    return exit_codes::usage;
  } catch (StaticError& e) {
    Diagnostic d = e.diag();
    if (d.file.empty()) d.file = o.input.empty() ? "<inline>" : o.input;
    err << (o.json ? d.render_json() : d.render()) << "\n";
    return exit_codes::static_error;
  }
  return exit_codes::usage;
}

}  // namespace polybridge::cli
