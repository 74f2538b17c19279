// shapecheck: checks [@unboxed] constructor annotations, normalizes programs
// of the annotated lambda-calculus, expands cpp macros and runs the oracle
// suites.
//
// Exit codes: 0 accepted / normal form / agreement, 1 rejected / diverges /
// disagreement, 2 usage or input error.

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shapecheck/calculus.hpp"
#include "shapecheck/cppmacro.hpp"
#include "shapecheck/decls.hpp"
#include "shapecheck/error.hpp"
#include "shapecheck/measure.hpp"
#include "shapecheck/shapes.hpp"
#include "shapecheck/suite.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace shapecheck;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitError = 2;

constexpr const char* kConflictBanner =
    "Error: This declaration is invalid, some [@unboxed] annotations introduce "
    "overlapping representations.";
constexpr const char* kCycleBanner =
    "Error: This declaration is invalid, unfolding its [@unboxed] constructors "
    "does not terminate.";

constexpr const char* kGrammars = R"(
Input formats by example:

  .decl  (check)
    type gmp [@shape (imm: {}; block: {255})]
    type zarith = Small of int [@unboxed] | Big of gmp [@unboxed]
    type 'a id = Id of 'a [@unboxed]
    type ('a, 'b) pair = Pair of 'a * 'b
    type rope = Leaf of string [@unboxed] | Branch of { llen: int; l: rope; r: rope }
    type num = int

  .lam   (norm; add --higher-order for unapplied or returned functions)
    let rec id(a) = a in id(id(int))
    let rec a(x) = b and b(x) = x in a(a)(a)(a)

  .cpp   (cpp, compare-cpp): #define lines, then one call line
    #define twice(x) pair(x, x)
    #define pair(a, b) cons(a, cons(b, nil))
    twice(0)

  primitive table (--prims), one per line:
    int = (imm: top; block: {})
    lazy = (imm: {}; block: {244, 246, 250}) lazylike
)";

struct FileResult {
  std::string out;
  std::string err;
  int code = kExitOk;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `file:line:col: Kind: message`.
std::string diagnostic(const std::string& path, const Error& e) {
  if (e.kind() == ErrorKind::IoError) return std::string(e.what()) + "\n";
  return path + ":" + e.what() + "\n";
}

std::string diagnostic_no_pos(const std::string& path, const Error& e) {
  return e.pos().line == 0 ? path + ": " + e.what() + "\n" : diagnostic(path, e);
}

// Runs `f` on each path concurrently; outputs are emitted in input order.
template <class F>
int for_each_file(const std::vector<std::string>& paths, F f) {
  std::vector<std::future<FileResult>> jobs;
  jobs.reserve(paths.size());
  for (const auto& p : paths)
    jobs.push_back(std::async(std::launch::async, [&f, p] {
      try {
        return f(p);
      } catch (const Error& e) {
        return FileResult{"", diagnostic_no_pos(p, e), kExitError};
      } catch (const std::exception& e) {
        return FileResult{"", p + ": " + e.what() + "\n", kExitError};
      }
    }));
  int code = kExitOk;
  for (auto& j : jobs) {
    FileResult r = j.get();
    std::cout << r.out << std::flush;
    std::cerr << r.err << std::flush;
    code = std::max(code, r.code);
  }
  return code;
}

json trace_json(const calculus::Trace& t) { return t.names(); }

// ------------------------------------------------------------------ check

struct CheckOptions {
  std::vector<std::string> files;
  std::string prims_path;
  bool json_out = false;
};

json witness_json(const shapes::ConflictWitness& w) {
  return {{"side", std::string(shapes::to_string(w.side))},
          {"value", w.value},
          {"top_overlap", w.top_overlap},
          {"left", w.left_origin},
          {"right", w.right_origin},
          {"text", shapes::render(w)}};
}

std::string cycle_path(const decls::Cycle& c) {
  std::string out;
  for (std::size_t i = 0; i < c.path.size(); ++i) {
    if (i) out += " -> ";
    out += c.path[i];
  }
  return out;
}

FileResult run_check(const std::string& path, const shapes::PrimTable& prims, bool json_out) {
  std::string text = read_file(path);
  FileResult r;
  std::vector<decls::Decl> ds;
  try {
    ds = decls::parse_decls(text, prims);
  } catch (const Error& e) {
    return {"", diagnostic(path, e), kExitError};
  }
  std::vector<decls::CheckReport> reports = decls::check_decls(ds, prims);
  bool all_accepted = std::all_of(reports.begin(), reports.end(), [](const auto& rep) {
    return rep.verdict == decls::CheckReport::Verdict::Accepted;
  });
  r.code = all_accepted ? kExitOk : kExitNegative;
  if (json_out) {
    json doc = {{"schema", 1},
                {"file", path},
                {"verdict", all_accepted ? "Accepted" : "Rejected"},
                {"decls", json::array()}};
    for (const auto& rep : reports) {
      json d = {{"name", rep.decl}, {"verdict", std::string(decls::to_string(rep.verdict))}};
      d["shape"] = rep.verdict == decls::CheckReport::Verdict::Accepted
                       ? json(shapes::render(rep.shape))
                       : json(nullptr);
      json unboxed = json::object();
      for (const auto& [ctor, s] : rep.unboxed_shapes) unboxed[ctor] = shapes::render(s);
      d["unboxed"] = unboxed;
      d["witness"] = rep.witness ? witness_json(*rep.witness) : json(nullptr);
      d["cycle_path"] = rep.cycle ? json(rep.cycle->path) : json(nullptr);
      d["cycle_trace"] = rep.cycle ? trace_json(rep.cycle->trace) : json(nullptr);
      doc["decls"].push_back(std::move(d));
    }
    r.out = doc.dump(2) + "\n";
    return r;
  }
  std::ostringstream out;
  for (const auto& rep : reports) {
    switch (rep.verdict) {
      case decls::CheckReport::Verdict::Accepted:
        out << rep.decl << ": Accepted " << shapes::render(rep.shape) << "\n";
        for (const auto& [ctor, s] : rep.unboxed_shapes)
          out << "  " << ctor << ": " << shapes::render(s) << "\n";
        break;
      case decls::CheckReport::Verdict::RejectedConflict: {
        const auto& w = *rep.witness;
        out << rep.decl << ": Rejected\n  " << kConflictBanner << "\n  " << shapes::render(w)
            << " between " << w.left_origin << " and " << w.right_origin << "\n";
        break;
      }
      case decls::CheckReport::Verdict::RejectedCycle: {
        const auto& c = *rep.cycle;
        out << rep.decl << ": Rejected\n  " << kCycleBanner << "\n  cycle: " << cycle_path(c)
            << ", " << c.name << " blocked with trace " << c.trace.render() << "\n";
        break;
      }
    }
  }
  r.out = out.str();
  return r;
}

// ------------------------------------------------------------------- norm

struct NormOptions {
  std::vector<std::string> files;
  bool higher_order = false;
  calculus::Strategy strategy = calculus::Strategy::LeftmostOutermost;
  bool trace = false;
  bool check_measure = false;
  std::uint64_t max_steps = 0;
  bool json_out = false;
};

FileResult run_norm(const std::string& path, const NormOptions& o) {
  std::string text = read_file(path);
  const calculus::Mode mode =
      o.higher_order ? calculus::Mode::ClosedHigherOrder : calculus::Mode::FirstOrder;
  calculus::Program p = calculus::parse_program(text, mode);
  std::ostringstream steps_text;
  json steps_json = json::array();
  std::optional<std::uint64_t> measure_failure;
  calculus::NormalizeOptions nopts;
  nopts.max_steps = o.max_steps;
  if (o.trace || o.check_measure) {
    if (o.trace) {
      calculus::AnnTermPtr start = calculus::annotate(p.root(), {}, {});
      steps_text << "0: " << calculus::render(start, mode) << "\n";
      if (o.check_measure)
        steps_text << "   measure " << measure::render(measure::tree_measure(start, mode)) << "\n";
      json s = {{"step", 0}, {"term", calculus::render(start, mode)}};
      if (o.check_measure) s["measure"] = measure::render(measure::tree_measure(start, mode));
      steps_json.push_back(std::move(s));
    }
    nopts.on_step = [&](const calculus::AnnTermPtr& before, const calculus::StepResult& st,
                        std::uint64_t n) {
      bool ok = true;
      if (o.check_measure) {
        ok = measure::assert_decrease(before, st.next, mode);
        if (!ok && !measure_failure) measure_failure = n;
      }
      if (!o.trace) return;
      std::string term = calculus::render(st.next, mode);
      steps_text << n << ": " << term << "    (" << st.name << " at "
                 << calculus::render_path(st.path) << ")\n";
      json s = {{"step", n},
                {"term", term},
                {"expanded", st.name},
                {"path", calculus::render_path(st.path)}};
      if (o.check_measure) {
        std::string m = measure::render(measure::tree_measure(st.next, mode));
        steps_text << "   measure " << m << (ok ? "" : "  NOT DECREASING") << "\n";
        s["measure"] = m;
        s["measure_ok"] = ok;
      }
      steps_json.push_back(std::move(s));
    };
  }
  calculus::Outcome out = calculus::normalize(p, o.strategy, nopts);

  FileResult r;
  r.code = out.kind == calculus::Outcome::Kind::Normal ? kExitOk : kExitNegative;
  if (measure_failure) {
    r.code = kExitError;
    r.err = path + ": measure did not decrease at step " + std::to_string(*measure_failure) + "\n";
  }
  const char* verdict = out.kind == calculus::Outcome::Kind::Normal     ? "Normal"
                        : out.kind == calculus::Outcome::Kind::Diverges ? "Diverges"
                                                                        : "StepLimit";
  if (o.json_out) {
    json doc = {{"schema", 1},
                {"file", path},
                {"mode", std::string(calculus::to_string(mode))},
                {"strategy", std::string(calculus::to_string(o.strategy))},
                {"verdict", verdict},
                {"steps", out.steps}};
    doc["normal_form"] = out.kind == calculus::Outcome::Kind::Normal
                             ? json(calculus::render(out.normal_form, mode))
                             : json(nullptr);
    doc["final_term"] = calculus::render(out.final_term, mode);
    if (out.kind == calculus::Outcome::Kind::Diverges)
      doc["blocked"] = {{"name", out.blocked_name},
                        {"trace", trace_json(out.blocked_trace)},
                        {"path", calculus::render_path(out.blocked_path)}};
    else
      doc["blocked"] = nullptr;
    doc["measure_ok"] = o.check_measure ? json(!measure_failure) : json(nullptr);
    if (o.trace) doc["trace"] = std::move(steps_json);
    r.out = doc.dump(2) + "\n";
    return r;
  }
  std::ostringstream text_out;
  text_out << steps_text.str();
  switch (out.kind) {
    case calculus::Outcome::Kind::Normal:
      text_out << "normal form: " << calculus::render(out.normal_form, mode) << " (" << out.steps
               << (out.steps == 1 ? " step" : " steps") << ")\n";
      break;
    case calculus::Outcome::Kind::Diverges:
      text_out << "diverges: " << out.blocked_name << " blocked with trace "
               << out.blocked_trace.render() << "\n  after " << out.steps
               << (out.steps == 1 ? " step" : " steps") << " at "
               << calculus::render_path(out.blocked_path) << ": "
               << calculus::render(out.final_term, mode) << "\n";
      break;
    case calculus::Outcome::Kind::StepLimit:
      text_out << "step limit: stopped after " << out.steps << " steps at "
               << calculus::render(out.final_term, mode) << "\n";
      break;
  }
  if (o.check_measure && !measure_failure) text_out << "measure decreased at every step\n";
  r.out = text_out.str();
  return r;
}

// -------------------------------------------------------------------- cpp

FileResult run_cpp(const std::string& path, bool show_hidesets, bool json_out) {
  std::string text = read_file(path);
  cppmacro::MacroFile f = cppmacro::parse_macro_file(text);
  cppmacro::TokenSeq out = cppmacro::expand(f.call, f.macros);
  FileResult r;
  if (json_out) {
    json toks = json::array();
    for (const auto& t : out) toks.push_back({{"text", t.text}, {"hide", t.hide}});
    json doc = {{"schema", 1},
                {"file", path},
                {"output", cppmacro::render(out)},
                {"tokens", std::move(toks)}};
    r.out = doc.dump(2) + "\n";
    return r;
  }
  r.out = cppmacro::render(out, show_hidesets) + "\n";
  return r;
}

FileResult run_compare(const std::string& path, calculus::Strategy strategy, bool json_out) {
  std::string text = read_file(path);
  cppmacro::MacroFile f = cppmacro::parse_macro_file(text);
  cppmacro::AgreementReport a = cppmacro::compare_first_order(f.macros, f.call, strategy);
  FileResult r;
  r.code = a.agree ? kExitOk : kExitNegative;
  const char* kind = a.calculus_kind == calculus::Outcome::Kind::Normal     ? "Normal"
                     : a.calculus_kind == calculus::Outcome::Kind::Diverges ? "Diverges"
                                                                            : "StepLimit";
  if (json_out) {
    json doc = {{"schema", 1},
                {"file", path},
                {"verdict", a.agree ? "Agree" : "Disagree"},
                {"cpp_output", a.cpp_output},
                {"cpp_residual", a.cpp_residual},
                {"calculus_verdict", kind},
                {"calculus_output", a.calculus_output},
                {"steps", a.calculus_steps}};
    doc["normal_form"] = a.calculus_kind == calculus::Outcome::Kind::Normal
                             ? json(a.calculus_output)
                             : json(nullptr);
    r.out = doc.dump(2) + "\n";
    return r;
  }
  std::ostringstream out;
  out << "cpp:      " << a.cpp_output << (a.cpp_residual ? "    (residual macro call)" : "")
      << "\n"
      << "calculus: " << a.calculus_output << "    (" << kind << " after " << a.calculus_steps
      << (a.calculus_steps == 1 ? " step)" : " steps)") << "\n"
      << (a.agree ? "agree" : "disagree") << "\n";
  r.out = out.str();
  return r;
}

// --------------------------------------------------------------- selftest

int run_selftest(const suite::Config& c, bool json_out) {
  std::vector<suite::Result> results = suite::run_all(c);
  bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
  if (json_out) {
    json doc = {{"schema", 1},
                {"seed", c.seed},
                {"cases", c.cases},
                {"verdict", ok ? "Pass" : "Fail"},
                {"suites", json::array()}};
    for (const auto& r : results)
      doc["suites"].push_back({{"name", r.name},
                               {"passed", r.passed()},
                               {"cases", r.cases},
                               {"violations", r.violations},
                               {"summary", r.summary},
                               {"failures", r.failures}});
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const auto& r : results) std::cout << suite::render(r);
    std::cout << (ok ? "all suites passed" : "some suites FAILED") << " (seed " << c.seed
              << ", " << c.cases << " cases)\n";
  }
  return ok ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static checking of [@unboxed] constructors via head shapes, with the "
               "trace-annotated normalizer and macro expander it relies on."};
  app.footer(kGrammars);
  app.require_subcommand(1);

  const std::map<std::string, calculus::Strategy> strategies{
      {"outermost", calculus::Strategy::LeftmostOutermost},
      {"innermost", calculus::Strategy::LeftmostInnermost}};

  CheckOptions check;
  auto* check_cmd = app.add_subcommand("check", "Check the declarations of .decl files");
  check_cmd->add_option("files", check.files, ".decl files")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--prims", check.prims_path, "Primitive table replacing the built-in one")
      ->check(CLI::ExistingFile);
  check_cmd->add_flag("--json", check.json_out, "One JSON document per file");

  NormOptions norm;
  auto* norm_cmd = app.add_subcommand("norm", "Normalize .lam programs under trace monitoring");
  norm_cmd->add_option("files", norm.files, ".lam files")->required()->check(CLI::ExistingFile);
  norm_cmd->add_flag("--higher-order", norm.higher_order,
                     "Closed-higher-order mode: functions may be passed and returned");
  std::string norm_strategy = "outermost";
  norm_cmd->add_option("--strategy", norm_strategy, "outermost (default) or innermost")
      ->check(CLI::IsMember(strategies));
  norm_cmd->add_flag("--trace", norm.trace, "Print every annotated term");
  norm_cmd->add_flag("--check-measure", norm.check_measure,
                     "Check that the termination measure decreases at every step");
  norm_cmd->add_option("--max-steps", norm.max_steps, "Stop after this many steps (0: no limit)");
  norm_cmd->add_flag("--json", norm.json_out, "One JSON document per file");

  std::vector<std::string> cpp_files;
  bool show_hidesets = false, cpp_json = false;
  auto* cpp_cmd = app.add_subcommand("cpp", "Expand a .cpp macro file with Prosser's algorithm");
  cpp_cmd->add_option("files", cpp_files, ".cpp files")->required()->check(CLI::ExistingFile);
  cpp_cmd->add_flag("--show-hidesets", show_hidesets, "Print tokens as tok^{hide,set}");
  cpp_cmd->add_flag("--json", cpp_json, "One JSON document per file");

  std::vector<std::string> compare_files;
  calculus::Strategy compare_strategy = calculus::Strategy::LeftmostOutermost;
  bool compare_json = false;
  auto* compare_cmd = app.add_subcommand(
      "compare-cpp", "Compare Prosser's expansion with the calculus on first-order macros");
  compare_cmd->add_option("files", compare_files, ".cpp files")
      ->required()
      ->check(CLI::ExistingFile);
  std::string compare_strategy_name = "outermost";
  compare_cmd->add_option("--strategy", compare_strategy_name, "outermost (default) or innermost")
      ->check(CLI::IsMember(strategies));
  compare_cmd->add_flag("--json", compare_json, "One JSON document per file");

  suite::Config selftest;
  bool selftest_json = false;
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the oracle suites on seeded corpora");
  selftest_cmd->add_option("--seed", selftest.seed, "Corpus seed")->capture_default_str();
  selftest_cmd->add_option("--cases", selftest.cases, "Corpus size per suite")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  selftest_cmd->add_option("--fuel", selftest.fuel, "Fuel of the unmonitored reducer")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  selftest_cmd->add_flag("--json", selftest_json, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  norm.strategy = strategies.at(norm_strategy);
  compare_strategy = strategies.at(compare_strategy_name);

  try {
    if (*check_cmd) {
      shapes::PrimTable custom;
      if (!check.prims_path.empty()) {
        try {
          custom = shapes::PrimTable::parse(read_file(check.prims_path));
        } catch (const Error& e) {
          std::cerr << diagnostic_no_pos(check.prims_path, e);
          return kExitError;
        }
      }
      const shapes::PrimTable& prims =
          check.prims_path.empty() ? shapes::PrimTable::builtin() : custom;
      return for_each_file(check.files, [&](const std::string& p) {
        return run_check(p, prims, check.json_out);
      });
    }
    if (*norm_cmd)
      return for_each_file(norm.files, [&](const std::string& p) { return run_norm(p, norm); });
    if (*cpp_cmd)
      return for_each_file(cpp_files, [&](const std::string& p) {
        return run_cpp(p, show_hidesets, cpp_json);
      });
    if (*compare_cmd)
      return for_each_file(compare_files, [&](const std::string& p) {
        return run_compare(p, compare_strategy, compare_json);
      });
    if (*selftest_cmd) return run_selftest(selftest, selftest_json);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
