// Acceptance run: one PASS/FAIL line per criterion with its time against the
// limit. Usage: acceptance <path to shapecheck>. Exits 1 when any criterion
// fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fixture.hpp"
#include "shapecheck/calculus.hpp"
#include "shapecheck/cppmacro.hpp"
#include "shapecheck/decls.hpp"
#include "shapecheck/oracle.hpp"
#include "shapecheck/suite.hpp"

namespace {

using namespace shapecheck;
using calculus::Mode;
using calculus::Outcome;
using calculus::Strategy;
using shapecheck::testing::fixture;

struct Check {
  std::vector<std::string> problems;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  }
};

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

RunResult run_cli(const std::string& cli, const std::string& args) {
  std::string cmd = "cd " + quote(SHAPECHECK_FIXTURES) + " && " + quote(cli) + " " + args +
                    " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Annotated reduction sequence, rendered, starting with the root.
std::vector<std::string> reduction(const calculus::Program& p, Outcome* out = nullptr) {
  std::vector<std::string> seq{calculus::render(calculus::annotate(p.root(), {}, {}), p.mode())};
  calculus::NormalizeOptions o;
  o.on_step = [&](const calculus::AnnTermPtr&, const calculus::StepResult& r, std::uint64_t) {
    seq.push_back(calculus::render(r.next, p.mode()));
  };
  Outcome res = calculus::normalize(p, Strategy::LeftmostOutermost, o);
  if (res.kind == Outcome::Kind::Normal) seq.back() = calculus::render(res.normal_form, p.mode());
  if (out != nullptr) *out = res;
  return seq;
}

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

void from_suite(Check& c, const suite::Result& r) {
  c.expect(r.passed(), r.name + ": " + std::to_string(r.violations) + " violation(s)");
  for (const auto& f : r.failures) c.problems.push_back(f);
  c.detail = "cases=" + std::to_string(r.cases) + ", " + r.summary;
}

Check fixture_verdicts(const std::string& cli) {
  Check c;
  struct Case {
    const char* name;
    int exit;
  };
  int n = 0;
  for (Case k : {Case{"zarith", 0}, Case{"clash", 1}, Case{"loop", 1}, Case{"harmful", 1},
                 Case{"harmless", 1}, Case{"ropes", 0}}) {
    RunResult r = run_cli(cli, std::string("check decl/") + k.name + ".decl");
    c.expect(r.exit_code == k.exit, std::string(k.name) + ": exit " + std::to_string(r.exit_code));
    c.expect(r.out == fixture(std::string("golden/check_") + k.name + ".out"),
             std::string(k.name) + ": output differs from golden");
    ++n;
  }
  // The verdicts themselves, independently of the rendering.
  using V = decls::CheckReport::Verdict;
  auto report = [](const char* f, std::size_t i) {
    return decls::check_decls(decls::parse_decls(fixture(std::string("decl/") + f + ".decl")))[i];
  };
  auto z = report("zarith", 1);
  c.expect(z.verdict == V::Accepted && z.unboxed_shapes.size() == 2 &&
               z.unboxed_shapes[0].first == "Small" &&
               z.unboxed_shapes[0].second == shapes::parse_shape("(imm: top; block: {})") &&
               z.unboxed_shapes[1].first == "Big" &&
               z.unboxed_shapes[1].second == shapes::parse_shape("(imm: {}; block: {255})"),
           "zarith: Small and Big shapes");
  auto clash = report("clash", 0);
  c.expect(clash.verdict == V::RejectedConflict && clash.witness &&
               clash.witness->side == shapes::Side::Imm,
           "clash: Imm witness");
  c.expect(report("loop", 1).verdict == V::RejectedCycle, "loop: cycle");
  c.expect(report("harmful", 0).verdict == V::RejectedCycle, "harmful: cycle");
  c.expect(report("harmless", 0).verdict == V::RejectedCycle, "harmless: cycle");
  c.expect(report("ropes", 0).verdict == V::Accepted, "ropes: accepted");
  c.detail = std::to_string(n) + " golden outputs";
  return c;
}

Check lambda_fixtures() {
  Check c;
  auto fo = [](const char* f) {
    return calculus::parse_program(fixture(std::string("lam/") + f + ".lam"), Mode::FirstOrder);
  };
  auto ho = [](const char* f) {
    return calculus::parse_program(fixture(std::string("lam/") + f + ".lam"),
                                   Mode::ClosedHigherOrder);
  };
  Outcome o;
  reduction(fo("id"), &o);
  c.expect(o.kind == Outcome::Kind::Normal && o.steps == 2 &&
               calculus::render(o.normal_form, Mode::FirstOrder) == "int",
           "id(id(int))");
  reduction(fo("loop"), &o);
  c.expect(o.kind == Outcome::Kind::Diverges && o.steps == 1 && o.blocked_trace.render() == "[loop]",
           "loop(int)");

  // The reduction rule extends the trace of the g1 application node, so the
  // fourth term carries [g0,g1]; the printed display shows [g0].
  std::vector<std::string> nil{"g0(fortytwo)[]", "nil(g1)[g0](fortytwo)[g0]", "g1(fortytwo)[g0]",
                               "nil(fortytwo)[g0,g1]", "fortytwo"};
  auto nil_seq = reduction(ho("nil"), &o);
  c.expect(nil_seq == nil && o.steps == 4, "NIL: " + join(nil_seq, " -> "));
  std::vector<std::string> aa{"a(a)[](a)[](a)[]", "b(a)[](a)[]", "a(a)[]", "b"};
  auto aa_seq = reduction(ho("aa"), &o);
  c.expect(aa_seq == aa && o.steps == 3, "a(a)(a)(a): " + join(aa_seq, " -> "));
  std::vector<std::string> delta{"delta(delta)[]", "delta(delta)[delta]"};
  auto delta_seq = reduction(ho("delta"), &o);
  c.expect(delta_seq == delta && o.kind == Outcome::Kind::Diverges && o.steps == 1,
           "delta(delta): " + join(delta_seq, " -> "));
  auto fpq_seq = reduction(ho("fpq"), &o);
  bool reached_done = false;
  for (const auto& t : fpq_seq) reached_done |= t == "done";
  c.expect(o.kind == Outcome::Kind::Diverges && !reached_done &&
               calculus::render(o.final_term, Mode::ClosedHigherOrder) == "f(stop,stop)[f]",
           "f(id,stop): " + join(fpq_seq, " -> "));
  c.detail = "NIL fourth term uses the rule-derived trace [g0,g1]";
  return c;
}

Check prosser(const suite::Config& cfg) {
  Check c;
  from_suite(c, suite::prosser_agreement(cfg));
  struct Case {
    const char* file;
    const char* expected;
  };
  for (Case k : {Case{"nil", "42"}, Case{"aa", "b"}, Case{"fpq", "f(stop,stop)"}}) {
    cppmacro::MacroFile f = cppmacro::parse_macro_file(fixture(std::string("cpp/") + k.file + ".cpp"));
    std::string got = cppmacro::render(cppmacro::expand(f.call, f.macros));
    c.expect(got == k.expected, std::string(k.file) + ": got " + got);
  }
  return c;
}

Check enumeration() {
  Check c;
  std::vector<std::string> srcs;
  for (const char* f : {"zarith", "clash", "loop", "harmful", "harmless", "ropes", "names"})
    srcs.push_back(fixture(std::string("decl/") + f + ".decl"));
  from_suite(c, suite::enumeration_soundness(srcs, 3));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <shapecheck binary>\n";
    return 2;
  }
  const std::string cli = std::filesystem::absolute(argv[1]).string();
  suite::Config cfg;  // seed 42, 1000 cases, fuel 1e5

  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no time limit
    std::function<Check()> run;
  };
  std::vector<Criterion> criteria{
      {1, "fixture verdicts", 1, [&] { return fixture_verdicts(cli); }},
      {2, "lambda fixtures", 1, [] { return lambda_fixtures(); }},
      {3, "measure monotonicity", 60,
       [&] {
         Check c;
         from_suite(c, suite::measure_monotonicity(cfg));
         return c;
       }},
      {4, "normalization vs fuel", 120,
       [&] {
         Check c;
         from_suite(c, suite::reduction_agreement(cfg));
         return c;
       }},
      {5, "prosser agreement", 0, [&] { return prosser(cfg); }},
      {6, "shape semantics", 30,
       [&] {
         Check c;
         from_suite(c, suite::shape_semantics(cfg));
         return c;
       }},
      {7, "enumeration soundness", 30, [] { return enumeration(); }},
      {8, "monitor demonstrations", 0,
       [] {
         Check c;
         from_suite(c, suite::monitor_demonstrations());
         return c;
       }},
  };

  int failed = 0;
  for (const auto& k : criteria) {
    auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = k.run();
    } catch (const std::exception& e) {
      c.problems.push_back(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (k.limit_s > 0 && s >= k.limit_s)
      c.problems.push_back("took " + std::to_string(s) + " s");
    bool ok = c.problems.empty();
    failed += !ok;
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << (ok ? "PASS" : "FAIL") << "  " << k.id << "  " << k.name << "  " << s << " s";
    if (k.limit_s > 0) line << " (limit " << static_cast<int>(k.limit_s) << " s)";
    if (!c.detail.empty()) line << "  " << c.detail;
    std::cout << line.str() << "\n";
    for (const auto& p : c.problems) std::cout << "      " << p << "\n";
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
