#include "shapecheck/suite.hpp"

#include <chrono>
#include <sstream>
#include <variant>

#include "shapecheck/calculus.hpp"
#include "shapecheck/cppmacro.hpp"
#include "shapecheck/decls.hpp"
#include "shapecheck/error.hpp"
#include "shapecheck/measure.hpp"
#include "shapecheck/oracle.hpp"
#include "shapecheck/shapes.hpp"

namespace shapecheck::suite {

using calculus::Mode;
using calculus::Outcome;
using calculus::Strategy;

namespace {

constexpr std::size_t kMaxFailures = 5;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void fail(Result& r, const std::string& what) {
  ++r.violations;
  if (r.failures.size() < kMaxFailures) r.failures.push_back(what);
}

std::string where(const Config& c, std::size_t i) {
  return "seed " + std::to_string(c.seed) + " case " + std::to_string(i);
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n') ch = ' ';
  return s;
}

}  // namespace

Result measure_monotonicity(const Config& c) {
  Timer timer;
  Result r;
  r.name = "measure-monotonicity";
  std::uint64_t steps = 0;
  for (Mode mode : {Mode::FirstOrder, Mode::ClosedHigherOrder}) {
    oracle::ProgramGenParams gp;
    gp.mode = mode;
    auto programs = oracle::gen_programs(c.seed, gp, c.cases);
    for (std::size_t i = 0; i < programs.size(); ++i) {
      ++r.cases;
      for (Strategy s : {Strategy::LeftmostOutermost, Strategy::LeftmostInnermost}) {
        calculus::NormalizeOptions opts;
        opts.on_step = [&](const calculus::AnnTermPtr& before, const calculus::StepResult& st,
                           std::uint64_t n) {
          ++steps;
          if (!measure::assert_decrease(before, st.next, mode))
            fail(r, where(c, i) + " " + std::string(to_string(mode)) + " " +
                        std::string(to_string(s)) + " step " + std::to_string(n) + ": " +
                        calculus::render(before, mode) + " -> " +
                        calculus::render(st.next, mode));
        };
        calculus::normalize(programs[i], s, opts);
      }
    }
  }
  r.summary = std::to_string(r.cases) + " programs, " + std::to_string(steps) + " steps checked";
  r.seconds = timer.seconds();
  return r;
}

Result reduction_agreement(const Config& c) {
  Timer timer;
  Result r;
  r.name = "reduction-agreement";
  oracle::ProgramGenParams gp;
  auto programs = oracle::gen_programs(c.seed, gp, c.cases);
  std::uint64_t normal = 0, diverges = 0;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    const calculus::Program& p = programs[i];
    ++r.cases;
    oracle::FuelOutcome ref = oracle::fuel_normalize(p, Strategy::LeftmostOutermost, c.fuel);
    for (Strategy s : {Strategy::LeftmostOutermost, Strategy::LeftmostInnermost}) {
      Outcome o = calculus::normalize(p, s);
      std::string tag = where(c, i) + " " + std::string(to_string(s)) + ": ";
      if (o.kind == Outcome::Kind::Normal) {
        if (s == Strategy::LeftmostOutermost) ++normal;
        if (ref.kind != oracle::FuelOutcome::Kind::Normal)
          fail(r, tag + "annotated normal form " + calculus::render(o.normal_form, p.mode()) +
                      " but reference ran out of fuel");
        else if (!calculus::equal(ref.normal_form, o.normal_form))
          fail(r, tag + "annotated " + calculus::render(o.normal_form, p.mode()) +
                      " vs reference " + calculus::render(ref.normal_form, p.mode()));
      } else if (o.kind == Outcome::Kind::Diverges && s == Strategy::LeftmostOutermost) {
        ++diverges;
        if (ref.kind != oracle::FuelOutcome::Kind::OutOfFuel)
          fail(r, tag + "blocked on " + o.blocked_name + " but reference reached " +
                      calculus::render(ref.normal_form, p.mode()) + " in " +
                      std::to_string(ref.steps) + " steps");
      }
    }
  }
  r.summary = std::to_string(r.cases) + " programs, " + std::to_string(normal) + " normal, " +
              std::to_string(diverges) + " diverging (leftmost-outermost)";
  r.seconds = timer.seconds();
  return r;
}

Result prosser_agreement(const Config& c) {
  Timer timer;
  Result r;
  r.name = "prosser-agreement";
  auto sources = oracle::gen_macros(c.seed, {}, c.cases);
  std::uint64_t residual = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    ++r.cases;
    try {
      cppmacro::MacroFile f = cppmacro::parse_macro_file(sources[i]);
      cppmacro::AgreementReport a = cppmacro::compare_first_order(f.macros, f.call);
      residual += a.cpp_residual;
      if (!a.agree)
        fail(r, where(c, i) + ": cpp `" + a.cpp_output + "` vs calculus `" + a.calculus_output +
                    "`: " + one_line(sources[i]));
    } catch (const Error& e) {
      fail(r, where(c, i) + ": " + e.what() + ": " + one_line(sources[i]));
    }
  }
  r.summary = std::to_string(r.cases) + " macro systems, " + std::to_string(residual) +
              " with a residual call";
  r.seconds = timer.seconds();
  return r;
}

namespace {

constexpr shapes::MachInt kUniverseLo = -4;
constexpr shapes::MachInt kUniverseHi = 260;

shapes::SubShape random_side(oracle::Rng& rng, shapes::MachInt lo, shapes::MachInt hi) {
  if (rng.chance(0.15)) return shapes::SubShape::top();
  std::vector<shapes::MachInt> vals;
  std::size_t n = rng.below(5);
  // Half the sets come from a narrow window so that overlaps are common.
  bool narrow = rng.chance(0.5);
  for (std::size_t k = 0; k < n; ++k) {
    shapes::MachInt span = narrow ? 6 : hi - lo + 1;
    shapes::MachInt base = narrow ? std::max<shapes::MachInt>(lo, 0) : lo;
    vals.push_back(base + static_cast<shapes::MachInt>(rng.below(static_cast<std::size_t>(span))));
  }
  return shapes::SubShape::fin(std::move(vals));
}

shapes::HeadShapeStx random_shape(oracle::Rng& rng) {
  return shapes::HeadShapeStx::make(random_side(rng, kUniverseLo, kUniverseHi),
                                    random_side(rng, 0, shapes::kMaxTag));
}

}  // namespace

Result shape_semantics(const Config& c) {
  Timer timer;
  Result r;
  r.name = "shape-semantics";
  oracle::Rng rng(c.seed);
  std::size_t pairs = std::max<std::size_t>(c.cases * 10, 1);
  std::uint64_t disjoint = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    ++r.cases;
    shapes::HeadShapeStx a = random_shape(rng), b = random_shape(rng);
    shapes::HeadShapeStx u = shapes::shape_union(a, b);
    auto du = shapes::shape_disjoint_union(a, b);
    std::string tag = where(c, i) + " " + shapes::render(a) + " , " + shapes::render(b) + ": ";
    bool overlap = false;
    bool union_ok = true;
    for (shapes::Side side : {shapes::Side::Imm, shapes::Side::Block}) {
      for (shapes::MachInt v = kUniverseLo; v <= kUniverseHi; ++v) {
        shapes::Head h{side, v};
        bool in_a = shapes::shape_mem(h, a), in_b = shapes::shape_mem(h, b);
        overlap = overlap || (in_a && in_b);
        if (shapes::shape_mem(h, u) != (in_a || in_b)) union_ok = false;
      }
    }
    if (!union_ok) fail(r, tag + "union " + shapes::render(u) + " differs pointwise");
    if (const auto* w = std::get_if<shapes::ConflictWitness>(&du)) {
      if (!overlap) fail(r, tag + "witness " + shapes::render(*w) + " for disjoint shapes");
      else if (!shapes::shape_mem(w->head(), a) || !shapes::shape_mem(w->head(), b))
        fail(r, tag + "witness " + shapes::render(*w) + " is not a shared head");
    } else {
      ++disjoint;
      if (overlap) fail(r, tag + "overlapping shapes accepted as disjoint");
      else if (std::get<shapes::HeadShapeStx>(du) != u)
        fail(r, tag + "disjoint union differs from union");
    }
  }
  r.summary = std::to_string(r.cases) + " pairs, " + std::to_string(disjoint) + " disjoint";
  r.seconds = timer.seconds();
  return r;
}

Result enumeration_soundness(const std::vector<std::string>& decl_sources, int depth) {
  Timer timer;
  Result r;
  r.name = "enumeration-soundness";
  std::uint64_t values = 0, accepted = 0;
  const shapes::PrimTable& prims = shapes::PrimTable::builtin();
  for (std::size_t i = 0; i < decl_sources.size(); ++i) {
    std::string src = "source " + std::to_string(i);
    try {
      std::vector<decls::Decl> ds = decls::parse_decls(decl_sources[i], prims);
      std::vector<decls::CheckReport> reports = decls::check_decls(ds, prims);
      decls::DeclEnv env(ds, prims);
      for (std::size_t k = 0; k < ds.size(); ++k) {
        const decls::Decl& d = ds[k];
        const decls::CheckReport& rep = reports[k];
        if (rep.verdict != decls::CheckReport::Verdict::Accepted ||
            d.body == decls::Decl::Body::Abstract)
          continue;
        ++accepted;
        ++r.cases;
        std::string tag = src + " " + d.name + ": ";
        std::vector<decls::DispatchTest> tests;
        if (d.body == decls::Decl::Body::Variant) {
          for (const auto& ctor : d.ctors) tests.push_back(decls::match_plan(d, rep, ctor.name));
          for (std::size_t x = 0; x < tests.size(); ++x)
            for (std::size_t y = x + 1; y < tests.size(); ++y)
              if (std::holds_alternative<shapes::ConflictWitness>(
                      shapes::shape_disjoint_union(tests[x].heads, tests[y].heads)))
                fail(r, tag + "tests for " + tests[x].ctor + " and " + tests[y].ctor +
                            " overlap");
        }
        for (const char* arg : {"int", "string"}) {
          decls::TypeExpr t = oracle::instantiate(d, decls::TypeExpr::prim(arg));
          for (const oracle::Value& v : oracle::enumerate_values(t, env, depth)) {
            ++values;
            shapes::Head h = oracle::head_of(v, t, env);
            if (!shapes::shape_mem(h, rep.shape)) {
              fail(r, tag + v.render() + " has head " + shapes::render(h) + " outside " +
                          shapes::render(rep.shape));
              continue;
            }
            if (tests.empty()) continue;
            for (const auto& test : tests) {
              bool selected = test.matches(h);
              bool expected = v.kind == oracle::Value::Kind::Ctor && v.name == test.ctor;
              if (selected != expected)
                fail(r, tag + v.render() + (selected ? " matched by " : " not matched by ") +
                            test.ctor);
            }
          }
        }
      }
    } catch (const Error& e) {
      fail(r, src + ": " + e.what());
    }
  }
  r.summary = std::to_string(decl_sources.size()) + " files, " + std::to_string(accepted) +
              " accepted declarations, " + std::to_string(values) + " values";
  r.seconds = timer.seconds();
  return r;
}

Result encoding_agreement(const Config& c) {
  Timer timer;
  Result r;
  r.name = "encoding-agreement";
  auto sources = oracle::gen_decls(c.seed, {}, c.cases);
  const shapes::PrimTable& prims = shapes::PrimTable::builtin();
  std::uint64_t cycles = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    try {
      std::vector<decls::Decl> ds = decls::parse_decls(sources[i], prims);
      decls::DeclEnv env(ds, prims);
      calculus::Program enc = decls::translate_to_program(ds, prims);
      for (const decls::Decl& d : ds) {
        if (d.body == decls::Decl::Body::Abstract) continue;
        ++r.cases;
        std::string tag = where(c, i) + " " + d.name + ": ";
        std::vector<decls::TypeExpr> params;
        for (const auto& p : d.params) params.push_back(decls::TypeExpr::var(p));
        auto nf = decls::normalize_type(decls::TypeExpr::app(d.name, std::move(params)), env);
        Outcome o = calculus::normalize(enc.with_root(decls::translate_root(d)),
                                        Strategy::LeftmostOutermost);
        if (const auto* cyc = std::get_if<decls::Cycle>(&nf)) {
          ++cycles;
          if (o.kind != Outcome::Kind::Diverges)
            fail(r, tag + "declaration blocked on " + cyc->name + ", encoding normalized to " +
                        calculus::render(o.normal_form, enc.mode()));
          continue;
        }
        if (o.kind != Outcome::Kind::Normal) {
          fail(r, tag + "encoding blocked on " + o.blocked_name + ", declaration normalized to " +
                      decls::render(std::get<decls::SumNF>(nf)));
          continue;
        }
        std::optional<decls::SumNF> back = decls::read_back(o.normal_form, env);
        if (!back || !decls::same_components(*back, std::get<decls::SumNF>(nf)))
          fail(r, tag + "components " + decls::render(std::get<decls::SumNF>(nf)) +
                      " vs encoding " + calculus::render(o.normal_form, enc.mode()));
      }
    } catch (const Error& e) {
      fail(r, where(c, i) + ": " + e.what());
    }
  }
  r.summary = std::to_string(sources.size()) + " files, " + std::to_string(r.cases) +
              " declarations, " + std::to_string(cycles) + " cycles";
  r.seconds = timer.seconds();
  return r;
}

Result monitor_demonstrations() {
  Timer timer;
  Result r;
  r.name = "monitor-demonstrations";
  using Kind = oracle::MonitorOutcome::Kind;
  calculus::Program loop =
      calculus::parse_program("let rec loop(a) = loop(list(a)) in loop(int)", Mode::FirstOrder);
  calculus::Program id =
      calculus::parse_program("let rec id(a) = a in id(id(int))", Mode::FirstOrder);
  auto expect = [&](const std::string& what, bool ok) {
    ++r.cases;
    if (!ok) fail(r, what);
  };
  const Strategy lo = Strategy::LeftmostOutermost;
  oracle::MonitorOutcome whole_loop = oracle::naive_whole_term_monitor(loop, lo, 1000);
  expect("whole-term monitor runs loop(int) out of fuel at 1000 steps",
         whole_loop.kind == Kind::OutOfFuel && whole_loop.steps == 1000);
  oracle::MonitorOutcome whole_id = oracle::naive_whole_term_monitor(id, lo, 1000);
  expect("whole-term monitor normalizes id(id(int)) to int",
         whole_id.kind == Kind::Normal && calculus::render(whole_id.term, Mode::FirstOrder) == "int");
  oracle::MonitorOutcome head_id = oracle::head_function_monitor(id, lo, 1000);
  expect("head-function monitor blocks id(id(int)) before its normal form",
         head_id.kind == Kind::Blocked && head_id.steps == 1 && head_id.blocked_name == "id");
  oracle::MonitorOutcome head_loop = oracle::head_function_monitor(loop, lo, 1000);
  expect("head-function monitor blocks loop(int) after 1 step",
         head_loop.kind == Kind::Blocked && head_loop.steps == 1);
  Outcome trace_loop = calculus::normalize(loop, lo);
  expect("trace monitor blocks loop(int) after 1 step with trace [loop]",
         trace_loop.kind == Outcome::Kind::Diverges && trace_loop.steps == 1 &&
             trace_loop.blocked_name == "loop" && trace_loop.blocked_trace.render() == "[loop]");
  Outcome trace_id = calculus::normalize(id, lo);
  expect("trace monitor normalizes id(id(int)) to int in 2 steps",
         trace_id.kind == Outcome::Kind::Normal && trace_id.steps == 2 &&
             calculus::render(trace_id.normal_form, Mode::FirstOrder) == "int");
  r.summary = "loop(int) and id(id(int)) under three monitors";
  r.seconds = timer.seconds();
  return r;
}

std::vector<Result> run_all(const Config& c) {
  std::vector<Result> out;
  out.push_back(measure_monotonicity(c));
  out.push_back(reduction_agreement(c));
  out.push_back(prosser_agreement(c));
  out.push_back(shape_semantics(c));
  oracle::DeclGenParams gp;
  out.push_back(enumeration_soundness(oracle::gen_decls(c.seed, gp, std::min<std::size_t>(c.cases, 200)), 2));
  out.push_back(encoding_agreement(c));
  out.push_back(monitor_demonstrations());
  return out;
}

std::string render(const Result& r) {
  std::ostringstream out;
  out << (r.passed() ? "PASS" : "FAIL") << "  " << r.name << "  cases=" << r.cases
      << "  violations=" << r.violations << "  " << r.summary << "\n";
  for (const auto& f : r.failures) out << "    " << f << "\n";
  return out.str();
}

}  // namespace shapecheck::suite
