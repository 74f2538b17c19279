#include <gtest/gtest.h>

#include <set>

#include "shapecheck/calculus.hpp"
#include "shapecheck/error.hpp"
#include "shapecheck/oracle.hpp"

namespace {

using namespace shapecheck;
using namespace shapecheck::calculus;

constexpr Mode FO = Mode::FirstOrder;
constexpr Mode HO = Mode::ClosedHigherOrder;
constexpr Strategy LO = Strategy::LeftmostOutermost;
constexpr Strategy LI = Strategy::LeftmostInnermost;

ErrorKind parse_error(std::string_view text, Mode mode) {
  try {
    parse_program(text, mode);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << text;
  return ErrorKind::IoError;
}

// Every annotated term of the reduction, starting with the initial one.
std::vector<std::string> reduction(const Program& p, Strategy s = LO) {
  std::vector<std::string> out{render(annotate(p.root(), {}, {}), p.mode())};
  NormalizeOptions o;
  o.on_step = [&](const AnnTermPtr&, const StepResult& r, std::uint64_t) {
    out.push_back(render(r.next, p.mode()));
  };
  normalize(p, s, o);
  return out;
}

TEST(Parse, SingleDefinition) {
  Program p = parse_program("let rec id(a) = a in id(int)", FO);
  ASSERT_EQ(p.defs().size(), 1u);
  EXPECT_TRUE(p.root()->is_app());
  EXPECT_EQ(render(p.root(), FO), "id(int)");
}

TEST(Parse, HigherOrderOnlyUnderFlag) {
  const char* aa = "let rec a(x) = b and b(x) = x in a(a)(a)(a)";
  EXPECT_NO_THROW(parse_program(aa, HO));
  EXPECT_EQ(parse_error(aa, FO), ErrorKind::ArityMismatch);
}

TEST(Parse, Errors) {
  EXPECT_EQ(parse_error("let rec id(a) = a in id(int", FO), ErrorKind::SyntaxError);
  EXPECT_EQ(parse_error("let rec f(a) = a and f(b) = b in f(c)", FO),
            ErrorKind::DuplicateDefinition);
  EXPECT_EQ(parse_error("let rec f(a, a) = a in f(c, c)", FO), ErrorKind::SyntaxError);
  EXPECT_EQ(parse_error("let rec f(a) = a in f(c, c)", FO), ErrorKind::ArityMismatch);
  EXPECT_EQ(parse_error("let rec f(a) = Big in f(c)", FO), ErrorKind::SyntaxError);
}

TEST(Parse, ErrorPosition) {
  try {
    parse_program("let rec id(a) = a\nin id(int))", FO);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.pos().line, 2u);
    EXPECT_EQ(e.pos().column, 11u);
  }
}

TEST(Parse, CommentsAndRoundTrip) {
  Program p = parse_program("# ids\nlet rec id(a) = a # body\n and k(x, y) = x in k(id(u), v)",
                            FO);
  Program q = parse_program(render(p), FO);
  EXPECT_EQ(render(q), render(p));
}

TEST(Annotate, SubstitutedArgumentsKeepTheirTraces) {
  TermPtr body = Term::call("list", {Term::var("a")});
  AnnTermPtr arg = AnnTerm::call("int", {}, Trace({"g"}));
  AnnTermPtr t = annotate(body, {{"a", arg}}, Trace({"f"}));
  EXPECT_EQ(render(t, FO), "list[f](int[g])");
  EXPECT_EQ(t->args()[0], arg);
}

TEST(Annotate, EraseInverts) {
  Program p = parse_program("let rec f(x) = x in g(f(h(y)), z)", FO);
  EXPECT_TRUE(equal(erase(annotate(p.root(), {}, Trace({"q"}))), p.root()));
}

TEST(Paths, ReplaceAndSubterm) {
  Program p = parse_program("let rec f(x) = x in g(f(h(y)), z)", FO);
  EXPECT_EQ(render(subterm_at(p.root(), Path{1, 1}), FO), "h(y)");
  EXPECT_EQ(render(replace_at(p.root(), Path{2}, Term::call("w", {})), FO), "g(f(h(y)),w)");
  EXPECT_THROW(subterm_at(p.root(), Path{3}), std::out_of_range);
  EXPECT_EQ(render_path({}), "root");
  EXPECT_EQ(render_path({1, 2}), "1.2");
}

TEST(Fixtures, IdIdNormalizesInTwoSteps) {
  Program p = parse_program("let rec id(a) = a in id(id(int))", FO);
  Outcome o = normalize(p, LO);
  EXPECT_EQ(o.kind, Outcome::Kind::Normal);
  EXPECT_EQ(o.steps, 2u);
  EXPECT_EQ(render(o.normal_form, FO), "int");
  EXPECT_EQ(normalize(p, LI).steps, 2u);
}

TEST(Fixtures, LoopDivergesAfterOneStep) {
  Program p = parse_program("let rec loop(a) = loop(list(a)) in loop(int)", FO);
  Outcome o = normalize(p, LO);
  EXPECT_EQ(o.kind, Outcome::Kind::Diverges);
  EXPECT_EQ(o.steps, 1u);
  EXPECT_EQ(o.blocked_name, "loop");
  EXPECT_EQ(o.blocked_trace.render(), "[loop]");
  EXPECT_EQ(render(o.final_term, FO), "loop[loop](list[loop](int[]))");
}

TEST(Fixtures, NilReducesToFortytwo) {
  Program p = parse_program(
      "let rec nil(x) = x and g0(arg) = nil(g1)(arg) and g1(arg) = nil(arg) in g0(fortytwo)", HO);
  // The third term carries [g0,g1]: the g1 expansion extends the trace of
  // its own application node.
  std::vector<std::string> expected{"g0(fortytwo)[]", "nil(g1)[g0](fortytwo)[g0]",
                                    "g1(fortytwo)[g0]", "nil(fortytwo)[g0,g1]", "fortytwo"};
  EXPECT_EQ(reduction(p), expected);
}

TEST(Fixtures, AaReducesToB) {
  Program p = parse_program("let rec a(x) = b and b(x) = x in a(a)(a)(a)", HO);
  std::vector<std::string> expected{"a(a)[](a)[](a)[]", "b(a)[](a)[]", "a(a)[]", "b"};
  EXPECT_EQ(reduction(p), expected);
}

TEST(Fixtures, DeltaBlocks) {
  Program p = parse_program("let rec delta(x) = x(x) in delta(delta)", HO);
  Outcome o = normalize(p, LO);
  EXPECT_EQ(o.kind, Outcome::Kind::Diverges);
  EXPECT_EQ(o.steps, 1u);
  EXPECT_EQ(render(o.final_term, HO), "delta(delta)[delta]");
}

TEST(Fixtures, WeaklyNormalizingTermBlocks) {
  Program p = parse_program(
      "let rec f(p, q) = p(f(q, q)) and id(x) = x and stop(x) = done in f(id, stop)", HO);
  Outcome o = normalize(p, LO);
  EXPECT_EQ(o.kind, Outcome::Kind::Diverges);
  EXPECT_EQ(o.steps, 2u);
  EXPECT_EQ(render(o.final_term, HO), "f(stop,stop)[f]");
  // The unmonitored reduction does reach the normal form.
  auto plain = oracle::fuel_normalize(p, LO, 100);
  EXPECT_EQ(plain.kind, oracle::FuelOutcome::Kind::Normal);
  EXPECT_EQ(render(plain.normal_form, HO), "done");
}

TEST(Strategy, BlockedRedexDoesNotStopReduction) {
  Program p = parse_program("let rec loop(a) = loop(a) and k(x) = c in pair(loop(z), k(z))", FO);
  Outcome o = normalize(p, LO);
  EXPECT_EQ(o.kind, Outcome::Kind::Diverges);
  EXPECT_EQ(o.steps, 2u);
  EXPECT_EQ(o.blocked_name, "loop");
  EXPECT_EQ(render(o.final_term, FO), "pair[](loop[loop](z[]),c[k])");
}

TEST(Strategy, OrderOfRedexes) {
  Program p = parse_program("let rec f(x) = x in f(g(f(a), f(b)))", FO);
  auto rs = find_redexes(p, annotate(p.root(), {}, {}));
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[0].path, Path{});
  EXPECT_EQ(rs[1].path, (Path{1, 1}));
  EXPECT_EQ(rs[2].path, (Path{1, 2}));
  StepResult inner = step(p, annotate(p.root(), {}, {}), LI);
  EXPECT_EQ(inner.path, (Path{1, 1}));
}

TEST(Strategy, HigherOrderWrongArityIsStuck) {
  Program p = parse_program("let rec f(x, y) = x in f(a)", HO);
  Outcome o = normalize(p, LO);
  EXPECT_EQ(o.kind, Outcome::Kind::Normal);
  EXPECT_EQ(o.steps, 0u);
}

TEST(Strategy, StepLimit) {
  Program p = parse_program("let rec f(x) = g(x, x) and g(a, b) = h(a) in f(f(f(z)))", FO);
  NormalizeOptions o;
  o.max_steps = 2;
  Outcome out = normalize(p, LO, o);
  EXPECT_EQ(out.kind, Outcome::Kind::StepLimit);
  EXPECT_EQ(out.steps, 2u);
}

TEST(Contract, RejectsBlockedRedex) {
  Program p = parse_program("let rec loop(a) = loop(a) in loop(z)", FO);
  AnnTermPtr t = annotate(p.root(), {}, Trace({"loop"}));
  EXPECT_THROW(contract_at(p, t, {}), std::invalid_argument);
  EXPECT_THROW(contract_at(p, t, {1}), std::invalid_argument);
}

// ------------------------------------------------------------ properties

// Plain one-step contraction at `path`, written independently of the
// library's substitution.
TermPtr contract_plain(const Program& p, const TermPtr& t, const Path& path) {
  const TermPtr& redex = subterm_at(t, path);
  const Definition& d = *p.find(*redex->head_name());
  std::function<TermPtr(const TermPtr&)> inst = [&](const TermPtr& b) -> TermPtr {
    if (b->is_var()) {
      for (std::size_t i = 0; i < d.params.size(); ++i)
        if (d.params[i] == b->id()) return redex->args()[i];
      return b;
    }
    if (b->is_name()) return b;
    std::vector<TermPtr> args;
    for (const auto& a : b->args()) args.push_back(inst(a));
    return Term::app(inst(b->head()), std::move(args));
  };
  return replace_at(t, path, inst(d.body));
}

void check_traces(const Program& p, const AnnTermPtr& t, std::vector<std::string>& bad) {
  std::vector<const AnnTerm*> work{t.get()};
  while (!work.empty()) {
    const AnnTerm* n = work.back();
    work.pop_back();
    if (!n->is_app()) continue;
    std::set<Name> seen;
    for (const Name& f : n->annotation().names())
      if (!p.is_defined(f) || !seen.insert(f).second) bad.push_back(n->annotation().render());
    work.push_back(n->head().get());
    for (const auto& a : n->args()) work.push_back(a.get());
  }
}

class Generated : public ::testing::TestWithParam<std::tuple<Mode, Strategy>> {};

TEST_P(Generated, TracesValidAndStepsSimulatePlainReduction) {
  auto [mode, strategy] = GetParam();
  oracle::ProgramGenParams gp;
  gp.mode = mode;
  std::size_t steps = 0;
  for (const Program& p : oracle::gen_programs(7, gp, 300)) {
    std::vector<std::string> bad;
    NormalizeOptions o;
    o.on_step = [&](const AnnTermPtr& before, const StepResult& r, std::uint64_t) {
      ++steps;
      check_traces(p, r.next, bad);
      TermPtr expected = contract_plain(p, erase(before), r.path);
      if (!equal(expected, erase(r.next))) bad.push_back("simulation at " + render_path(r.path));
    };
    Outcome out = normalize(p, strategy, o);
    EXPECT_TRUE(bad.empty()) << render(p) << "\n" << bad.front();
    if (out.kind == Outcome::Kind::Normal) {
      EXPECT_TRUE(find_redexes(p, out.final_term).empty());
    }
    if (out.kind == Outcome::Kind::Diverges) {
      for (const auto& r : find_redexes(p, out.final_term))
        EXPECT_EQ(r.status, RedexStatus::Blocked) << render(p);
      EXPECT_TRUE(out.blocked_trace.contains(out.blocked_name));
    }
  }
  EXPECT_GT(steps, 300u);
}

TEST_P(Generated, RenderParseRoundTrip) {
  auto [mode, strategy] = GetParam();
  (void)strategy;
  oracle::ProgramGenParams gp;
  gp.mode = mode;
  for (const Program& p : oracle::gen_programs(11, gp, 200)) {
    Program q = parse_program(render(p), mode);
    EXPECT_EQ(render(q), render(p));
    EXPECT_TRUE(equal(q.root(), p.root()));
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, Generated,
                         ::testing::Combine(::testing::Values(FO, HO), ::testing::Values(LO, LI)),
                         [](const auto& info) {
                           return std::string(std::get<0>(info.param) == FO ? "FirstOrder" : "HigherOrder") +
                                  (std::get<1>(info.param) == LO ? "Outermost" : "Innermost");
                         });

}  // namespace
