#include <gtest/gtest.h>

#include "fixture.hpp"
#include "shapecheck/decls.hpp"

namespace {

using namespace shapecheck;
using namespace shapecheck::decls;
using shapes::parse_shape;
using shapecheck::testing::fixture;

ErrorKind parse_error(std::string_view text) {
  try {
    parse_decls(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ErrorKind::IoError;
}

const CheckReport& report_for(const std::vector<CheckReport>& rs, std::string_view name) {
  for (const auto& r : rs)
    if (r.decl == name) return r;
  throw std::runtime_error("no report for " + std::string(name));
}

TEST(Parse, Errors) {
  EXPECT_EQ(parse_error("type t = A\ntype t = B"), ErrorKind::DuplicateTypeName);
  EXPECT_EQ(parse_error("type int = A"), ErrorKind::DuplicateTypeName);
  EXPECT_EQ(parse_error("type t = A | A"), ErrorKind::DuplicateCtor);
  EXPECT_EQ(parse_error("type t = A of u"), ErrorKind::UnboundTypeName);
  EXPECT_EQ(parse_error("type t = A of 'a"), ErrorKind::UnboundTypeName);
  EXPECT_EQ(parse_error("type 'a t = A of 'a\ntype u = B of t"), ErrorKind::ArityMismatch);
  EXPECT_EQ(parse_error("type t = A of int [@unboxed] | B of int * int [@unboxed]"),
            ErrorKind::SyntaxError);
  EXPECT_EQ(parse_error("type t = A [@shape (imm: top; block: {})]"), ErrorKind::SyntaxError);
  EXPECT_EQ(parse_error("type t = A of"), ErrorKind::SyntaxError);
  EXPECT_EQ(parse_error("type ('a, 'a) t = A"), ErrorKind::SyntaxError);
}

TEST(Parse, UnknownPrimitiveAgainstCustomTable) {
  shapes::PrimTable tiny = shapes::PrimTable::parse("int = (imm: top; block: {})\n");
  EXPECT_NO_THROW(parse_decls("type t = A of int [@unboxed]", tiny));
  try {
    parse_decls("type t = A of string [@unboxed]", tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundTypeName);
  }
}

TEST(Parse, ErrorPosition) {
  try {
    parse_decls("type t = A\n  | B of nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.pos().line, 2u);
    EXPECT_EQ(e.pos().column, 10u);
  }
}

TEST(Parse, ConstructorIndices) {
  auto ds = parse_decls("type t = A | B of int | C of string [@unboxed] | D | E of t");
  const Decl& t = ds[0];
  EXPECT_EQ(t.find_ctor("A")->index, 0u);
  EXPECT_EQ(t.find_ctor("D")->index, 1u);
  EXPECT_EQ(t.find_ctor("B")->index, 0u);
  EXPECT_EQ(t.find_ctor("E")->index, 1u);
  EXPECT_TRUE(t.find_ctor("C")->unboxed);
  EXPECT_EQ(t.find_ctor("Z"), nullptr);
}

TEST(Parse, RecordsAndTuples) {
  auto ds = parse_decls(fixture("decl/ropes.decl"));
  const CtorDecl* b = ds[0].find_ctor("Branch");
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->fields, (std::vector<std::string>{"llen", "l", "r"}));
  EXPECT_EQ(b->args.size(), 3u);
  auto ps = parse_decls("type ('a, 'b) p = P of ('a * 'b) array [@unboxed]");
  EXPECT_EQ(render(ps[0].ctors[0].args[0]), "('a * 'b) array");
}

SumNF nf(std::string_view text, const std::string& root) {
  static std::vector<std::vector<Decl>> keep;
  keep.push_back(parse_decls(text));
  DeclEnv env(keep.back());
  const Decl* d = env.find(root);
  std::vector<TypeExpr> params;
  for (const auto& p : d->params) params.push_back(TypeExpr::var(p));
  auto r = normalize_type(TypeExpr::app(root, params), env);
  if (auto* c = std::get_if<Cycle>(&r)) throw std::runtime_error("cycle on " + c->name);
  return std::get<SumNF>(r);
}

TEST(Normalize, SumNormalForms) {
  EXPECT_EQ(render(nf("type t = A | B of int | C of string [@unboxed]", "t")),
            "A (t.A) + B (t.B, int) + string");
  EXPECT_EQ(render(nf("type 'a id = Id of 'a [@unboxed]", "id")), "'a");
  EXPECT_EQ(render(nf("type 'a l = L of 'a lazy [@unboxed]\ntype u = U of int l [@unboxed]", "u")),
            "lazy (int)");
  EXPECT_EQ(render(nf("type e = |", "e")), "0");
  EXPECT_EQ(render(nf("type g [@shape (imm: {}; block: {255})]\ntype z = Z of g [@unboxed]", "z")),
            "g (abstract)");
}

TEST(Normalize, Cycles) {
  auto ds = parse_decls(fixture("decl/loop.decl"));
  DeclEnv env(ds);
  auto r = normalize_type(TypeExpr::app("loop", {}), env);
  ASSERT_TRUE(std::holds_alternative<Cycle>(r));
  const Cycle& c = std::get<Cycle>(r);
  EXPECT_EQ(c.name, "loop");
  EXPECT_EQ(c.trace.render(), "[loop]");
  EXPECT_EQ(c.path, (std::vector<std::string>{"loop", "id", "loop"}));
}

TEST(Normalize, RepeatedNameUnderDifferentBranchesIsNotACycle) {
  // `n` is unfolded inside `t`, never inside its own trace.
  auto rs = check_decls(parse_decls(
      "type n = int\ntype t = A of n [@unboxed] | B of string [@unboxed]\n"
      "type u = U of t [@unboxed] | V of float [@unboxed]"));
  EXPECT_EQ(report_for(rs, "u").verdict, CheckReport::Verdict::Accepted);
  EXPECT_EQ(shapes::render(report_for(rs, "u").shape), "(imm: top, block: {252,253})");
}

TEST(Normalize, ExpansionLimit) {
  auto ds = parse_decls("type 'a d = D of 'a [@unboxed]\ntype t = A of int d [@unboxed]");
  DeclEnv env(ds);
  EXPECT_NO_THROW(normalize_type(TypeExpr::app("t", {}), env, 1));
  auto wide = parse_decls("type t = A | B | C");
  DeclEnv wenv(wide);
  EXPECT_THROW(normalize_type(TypeExpr::app("t", {}), wenv, 2), Error);
}

TEST(Check, Fixtures) {
  auto z = check_decls(parse_decls(fixture("decl/zarith.decl")));
  const auto& zr = report_for(z, "zarith");
  EXPECT_EQ(zr.verdict, CheckReport::Verdict::Accepted);
  ASSERT_EQ(zr.unboxed_shapes.size(), 2u);
  EXPECT_EQ(zr.unboxed_shapes[0].second, parse_shape("(imm: top; block: {})"));
  EXPECT_EQ(zr.unboxed_shapes[1].second, parse_shape("(imm: {}; block: {255})"));

  auto c = check_decls(parse_decls(fixture("decl/clash.decl")));
  ASSERT_EQ(c[0].verdict, CheckReport::Verdict::RejectedConflict);
  EXPECT_EQ(c[0].witness->side, shapes::Side::Imm);
  EXPECT_TRUE(c[0].witness->top_overlap);

  for (const char* f : {"loop", "harmful", "harmless"}) {
    auto rs = check_decls(parse_decls(fixture(std::string("decl/") + f + ".decl")));
    EXPECT_EQ(report_for(rs, f).verdict, CheckReport::Verdict::RejectedCycle) << f;
    EXPECT_TRUE(report_for(rs, f).cycle.has_value());
  }
  auto ropes = check_decls(parse_decls(fixture("decl/ropes.decl")));
  EXPECT_EQ(ropes[0].verdict, CheckReport::Verdict::Accepted);
  EXPECT_EQ(shapes::render(ropes[0].shape), "(imm: {}, block: {0,252})");
}

TEST(Check, BlockConflictWitness) {
  auto rs = check_decls(parse_decls("type t = A of int * int | B of (int * int) [@unboxed]"));
  ASSERT_EQ(rs[0].verdict, CheckReport::Verdict::RejectedConflict);
  EXPECT_EQ(rs[0].witness->side, shapes::Side::Block);
  EXPECT_EQ(rs[0].witness->value, 0);
  EXPECT_FALSE(rs[0].witness->top_overlap);
}

TEST(Check, LazyArgumentsAffectShape) {
  auto lazy_int = check_decls(parse_decls("type t = A of int lazy [@unboxed] | B of float [@unboxed]"));
  EXPECT_EQ(lazy_int[0].verdict, CheckReport::Verdict::Accepted);
  // A forwarded float would be a Double_tag block.
  auto lazy_float = check_decls(parse_decls("type t = A of float lazy [@unboxed] | B of float [@unboxed]"));
  EXPECT_EQ(lazy_float[0].verdict, CheckReport::Verdict::RejectedConflict);
}

TEST(MatchPlan, TestsAndErrors) {
  auto ds = parse_decls(fixture("decl/zarith.decl"));
  auto rs = check_decls(ds);
  const Decl& z = ds[1];
  const auto& zr = report_for(rs, "zarith");
  DispatchTest small = match_plan(z, zr, "Small");
  EXPECT_TRUE(small.matches({shapes::Side::Imm, -7}));
  EXPECT_FALSE(small.matches({shapes::Side::Block, 255}));
  EXPECT_TRUE(match_plan(z, zr, "Big").matches({shapes::Side::Block, 255}));
  try {
    match_plan(z, zr, "Huge");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownCtor);
  }
  auto cs = parse_decls(fixture("decl/clash.decl"));
  auto crs = check_decls(cs);
  try {
    match_plan(cs[0], crs[0], "Int");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DeclNotAccepted);
  }
}

TEST(Encoding, ReadBackAgreesWithNormalization) {
  auto ds = parse_decls(fixture("decl/names.decl"));
  DeclEnv env(ds);
  calculus::Program p = translate_to_program(ds);
  for (const Decl& d : ds) {
    calculus::Program rooted = p.with_root(translate_root(d));
    auto out = calculus::normalize(rooted, calculus::Strategy::LeftmostOutermost);
    ASSERT_EQ(out.kind, calculus::Outcome::Kind::Normal) << d.name;
    auto back = read_back(out.normal_form, env);
    ASSERT_TRUE(back.has_value()) << d.name;
    std::vector<TypeExpr> params;
    for (const auto& q : d.params) params.push_back(TypeExpr::var(q));
    auto direct = normalize_type(TypeExpr::app(d.name, params), env);
    ASSERT_TRUE(same_components(*back, std::get<SumNF>(direct))) << d.name;
  }
}

TEST(Encoding, CycleDivergesInTheCalculus) {
  auto ds = parse_decls(fixture("decl/loop.decl"));
  calculus::Program p = translate_to_program(ds).with_root(translate_root(ds[1]));
  auto out = calculus::normalize(p, calculus::Strategy::LeftmostOutermost);
  EXPECT_EQ(out.kind, calculus::Outcome::Kind::Diverges);
  EXPECT_EQ(out.blocked_name, "loop");
}

}  // namespace
