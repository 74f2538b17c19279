#include <gtest/gtest.h>

#include "shapecheck/error.hpp"
#include "shapecheck/oracle.hpp"
#include "shapecheck/shapes.hpp"

namespace {

using namespace shapecheck;
using namespace shapecheck::shapes;

HeadShapeStx S(std::string_view text) { return parse_shape(text); }

constexpr MachInt kLo = -4;
constexpr MachInt kHi = 260;

// Pointwise denotation over the test universe.
std::vector<Head> denotation(const HeadShapeStx& s) {
  std::vector<Head> out;
  for (Side side : {Side::Imm, Side::Block})
    for (MachInt v = kLo; v <= kHi; ++v)
      if (shape_mem({side, v}, s)) out.push_back({side, v});
  return out;
}

TEST(SubShape, Canonical) {
  SubShape a = SubShape::fin({3, 1, 3, 2});
  EXPECT_EQ(a.values(), (std::vector<MachInt>{1, 2, 3}));
  EXPECT_EQ(a, SubShape::fin({1, 2, 3}));
  EXPECT_TRUE(SubShape::none().is_empty());
  EXPECT_FALSE(SubShape::top().is_empty());
  EXPECT_TRUE(SubShape::top().contains(-1000));
}

TEST(HeadShape, BlockRange) {
  EXPECT_THROW(HeadShapeStx::make(SubShape::none(), SubShape::fin({256})), Error);
  EXPECT_THROW(HeadShapeStx::make(SubShape::none(), SubShape::fin({-1})), Error);
  EXPECT_NO_THROW(HeadShapeStx::make(SubShape::top(), SubShape::fin({0, 255})));
}

TEST(Membership, BlocksOutsideTagRange) {
  HeadShapeStx top = HeadShapeStx::top();
  EXPECT_TRUE(shape_mem({Side::Block, 255}, top));
  EXPECT_FALSE(shape_mem({Side::Block, 256}, top));
  EXPECT_FALSE(shape_mem({Side::Block, -1}, top));
  EXPECT_TRUE(shape_mem({Side::Imm, -4}, top));
  EXPECT_FALSE(shape_mem({Side::Imm, 0}, HeadShapeStx::empty()));
}

TEST(Render, Canonical) {
  EXPECT_EQ(render(S("(imm: top; block: {255})")), "(imm: top, block: {255})");
  EXPECT_EQ(render(S("(imm: {2, 0,1}, block: {})")), "(imm: {0,1,2}, block: {})");
  EXPECT_EQ(render(Head{Side::Block, 7}), "Block 7");
  for (const char* t : {"(imm: top, block: top)", "(imm: {}, block: {})", "(imm: {-3,5}, block: {0,254})"})
    EXPECT_EQ(render(S(t)), t);
}

TEST(Parse, Errors) {
  EXPECT_THROW(S("(imm: top)"), Error);
  EXPECT_THROW(S("(imm: {1,}, block: {})"), Error);
  EXPECT_THROW(S("(block: {}, imm: {})"), Error);
  EXPECT_THROW(S("(imm: {}, block: {300})"), Error);
}

TEST(Union, Examples) {
  EXPECT_EQ(shape_union(S("(imm: {0}, block: {})"), S("(imm: {1}, block: {3})")),
            S("(imm: {0,1}, block: {3})"));
  EXPECT_EQ(shape_union(S("(imm: top, block: {})"), S("(imm: {1}, block: top)")),
            HeadShapeStx::top());
}

TEST(DisjointUnion, ImmediatesFirstThenSmallestValue) {
  auto r = shape_disjoint_union(S("(imm: {1,5,7}, block: {0,3})"),
                                S("(imm: {7,5}, block: {3,0})"), "left", "right");
  ASSERT_TRUE(std::holds_alternative<ConflictWitness>(r));
  const auto& w = std::get<ConflictWitness>(r);
  EXPECT_EQ(w.side, Side::Imm);
  EXPECT_EQ(w.value, 5);
  EXPECT_FALSE(w.top_overlap);
  EXPECT_EQ(w.left_origin, "left");
  EXPECT_EQ(render(w), "Imm overlap on 5");
}

TEST(DisjointUnion, TopAgainstTop) {
  auto r = shape_disjoint_union(S("(imm: top, block: {})"), S("(imm: top, block: {})"));
  const auto& w = std::get<ConflictWitness>(r);
  EXPECT_EQ(w.side, Side::Imm);
  EXPECT_EQ(w.value, 0);
  EXPECT_TRUE(w.top_overlap);
  EXPECT_EQ(render(w), "Imm overlap on top");
}

TEST(DisjointUnion, TopAgainstFinite) {
  auto r = shape_disjoint_union(S("(imm: {}, block: {9, 4})"), S("(imm: {}, block: top)"));
  const auto& w = std::get<ConflictWitness>(r);
  EXPECT_EQ(w.side, Side::Block);
  EXPECT_EQ(w.value, 4);
  EXPECT_FALSE(w.top_overlap);
}

TEST(DisjointUnion, Zarith) {
  auto r = shape_disjoint_union(S("(imm: top, block: {})"), S("(imm: {}, block: {255})"));
  ASSERT_TRUE(std::holds_alternative<HeadShapeStx>(r));
  EXPECT_EQ(render(std::get<HeadShapeStx>(r)), "(imm: top, block: {255})");
}

TEST(CtorShapes, Indices) {
  EXPECT_EQ(constant_ctor_shape(2), S("(imm: {2}, block: {})"));
  EXPECT_EQ(block_ctor_shape(3), S("(imm: {}, block: {3})"));
  EXPECT_EQ(var_shape(), HeadShapeStx::top());
}

// Random shapes with values inside the test universe; narrow windows make
// overlaps frequent.
SubShape random_side(oracle::Rng& rng, MachInt lo, MachInt hi) {
  if (rng.chance(0.15)) return SubShape::top();
  std::vector<MachInt> vals;
  bool narrow = rng.chance(0.5);
  for (std::size_t n = rng.below(6); n > 0; --n) {
    MachInt span = narrow ? 5 : hi - lo + 1;
    MachInt base = narrow ? std::max<MachInt>(lo, 250 * static_cast<MachInt>(rng.below(2))) : lo;
    vals.push_back(std::min(hi, base + static_cast<MachInt>(rng.below(static_cast<std::size_t>(span)))));
  }
  return SubShape::fin(std::move(vals));
}

TEST(Semantics, ExhaustiveMembership) {
  oracle::Rng rng(17);
  int disjoint = 0;
  for (int i = 0; i < 3000; ++i) {
    HeadShapeStx a = HeadShapeStx::make(random_side(rng, kLo, kHi), random_side(rng, 0, kMaxTag));
    HeadShapeStx b = HeadShapeStx::make(random_side(rng, kLo, kHi), random_side(rng, 0, kMaxTag));
    std::vector<Head> da = denotation(a), db = denotation(b), du = denotation(shape_union(a, b));
    std::vector<Head> expected_union, shared;
    std::set_union(da.begin(), da.end(), db.begin(), db.end(), std::back_inserter(expected_union));
    std::set_intersection(da.begin(), da.end(), db.begin(), db.end(), std::back_inserter(shared));
    ASSERT_EQ(du, expected_union) << render(a) << " " << render(b);
    auto r = shape_disjoint_union(a, b);
    if (shared.empty()) {
      ++disjoint;
      ASSERT_TRUE(std::holds_alternative<HeadShapeStx>(r)) << render(a) << " " << render(b);
      ASSERT_EQ(std::get<HeadShapeStx>(r), shape_union(a, b));
    } else {
      ASSERT_TRUE(std::holds_alternative<ConflictWitness>(r)) << render(a) << " " << render(b);
      const auto& w = std::get<ConflictWitness>(r);
      // Top against top reports value 0; otherwise the witness is the first
      // shared head, immediates before blocks.
      ASSERT_TRUE(std::binary_search(shared.begin(), shared.end(), w.head()));
      if (w.top_overlap)
        ASSERT_EQ(w.value, 0);
      else
        ASSERT_EQ(w.head(), shared.front()) << render(a) << " " << render(b);
    }
  }
  EXPECT_GT(disjoint, 300);
  EXPECT_LT(disjoint, 2700);
}

TEST(PrimTable, Builtin) {
  const PrimTable& t = PrimTable::builtin();
  EXPECT_EQ(t.find("string")->shape, S("(imm: {}, block: {252})"));
  EXPECT_EQ(t.find("custom")->shape, S("(imm: {}, block: {255})"));
  EXPECT_TRUE(t.find("lazy")->lazy_like);
  EXPECT_FALSE(t.contains("gmp"));
  EXPECT_EQ(t.shape("lazy", {S("(imm: top, block: {})")}),
            S("(imm: top, block: {244,246,250})"));
  EXPECT_EQ(t.shape("array", {S("(imm: top, block: {})")}), S("(imm: {}, block: {0,254})"));
  EXPECT_THROW(t.shape("gmp", {}), Error);
}

TEST(PrimTable, ParseErrors) {
  PrimTable t = PrimTable::parse("# c\nnat = (imm: top; block: {})\nbox = (imm: {}; block: {1}) lazylike\n");
  EXPECT_EQ(t.entries().size(), 2u);
  EXPECT_TRUE(t.find("box")->lazy_like);
  try {
    PrimTable::parse("nat = (imm: top; block: {})\nbad = (imm: {}; block: {999})\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.pos().line, 2u);
  }
  EXPECT_THROW(PrimTable::parse("a = (imm: {}; block: {})\na = (imm: {}; block: {})\n"), Error);
  EXPECT_THROW(PrimTable::parse("a = (imm: {}; block: {}) eager\n"), Error);
}

}  // namespace
