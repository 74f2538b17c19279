#ifndef SHAPECHECK_SHAPES_HPP
#define SHAPECHECK_SHAPES_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Head shapes: a head is the runtime discriminator of a value (its immediate
// integer or its block tag); a head shape approximates the set of heads of a
// type by an (immediate, block) pair of Top-or-finite-set components.

namespace shapecheck::shapes {

using MachInt = std::int64_t;

inline constexpr MachInt kMaxTag = 255;

enum class Side { Imm, Block };
std::string_view to_string(Side s);

struct Head {
  Side side;
  MachInt value;
  friend auto operator<=>(const Head&, const Head&) = default;
};
/// `Imm 5`, `Block 255`.
std::string render(const Head& h);

/// Top, or a finite canonical (sorted, deduplicated) set.
class SubShape {
 public:
  static SubShape top() { return SubShape(true, {}); }
  static SubShape fin(std::vector<MachInt> values);
  static SubShape none() { return SubShape(false, {}); }

  bool is_top() const noexcept { return top_; }
  /// Empty when Top.
  const std::vector<MachInt>& values() const noexcept { return values_; }
  bool is_empty() const noexcept { return !top_ && values_.empty(); }
  bool contains(MachInt v) const;

  friend bool operator==(const SubShape&, const SubShape&) = default;

 private:
  SubShape(bool top, std::vector<MachInt> values) : top_(top), values_(std::move(values)) {}
  bool top_;
  std::vector<MachInt> values_;
};

/// Block Fin sets lie in [0, 255]; Top on the block side denotes all tags.
struct HeadShapeStx {
  SubShape imm = SubShape::none();
  SubShape block = SubShape::none();

  /// Throws Error(InvalidArgument) when a block tag is out of range.
  static HeadShapeStx make(SubShape imm, SubShape block);
  static HeadShapeStx empty() { return {}; }
  static HeadShapeStx top() { return {SubShape::top(), SubShape::top()}; }

  friend bool operator==(const HeadShapeStx&, const HeadShapeStx&) = default;
};

/// Two operands share a head. `top_overlap` marks the case where one side
/// is Top on both operands; `value` is then a representative head.
struct ConflictWitness {
  Side side;
  MachInt value;
  bool top_overlap = false;
  std::string left_origin;
  std::string right_origin;

  Head head() const { return {side, value}; }
};

HeadShapeStx shape_union(const HeadShapeStx& a, const HeadShapeStx& b);

/// The union when the denotations are disjoint, otherwise a witness. The
/// immediate side is checked first, then the smallest shared value.
std::variant<HeadShapeStx, ConflictWitness> shape_disjoint_union(
    const HeadShapeStx& a, const HeadShapeStx& b, std::string left_origin = {},
    std::string right_origin = {});

bool shape_mem(const Head& h, const HeadShapeStx& s);

/// Constructor shapes by index within their declaring type.
HeadShapeStx constant_ctor_shape(std::size_t index);
HeadShapeStx block_ctor_shape(std::size_t index);
/// Type variables may be instantiated by any type.
HeadShapeStx var_shape();

/// `(imm: top, block: {255})`.
std::string render(const SubShape& s);
std::string render(const HeadShapeStx& s);
/// `Imm overlap on top` or `Block overlap on 0`.
std::string render(const ConflictWitness& w);

/// Accepts the canonical rendering with `,` or `;` between the sides and
/// `{}` for the empty set. Throws Error(SyntaxError).
HeadShapeStx parse_shape(std::string_view text);

struct PrimEntry {
  std::string name;
  HeadShapeStx shape;
  /// The shape also includes the shape of the (first) argument type.
  bool lazy_like = false;
};

/// Primitive type constructors and their head shapes.
class PrimTable {
 public:
  PrimTable() = default;
  explicit PrimTable(std::vector<PrimEntry> entries);

  /// Format: `name = SHAPE [lazylike]` per line, `#` comments.
  /// Throws Error(SyntaxError) with line/column.
  static PrimTable parse(std::string_view text);
  /// The table shipped in data/prims.txt.
  static const PrimTable& builtin();

  const PrimEntry* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  const std::vector<PrimEntry>& entries() const noexcept { return entries_; }

  /// Shape of `name` applied to arguments with the given shapes. Throws
  /// Error(UnknownPrimitive).
  HeadShapeStx shape(std::string_view name, const std::vector<HeadShapeStx>& arg_shapes) const;

 private:
  std::vector<PrimEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace shapecheck::shapes

#endif  // SHAPECHECK_SHAPES_HPP
