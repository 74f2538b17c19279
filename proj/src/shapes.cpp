#include "shapecheck/shapes.hpp"

#include <algorithm>
#include <cctype>

#include "shapecheck/error.hpp"

namespace shapecheck::shapes {

namespace detail {
extern const char* const kBuiltinPrims;
}

std::string_view to_string(Side s) { return s == Side::Imm ? "Imm" : "Block"; }

std::string render(const Head& h) {
  return std::string(to_string(h.side)) + " " + std::to_string(h.value);
}

SubShape SubShape::fin(std::vector<MachInt> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return SubShape(false, std::move(values));
}

bool SubShape::contains(MachInt v) const {
  return top_ || std::binary_search(values_.begin(), values_.end(), v);
}

HeadShapeStx HeadShapeStx::make(SubShape imm, SubShape block) {
  for (MachInt t : block.values())
    if (t < 0 || t > kMaxTag)
      throw Error(ErrorKind::InvalidArgument,
                  "block tag " + std::to_string(t) + " outside [0, 255]");
  HeadShapeStx s;
  s.imm = std::move(imm);
  s.block = std::move(block);
  return s;
}

namespace {

SubShape sub_union(const SubShape& a, const SubShape& b) {
  if (a.is_top() || b.is_top()) return SubShape::top();
  std::vector<MachInt> out;
  std::set_union(a.values().begin(), a.values().end(), b.values().begin(), b.values().end(),
                 std::back_inserter(out));
  return SubShape::fin(std::move(out));
}

// Smallest shared value, if any. Top vs Top yields `top_value`.
std::optional<std::pair<MachInt, bool>> sub_overlap(const SubShape& a, const SubShape& b,
                                                    MachInt top_value) {
  if (a.is_top() && b.is_top()) return std::pair{top_value, true};
  if (a.is_top()) {
    if (b.values().empty()) return std::nullopt;
    return std::pair{b.values().front(), false};
  }
  if (b.is_top()) {
    if (a.values().empty()) return std::nullopt;
    return std::pair{a.values().front(), false};
  }
  std::vector<MachInt> common;
  std::set_intersection(a.values().begin(), a.values().end(), b.values().begin(),
                        b.values().end(), std::back_inserter(common));
  if (common.empty()) return std::nullopt;
  return std::pair{common.front(), false};
}

}  // namespace

HeadShapeStx shape_union(const HeadShapeStx& a, const HeadShapeStx& b) {
  HeadShapeStx s;
  s.imm = sub_union(a.imm, b.imm);
  s.block = sub_union(a.block, b.block);
  return s;
}

std::variant<HeadShapeStx, ConflictWitness> shape_disjoint_union(const HeadShapeStx& a,
                                                                 const HeadShapeStx& b,
                                                                 std::string left_origin,
                                                                 std::string right_origin) {
  for (Side side : {Side::Imm, Side::Block}) {
    const SubShape& x = side == Side::Imm ? a.imm : a.block;
    const SubShape& y = side == Side::Imm ? b.imm : b.block;
    if (auto o = sub_overlap(x, y, 0))
      return ConflictWitness{side, o->first, o->second, std::move(left_origin),
                             std::move(right_origin)};
  }
  return shape_union(a, b);
}

bool shape_mem(const Head& h, const HeadShapeStx& s) {
  if (h.side == Side::Imm) return s.imm.contains(h.value);
  return h.value >= 0 && h.value <= kMaxTag && s.block.contains(h.value);
}

HeadShapeStx constant_ctor_shape(std::size_t index) {
  return HeadShapeStx::make(SubShape::fin({static_cast<MachInt>(index)}), SubShape::none());
}

HeadShapeStx block_ctor_shape(std::size_t index) {
  return HeadShapeStx::make(SubShape::none(), SubShape::fin({static_cast<MachInt>(index)}));
}

HeadShapeStx var_shape() { return HeadShapeStx::top(); }

std::string render(const SubShape& s) {
  if (s.is_top()) return "top";
  std::string out = "{";
  for (std::size_t i = 0; i < s.values().size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s.values()[i]);
  }
  return out + "}";
}

std::string render(const HeadShapeStx& s) {
  return "(imm: " + render(s.imm) + ", block: " + render(s.block) + ")";
}

std::string render(const ConflictWitness& w) {
  std::string out = std::string(to_string(w.side)) + " overlap on ";
  out += w.top_overlap ? "top" : std::to_string(w.value);
  return out;
}

// ------------------------------------------------------------------ parsing

namespace {

class ShapeReader {
 public:
  ShapeReader(std::string_view text, SourcePos start) : text_(text), line_(start.line),
                                                       col_(start.column) {}

  HeadShapeStx shape() {
    expect('(');
    keyword("imm");
    expect(':');
    SubShape imm = sub();
    skip_ws();
    if (peek() == ',' || peek() == ';')
      advance();
    else
      fail("expected ',' or ';'");
    keyword("block");
    expect(':');
    SubShape block = sub();
    expect(')');
    try {
      return HeadShapeStx::make(std::move(imm), std::move(block));
    } catch (const Error& e) {
      fail(e.message());
    }
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      advance();
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  std::string_view rest() const { return text_.substr(pos_); }
  SourcePos where() const { return {line_, col_}; }
  std::size_t offset() const { return pos_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::SyntaxError, msg, {line_, col_});
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }
  void keyword(std::string_view kw) {
    skip_ws();
    if (text_.substr(pos_, kw.size()) != kw) fail("expected '" + std::string(kw) + "'");
    for (std::size_t i = 0; i < kw.size(); ++i) advance();
  }
  SubShape sub() {
    skip_ws();
    if (text_.substr(pos_, 3) == "top") {
      keyword("top");
      return SubShape::top();
    }
    expect('{');
    std::vector<MachInt> vals;
    skip_ws();
    if (peek() == '}') {
      advance();
      return SubShape::fin({});
    }
    for (;;) {
      skip_ws();
      std::size_t start = pos_;
      if (peek() == '-') advance();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected an integer");
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      try {
        vals.push_back(std::stoll(std::string(text_.substr(start, pos_ - start))));
      } catch (const std::out_of_range&) {
        fail("integer out of range");
      }
      skip_ws();
      if (peek() == ',') {
        advance();
        continue;
      }
      if (peek() == '}') {
        advance();
        break;
      }
      fail("expected ',' or '}'");
    }
    return SubShape::fin(std::move(vals));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t col_;
};

}  // namespace

HeadShapeStx parse_shape(std::string_view text) {
  ShapeReader r(text, {1, 1});
  HeadShapeStx s = r.shape();
  if (!r.at_end()) r.fail("trailing characters after shape");
  return s;
}

PrimTable::PrimTable(std::vector<PrimEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!index_.emplace(entries_[i].name, i).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate primitive " + entries_[i].name);
}

PrimTable PrimTable::parse(std::string_view text) {
  std::vector<PrimEntry> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t i = 0;
    auto skip = [&] {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    };
    skip();
    if (i == line.size()) continue;
    std::size_t name_start = i;
    while (i < line.size() &&
           (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_'))
      ++i;
    if (i == name_start)
      throw Error(ErrorKind::SyntaxError, "expected a primitive name", {line_no, i + 1});
    PrimEntry e;
    e.name = std::string(line.substr(name_start, i - name_start));
    skip();
    if (i == line.size() || line[i] != '=')
      throw Error(ErrorKind::SyntaxError, "expected '='", {line_no, i + 1});
    ++i;
    ShapeReader r(line.substr(i), {line_no, i + 1});
    e.shape = r.shape();
    std::string_view tail = r.rest();
    std::size_t k = 0;
    while (k < tail.size() && std::isspace(static_cast<unsigned char>(tail[k]))) ++k;
    tail = tail.substr(k);
    while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.back())))
      tail.remove_suffix(1);
    if (tail == "lazylike")
      e.lazy_like = true;
    else if (!tail.empty())
      throw Error(ErrorKind::SyntaxError, "unexpected '" + std::string(tail) + "'",
                  r.where());
    if (std::any_of(entries.begin(), entries.end(),
                    [&](const PrimEntry& x) { return x.name == e.name; }))
      throw Error(ErrorKind::SyntaxError, "duplicate primitive " + e.name, {line_no, 1});
    entries.push_back(std::move(e));
  }
  return PrimTable(std::move(entries));
}

const PrimTable& PrimTable::builtin() {
  static const PrimTable table = parse(detail::kBuiltinPrims);
  return table;
}

const PrimEntry* PrimTable::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

HeadShapeStx PrimTable::shape(std::string_view name,
                              const std::vector<HeadShapeStx>& arg_shapes) const {
  const PrimEntry* e = find(name);
  if (e == nullptr)
    throw Error(ErrorKind::UnknownPrimitive, "unknown primitive " + std::string(name));
  HeadShapeStx s = e->shape;
  if (e->lazy_like)
    for (const auto& a : arg_shapes) s = shape_union(s, a);
  return s;
}

}  // namespace shapecheck::shapes
