#ifndef SHAPECHECK_DECLS_HPP
#define SHAPECHECK_DECLS_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shapecheck/calculus.hpp"
#include "shapecheck/error.hpp"
#include "shapecheck/shapes.hpp"

// A mini-ML datatype declaration language with `[@unboxed]` constructors,
// normalization of type expressions to sum normal form under the same
// trace-based termination monitor as the calculus, and head-shape checking.

namespace shapecheck::decls {

using shapes::HeadShapeStx;

struct TypeExpr {
  enum class Kind { Var, App, Prim };
  Kind kind = Kind::Var;
  /// Variable name without the quote, declared type name, or primitive name.
  std::string name;
  std::vector<TypeExpr> args;
  SourcePos pos;

  static TypeExpr var(std::string n) { return {Kind::Var, std::move(n), {}, {}}; }
  static TypeExpr app(std::string n, std::vector<TypeExpr> a) {
    return {Kind::App, std::move(n), std::move(a), {}};
  }
  static TypeExpr prim(std::string n, std::vector<TypeExpr> a = {}) {
    return {Kind::Prim, std::move(n), std::move(a), {}};
  }

  friend bool operator==(const TypeExpr& a, const TypeExpr& b) {
    return a.kind == b.kind && a.name == b.name && a.args == b.args;
  }
};

/// OCaml syntax: `'a`, `int`, `'a id`, `(int, string) pair`, `(a * b)`.
std::string render(const TypeExpr& t);

struct CtorDecl {
  std::string name;
  std::vector<TypeExpr> args;
  bool unboxed = false;
  /// Inline record; fields are positional for shape purposes.
  std::vector<std::string> fields;
  SourcePos pos;
  /// Index among the boxed constant or boxed non-constant constructors of
  /// the declaration (each counter starts at 0). Unused when unboxed.
  std::size_t index = 0;

  bool is_constant() const noexcept { return args.empty(); }
};

struct Decl {
  enum class Body { Variant, Abbrev, Abstract };
  std::string name;
  std::vector<std::string> params;
  Body body = Body::Variant;
  std::vector<CtorDecl> ctors;  // Variant
  TypeExpr abbrev;              // Abbrev
  HeadShapeStx shape = HeadShapeStx::top();  // Abstract
  bool has_shape_attr = false;
  SourcePos pos;

  const CtorDecl* find_ctor(std::string_view c) const;
};

/// Parses the `.decl` format. Type names are resolved against the whole file
/// (mutual recursion) and then against `prims`. A declaration may not reuse a
/// primitive's name.
std::vector<Decl> parse_decls(std::string_view text,
                              const shapes::PrimTable& prims = shapes::PrimTable::builtin());

/// Lookup of declarations by name.
class DeclEnv {
 public:
  explicit DeclEnv(const std::vector<Decl>& decls,
                   const shapes::PrimTable& prims = shapes::PrimTable::builtin());
  const Decl* find(std::string_view name) const;
  const std::vector<Decl>& decls() const noexcept { return *decls_; }
  const shapes::PrimTable& prims() const noexcept { return *prims_; }

 private:
  const std::vector<Decl>* decls_;
  const shapes::PrimTable* prims_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// One summand of a sum normal form.
struct Component {
  enum class Kind { BoxedCtor, Var, Prim, Abstract };
  Kind kind = Kind::Var;
  /// Constructor, variable, primitive or abstract type name.
  std::string name;
  /// BoxedCtor: the declaring type; its index and constancy.
  std::string type_name;
  std::size_t index = 0;
  bool constant = false;
  /// BoxedCtor: argument types with parameters substituted (not normalized).
  /// Prim: argument types as written.
  std::vector<TypeExpr> args;
  /// Prim, lazy-like only: normal forms of the arguments.
  std::vector<std::vector<Component>> arg_nfs;
  /// Abstract: the declared shape.
  HeadShapeStx abstract_shape = HeadShapeStx::top();

  /// `C (t.C)`, `'a`, `int`, `lazy ('a)`, `gmp (abstract)`.
  std::string render() const;
};

using SumNF = std::vector<Component>;

std::string render(const SumNF& s);

/// Normalization blocked: `name` was about to be unfolded again inside its
/// own trace. `path` lists the type names unfolded from the root to the
/// blocked occurrence, which is last.
struct Cycle {
  std::string name;
  calculus::Trace trace;
  std::vector<std::string> path;
};

/// Sum normal form of `t`, whose free variables stay as variables. Unfolds
/// declared types, unboxed constructors and abbreviations; boxed
/// constructors, abstract types and primitives are components; arguments
/// of lazy-like primitives are normalized too. Throws Error(ExpansionLimit)
/// past `max_components`.
std::variant<SumNF, Cycle> normalize_type(const TypeExpr& t, const DeclEnv& env,
                                          std::size_t max_components = 1'000'000);

HeadShapeStx component_shape(const Component& c, const shapes::PrimTable& prims);

/// Left fold of disjoint union over the component shapes; the empty sum has
/// the empty shape.
std::variant<HeadShapeStx, shapes::ConflictWitness> shape_of_snf(
    const SumNF& s, const shapes::PrimTable& prims);

struct CheckReport {
  enum class Verdict { Accepted, RejectedConflict, RejectedCycle };
  std::string decl;
  Verdict verdict = Verdict::Accepted;
  HeadShapeStx shape;
  /// Unboxed constructors in source order with their argument shapes.
  std::vector<std::pair<std::string, HeadShapeStx>> unboxed_shapes;
  std::optional<shapes::ConflictWitness> witness;
  std::optional<Cycle> cycle;
};

std::string_view to_string(CheckReport::Verdict v);

/// One report per declaration, in file order.
std::vector<CheckReport> check_decls(const std::vector<Decl>& decls,
                                     const shapes::PrimTable& prims = shapes::PrimTable::builtin());

/// The head test that selects constructor `ctor` when matching on `decl`.
struct DispatchTest {
  std::string ctor;
  HeadShapeStx heads;
  bool matches(const shapes::Head& h) const { return shapes::shape_mem(h, heads); }
};

/// Throws Error(UnknownCtor) or Error(DeclNotAccepted).
DispatchTest match_plan(const Decl& decl, const CheckReport& report, std::string_view ctor);

/// First-order encoding of the declarations: each type is a function of its
/// parameters. Constructor cases are joined with the free name `sum` (right
/// nested), a boxed constructor `C` of type `t` is `box(t.C)` with its
/// arguments dropped, an empty variant is `empty_sum`, primitives and
/// abstract types are free names whose arguments are dropped except for
/// lazy-like primitives, and type variables are the free names `'a`.
calculus::Program translate_to_program(const std::vector<Decl>& decls,
                                       const shapes::PrimTable& prims = shapes::PrimTable::builtin());

/// The encoding of the root `t('a, ...)` for declaration `decl`.
calculus::TermPtr translate_root(const Decl& decl);

/// Reads a sum normal form back from a normal form of the encoding. Returns
/// nullopt when the term is not in the image of the encoding.
std::optional<SumNF> read_back(const calculus::TermPtr& t, const DeclEnv& env);

/// Components compared by kind and name, recursively through lazy-like
/// arguments; boxed arguments are ignored (the encoding drops them).
bool same_components(const SumNF& a, const SumNF& b);

}  // namespace shapecheck::decls

#endif  // SHAPECHECK_DECLS_HPP
