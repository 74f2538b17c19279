#ifndef SHAPECHECK_CALCULUS_HPP
#define SHAPECHECK_CALCULUS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shapecheck/term.hpp"

// First-order and closed-higher-order lambda-calculus with mutually
// recursive top-level definitions, and the trace-annotated reduction that
// blocks a call to `f` whenever `f` already occurs in the trace of the call.

namespace shapecheck::calculus {

enum class Mode { FirstOrder, ClosedHigherOrder };
enum class Strategy { LeftmostOutermost, LeftmostInnermost };

std::string_view to_string(Mode m);
std::string_view to_string(Strategy s);

struct Definition {
  Name name;
  std::vector<Name> params;
  TermPtr body;
};

/// `let rec D in root`. Undefined names are uninterpreted constructors.
class Program {
 public:
  /// Validates the program invariants; throws Error(DuplicateDefinition,
  /// ArityMismatch or MalformedProgram).
  Program(std::vector<Definition> defs, TermPtr root, Mode mode);

  const std::vector<Definition>& defs() const noexcept { return defs_; }
  const TermPtr& root() const noexcept { return root_; }
  Mode mode() const noexcept { return mode_; }

  /// nullptr when `f` is not a defined function.
  const Definition* find(const Name& f) const;
  bool is_defined(const Name& f) const { return find(f) != nullptr; }

  /// Same definitions, different root.
  Program with_root(TermPtr root) const;

 private:
  std::vector<Definition> defs_;
  std::map<Name, std::size_t> index_;
  TermPtr root_;
  Mode mode_;
};

/// Child indices from the root; 0 is an application's head, i >= 1 its
/// (i-1)-th argument.
using Path = std::vector<std::size_t>;
std::string render_path(const Path& p);

using Substitution = std::map<Name, AnnTermPtr>;

/// Annotating substitution: variables are replaced per `subst` (their
/// annotations untouched), every application node of `t` gets trace `l`.
/// Variables not in `subst` are kept as themselves.
AnnTermPtr annotate(const TermPtr& t, const Substitution& subst, const Trace& l);

/// Removes all traces.
TermPtr erase(const AnnTermPtr& t);

const AnnTermPtr& subterm_at(const AnnTermPtr& t, const Path& p);
const TermPtr& subterm_at(const TermPtr& t, const Path& p);
/// Rebuilds `t` with the subterm at `p` replaced. Annotations on the
/// rebuilt ancestors are kept.
AnnTermPtr replace_at(const AnnTermPtr& t, const Path& p, AnnTermPtr with);
TermPtr replace_at(const TermPtr& t, const Path& p, TermPtr with);

enum class RedexStatus { Enabled, Blocked };

struct Redex {
  Path path;
  RedexStatus status;
  Name name;
  Trace trace;
};

/// True when `node` is an application of a defined name to exactly its
/// arity (closed-higher-order applications with another arity are stuck).
template <class A>
bool is_redex(const Program& p, const Node<A>& node) {
  const Name* f = node.head_name();
  if (f == nullptr) return false;
  const Definition* d = p.find(*f);
  return d != nullptr && d->params.size() == node.args().size();
}

/// All redex positions, outermost first, left to right (preorder).
std::vector<Redex> find_redexes(const Program& p, const AnnTermPtr& t);

struct StepResult {
  enum class Kind { Reduced, NormalForm, Blocked };
  Kind kind = Kind::NormalForm;
  AnnTermPtr next;     // Reduced
  Path path;           // Reduced, Blocked
  Name name;           // Reduced: expanded name; Blocked: blocked name
  Trace trace;         // Blocked: trace of the blocked call
};

/// One annotated reduction step. The first Enabled redex in strategy order
/// is contracted; Blocked is reported only when no Enabled redex remains.
StepResult step(const Program& p, const AnnTermPtr& t, Strategy strategy);

/// Contracts the (enabled) redex at `path`.
AnnTermPtr contract_at(const Program& p, const AnnTermPtr& t, const Path& path);

struct Outcome {
  enum class Kind { Normal, Diverges, StepLimit };
  Kind kind = Kind::Normal;
  TermPtr normal_form;     // Normal: erased normal form
  AnnTermPtr final_term;   // annotated term where reduction stopped
  std::uint64_t steps = 0;
  // Diverges: the reported blocked redex
  Path blocked_path;
  Name blocked_name;
  Trace blocked_trace;
};

struct NormalizeOptions {
  /// 0 means unlimited; annotated reduction terminates on its own.
  std::uint64_t max_steps = 0;
  /// Called after each Reduced step with (before, result, step number).
  std::function<void(const AnnTermPtr&, const StepResult&, std::uint64_t)> on_step;
};

/// Reduces annotate(root, {}, []) until normal form or a blocked term.
Outcome normalize(const Program& p, Strategy strategy, const NormalizeOptions& opts = {});

/// Parses the `.lam` text format; throws Error with line/column.
Program parse_program(std::string_view text, Mode mode);

// Renderings. First-order: `f(a,b)`, `f[l](a)`, zero-argument `c` / `c[l]`.
// Closed-higher-order: `h(a)` / `h(a)[l]`, application traces after the
// argument list.
std::string render(const TermPtr& t, Mode mode);
std::string render(const AnnTermPtr& t, Mode mode);
std::string render(const Program& p);

}  // namespace shapecheck::calculus

#endif  // SHAPECHECK_CALCULUS_HPP
