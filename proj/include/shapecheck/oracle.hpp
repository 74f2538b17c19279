#ifndef SHAPECHECK_ORACLE_HPP
#define SHAPECHECK_ORACLE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "shapecheck/calculus.hpp"
#include "shapecheck/cppmacro.hpp"
#include "shapecheck/decls.hpp"
#include "shapecheck/shapes.hpp"

// Independent machinery to cross-check the library: unmonitored reduction
// with fuel, the two naive loop monitors, enumeration of values with their
// runtime representation, and seeded random corpora.

namespace shapecheck::oracle {

using calculus::Program;
using calculus::Strategy;
using calculus::TermPtr;

struct FuelOutcome {
  enum class Kind { Normal, OutOfFuel };
  Kind kind = Kind::Normal;
  TermPtr normal_form;
  std::uint64_t steps = 0;
};

/// Plain reduction without traces. At most `fuel` steps are performed;
/// a term still reducible after that is OutOfFuel. Throws
/// Error(InvalidArgument) when fuel is 0.
FuelOutcome fuel_normalize(const Program& p, Strategy strategy, std::uint64_t fuel);

/// One plain reduction step at the first redex in strategy order.
struct PlainStep {
  bool reduced = false;
  TermPtr next;
  calculus::Path path;
  calculus::Name name;
};
PlainStep plain_step(const Program& p, const TermPtr& t, Strategy strategy);

struct MonitorOutcome {
  enum class Kind { Normal, Blocked, OutOfFuel };
  Kind kind = Kind::Normal;
  TermPtr term;  // normal form, or the term where reduction stopped
  std::uint64_t steps = 0;
  calculus::Name blocked_name;
};

std::string_view to_string(MonitorOutcome::Kind k);

/// Refuses a step whose result equals an earlier term of the sequence.
MonitorOutcome naive_whole_term_monitor(const Program& p, Strategy strategy,
                                        std::uint64_t fuel = 1000);

/// Refuses to expand a function that was already expanded in this run.
MonitorOutcome head_function_monitor(const Program& p, Strategy strategy,
                                     std::uint64_t fuel = 1000);

// ----------------------------------------------------------------- values

/// A source value. Ctor: constructor `name` of `type_name`. Prim: an opaque
/// sample of primitive `name` with head `head`; tuples carry components, and
/// a lazy-like sample with `forwarded` set is its argument value itself.
struct Value {
  enum class Kind { Ctor, Prim };
  Kind kind = Kind::Ctor;
  std::string name;
  std::string type_name;
  std::vector<Value> args;
  shapes::Head head{shapes::Side::Imm, 0};
  bool forwarded = false;

  std::string render() const;
};

struct Repr {
  shapes::Side side = shapes::Side::Imm;
  shapes::MachInt value = 0;  // immediate, or block tag
  std::vector<Repr> args;

  std::string render() const;
};

/// All values of closed type `t` with at most `depth` nested constructors,
/// primitives sampled from their table shape (Top immediates as {0, 1}, Top
/// blocks as {0}). Truncated to `max_values`. Throws Error(UnboundTypeName)
/// or Error(InvalidArgument) for open types.
std::vector<Value> enumerate_values(const decls::TypeExpr& t, const decls::DeclEnv& env,
                                    int depth, std::size_t max_values = 100'000);

/// Throws Error(IllTyped) when `v` is not a value of `t`.
Repr repr_value(const Value& v, const decls::TypeExpr& t, const decls::DeclEnv& env);
shapes::Head head_of(const Value& v, const decls::TypeExpr& t, const decls::DeclEnv& env);

/// `t` with every parameter of a declaration instantiated by `arg`.
decls::TypeExpr instantiate(const decls::Decl& d, const decls::TypeExpr& arg);

// ------------------------------------------------------------- generators

/// Deterministic across runs and platforms for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  /// Uniform in [0, n).
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(gen_() % n); }
  bool chance(double p) { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p; }

 private:
  std::mt19937_64 gen_;
};

struct ProgramGenParams {
  calculus::Mode mode = calculus::Mode::FirstOrder;
  std::size_t max_defs = 6;
  std::size_t max_arity = 3;
  /// Annotated reduction of depth-4 bodies can run for 10^5 steps on
  /// terms of 10^5 nodes.
  std::size_t max_depth = 3;
  std::size_t free_names = 3;
  /// Probability that definitions may call any definition (cycles possible)
  /// rather than only later ones.
  double recursive_bias = 0.5;
};

Program gen_program(Rng& rng, const ProgramGenParams& params);
std::vector<Program> gen_programs(std::uint64_t seed, const ProgramGenParams& params,
                                  std::size_t count);

struct DeclGenParams {
  std::size_t max_decls = 6;
  std::size_t max_ctors = 4;
  std::size_t max_params = 2;
  std::size_t max_depth = 3;
  double recursive_bias = 0.5;
};

/// `.decl` source text.
std::string gen_decls(Rng& rng, const DeclGenParams& params);
std::vector<std::string> gen_decls(std::uint64_t seed, const DeclGenParams& params,
                                   std::size_t count);

struct MacroGenParams {
  std::size_t max_macros = 6;
  std::size_t max_arity = 3;
  std::size_t max_depth = 4;
  double recursive_bias = 0.5;
};

/// `.cpp` source text in the first-order fragment.
std::string gen_macros(Rng& rng, const MacroGenParams& params);
std::vector<std::string> gen_macros(std::uint64_t seed, const MacroGenParams& params,
                                    std::size_t count);

}  // namespace shapecheck::oracle

#endif  // SHAPECHECK_ORACLE_HPP
