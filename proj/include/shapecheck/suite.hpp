#ifndef SHAPECHECK_SUITE_HPP
#define SHAPECHECK_SUITE_HPP

#include <cstdint>
#include <string>
#include <vector>

// Property suites that cross-check the library against the oracles on
// seeded corpora. Each suite counts violations and keeps the first few
// counterexamples, with enough context to rerun them.

namespace shapecheck::suite {

struct Config {
  std::uint64_t seed = 42;
  /// Generated programs, macro systems or declaration files per suite.
  std::size_t cases = 1000;
  /// Fuel of the unmonitored reference reducer.
  std::uint64_t fuel = 100'000;
};

struct Result {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t violations = 0;
  /// First counterexamples, one per line.
  std::vector<std::string> failures;
  /// One-line summary of what was exercised.
  std::string summary;
  double seconds = 0;

  bool passed() const noexcept { return violations == 0; }
};

/// Every annotated step on generated programs decreases the tree measure
/// (both modes, both strategies).
Result measure_monotonicity(const Config& c);

/// Generated first-order programs: annotated normalization terminates; a
/// Normal(v) under either strategy is the normal form found by unmonitored
/// leftmost-outermost reduction; Diverges under leftmost-outermost means
/// the unmonitored reduction runs out of fuel.
Result reduction_agreement(const Config& c);

/// Generated first-order macro systems expand to the same tokens under
/// Prosser's algorithm and the trace-annotated calculus.
Result prosser_agreement(const Config& c);

/// Random shape pairs: union and disjoint union agree with pointwise
/// membership over immediates and tags in [-4, 260].
Result shape_semantics(const Config& c);

/// For every accepted variant or abbreviation of `decl_sources`: enumerated
/// values of depth <= `depth` have heads inside the declared shape, and for
/// variants the match_plan tests are pairwise disjoint and select exactly
/// the value's constructor. Parameters are instantiated with `int` and with
/// `string`. Sources that fail to parse count as violations.
Result enumeration_soundness(const std::vector<std::string>& decl_sources, int depth = 3);

/// Declaration normalization agrees with the calculus on the first-order
/// encoding: same components or both blocked, on generated declarations.
Result encoding_agreement(const Config& c);

/// The two rejected monitors against the trace monitor on `loop(int)` and
/// `id(id(int))`.
Result monitor_demonstrations();

/// All of the above; enumeration runs on generated declarations.
std::vector<Result> run_all(const Config& c);

/// `PASS  name  cases=N  violations=V  summary`, then failures. Timings are
/// left out so the output is reproducible.
std::string render(const Result& r);

}  // namespace shapecheck::suite

#endif  // SHAPECHECK_SUITE_HPP
