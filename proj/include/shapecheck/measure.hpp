#ifndef SHAPECHECK_MEASURE_HPP
#define SHAPECHECK_MEASURE_HPP

#include <algorithm>
#include <compare>
#include <functional>
#include <string>
#include <vector>

#include "shapecheck/calculus.hpp"

// Termination measure for annotated reduction: every node is measured by the
// multiset of trace keys on its path to the root, and a term by the multiset
// of its node measures. Annotated reduction strictly decreases this measure
// in the Dershowitz-Manna ordering. Used as a runtime check only.

namespace shapecheck::measure {

/// Multiset ordering with the intersection as the common part:
/// m1 < m2 iff N2 = m2 - m1 is nonempty and every element of N1 = m1 - m2
/// is strictly below some element of N2. `less` must be a strict partial
/// order and `equal` an equivalence compatible with it.
template <class T, class Less, class Equal = std::equal_to<T>>
bool multiset_less(const std::vector<T>& m1, const std::vector<T>& m2, Less less,
                   Equal equal = {}) {
  // Multiset difference by matching equal elements pairwise.
  std::vector<bool> used2(m2.size(), false);
  std::vector<const T*> only1;
  for (const T& x : m1) {
    bool matched = false;
    for (std::size_t j = 0; j < m2.size(); ++j) {
      if (!used2[j] && equal(x, m2[j])) {
        used2[j] = matched = true;
        break;
      }
    }
    if (!matched) only1.push_back(&x);
  }
  std::vector<const T*> only2;
  for (std::size_t j = 0; j < m2.size(); ++j)
    if (!used2[j]) only2.push_back(&m2[j]);
  if (only2.empty()) return false;
  return std::all_of(only1.begin(), only1.end(), [&](const T* x) {
    return std::any_of(only2.begin(), only2.end(), [&](const T* y) { return less(*x, *y); });
  });
}

/// The trace of a node as a set of names, or Bottom for leaves that cannot
/// reduce (variables, and bare names in closed-higher-order terms).
class TraceKey {
 public:
  static TraceKey bottom() { return TraceKey(true, {}); }
  static TraceKey of(const calculus::Trace& t);
  static TraceKey of_names(std::vector<calculus::Name> names);

  bool is_bottom() const noexcept { return bottom_; }
  /// Sorted, duplicate-free.
  const std::vector<calculus::Name>& names() const noexcept { return names_; }

  /// Strict key order: Bottom below every trace; l below l' iff l is a
  /// strict superset of l' (anti-inclusion).
  friend bool key_less(const TraceKey& a, const TraceKey& b);

  /// Total order used only for canonical sorting and equality.
  friend std::strong_ordering operator<=>(const TraceKey& a, const TraceKey& b) {
    if (a.bottom_ != b.bottom_)
      return a.bottom_ ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.names_ <=> b.names_;
  }
  friend bool operator==(const TraceKey&, const TraceKey&) = default;

  std::string render() const;

 private:
  TraceKey(bool bottom, std::vector<calculus::Name> names)
      : bottom_(bottom), names_(std::move(names)) {}

  bool bottom_;
  std::vector<calculus::Name> names_;
};

bool key_less(const TraceKey& a, const TraceKey& b);

/// Multiset of keys along the root path of one node (root included).
struct NodeMeasure {
  std::vector<TraceKey> keys;  // sorted
  friend auto operator<=>(const NodeMeasure&, const NodeMeasure&) = default;
  friend bool operator==(const NodeMeasure&, const NodeMeasure&) = default;
};

/// One NodeMeasure per node of the term.
struct TreeMeasure {
  std::vector<NodeMeasure> nodes;  // sorted
  friend bool operator==(const TreeMeasure&, const TreeMeasure&) = default;
};

bool node_measure_less(const NodeMeasure& a, const NodeMeasure& b);
bool tree_measure_less(const TreeMeasure& a, const TreeMeasure& b);

/// First-order terms are measured on the term tree itself (application
/// nodes keyed by their trace, variables Bottom). Closed-higher-order terms
/// use an explicit application node whose first child is the head; names and
/// variables are Bottom leaves.
TreeMeasure tree_measure(const calculus::AnnTermPtr& t, calculus::Mode mode);

/// tree_measure(after) < tree_measure(before).
bool assert_decrease(const calculus::AnnTermPtr& before, const calculus::AnnTermPtr& after,
                     calculus::Mode mode);

/// `{| {| [f], [f,g] |}, ... |}` with keys and node measures sorted.
std::string render(const NodeMeasure& m);
std::string render(const TreeMeasure& m);

}  // namespace shapecheck::measure

#endif  // SHAPECHECK_MEASURE_HPP
