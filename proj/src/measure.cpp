#include "shapecheck/measure.hpp"

#include <algorithm>
#include <iterator>

namespace shapecheck::measure {

using calculus::AnnTerm;
using calculus::AnnTermPtr;
using calculus::Mode;

TraceKey TraceKey::of(const calculus::Trace& t) { return of_names(t.names()); }

TraceKey TraceKey::of_names(std::vector<calculus::Name> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return TraceKey(false, std::move(names));
}

bool key_less(const TraceKey& a, const TraceKey& b) {
  if (b.is_bottom()) return false;
  if (a.is_bottom()) return true;
  // a strictly contains b
  return a.names().size() > b.names().size() &&
         std::includes(a.names().begin(), a.names().end(), b.names().begin(), b.names().end());
}

std::string TraceKey::render() const {
  if (bottom_) return "bot";
  std::string out = "[";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (i) out += ',';
    out += names_[i];
  }
  return out + "]";
}

namespace {

// Both inputs sorted and canonical, so multiset difference is a merge.
template <class T, class Less>
bool sorted_multiset_less(const std::vector<T>& m1, const std::vector<T>& m2, Less less) {
  std::vector<T> only1, only2;
  std::set_difference(m1.begin(), m1.end(), m2.begin(), m2.end(), std::back_inserter(only1));
  std::set_difference(m2.begin(), m2.end(), m1.begin(), m1.end(), std::back_inserter(only2));
  if (only2.empty()) return false;
  return std::all_of(only1.begin(), only1.end(), [&](const T& x) {
    return std::any_of(only2.begin(), only2.end(), [&](const T& y) { return less(x, y); });
  });
}

}  // namespace

bool node_measure_less(const NodeMeasure& a, const NodeMeasure& b) {
  return sorted_multiset_less(a.keys, b.keys, key_less);
}

bool tree_measure_less(const TreeMeasure& a, const TreeMeasure& b) {
  return sorted_multiset_less(a.nodes, b.nodes, node_measure_less);
}

namespace {

bool measured_child(const AnnTerm& n, Mode mode) {
  return mode == Mode::ClosedHigherOrder || !n.head()->is_name();
}

TraceKey key_of(const AnnTerm& n) {
  return n.is_app() ? TraceKey::of(n.annotation()) : TraceKey::bottom();
}

// Appends the node measures of every node below `t`, whose strict ancestors
// carry `prefix`.
void collect(const AnnTerm* t, std::vector<TraceKey> prefix, Mode mode,
             std::vector<NodeMeasure>& out) {
  struct Item {
    const AnnTerm* node;
    std::vector<TraceKey> path;
  };
  std::vector<Item> work{{t, std::move(prefix)}};
  while (!work.empty()) {
    Item it = std::move(work.back());
    work.pop_back();
    const AnnTerm& n = *it.node;
    std::vector<TraceKey> keys = std::move(it.path);
    keys.push_back(key_of(n));
    if (n.is_app()) {
      if (measured_child(n, mode)) work.push_back({n.head().get(), keys});
      for (const auto& a : n.args()) work.push_back({a.get(), keys});
    }
    std::sort(keys.begin(), keys.end());
    out.push_back({std::move(keys)});
  }
}

}  // namespace

TreeMeasure tree_measure(const AnnTermPtr& t, Mode mode) {
  TreeMeasure out;
  collect(t.get(), {}, mode, out.nodes);
  std::sort(out.nodes.begin(), out.nodes.end());
  return out;
}

bool assert_decrease(const AnnTermPtr& before, const AnnTermPtr& after, Mode mode) {
  // Nodes at the same position with the same key and the same ancestor keys
  // have equal node measures; they cancel in both multisets, which leaves
  // the Dershowitz-Manna comparison unchanged.
  TreeMeasure b, a;
  struct Item {
    const AnnTerm* before;
    const AnnTerm* after;
    std::vector<TraceKey> path;
  };
  std::vector<Item> work{{before.get(), after.get(), {}}};
  while (!work.empty()) {
    Item it = std::move(work.back());
    work.pop_back();
    if (it.before == it.after) continue;
    const AnnTerm& x = *it.before;
    const AnnTerm& y = *it.after;
    bool same_node = x.kind() == y.kind() && key_of(x) == key_of(y);
    if (same_node && x.is_app())
      same_node = x.args().size() == y.args().size() &&
                  measured_child(x, mode) == measured_child(y, mode);
    if (!same_node) {
      collect(&x, it.path, mode, b.nodes);
      collect(&y, std::move(it.path), mode, a.nodes);
      continue;
    }
    if (!x.is_app()) continue;
    std::vector<TraceKey> keys = std::move(it.path);
    keys.push_back(key_of(x));
    if (measured_child(x, mode)) work.push_back({x.head().get(), y.head().get(), keys});
    for (std::size_t i = 0; i < x.args().size(); ++i)
      work.push_back({x.args()[i].get(), y.args()[i].get(), keys});
  }
  std::sort(b.nodes.begin(), b.nodes.end());
  std::sort(a.nodes.begin(), a.nodes.end());
  return tree_measure_less(a, b);
}

std::string render(const NodeMeasure& m) {
  std::string out = "{|";
  for (std::size_t i = 0; i < m.keys.size(); ++i) {
    out += i ? ", " : " ";
    out += m.keys[i].render();
  }
  return out + " |}";
}

std::string render(const TreeMeasure& m) {
  std::string out = "{|";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    out += i ? ", " : " ";
    out += render(m.nodes[i]);
  }
  return out + " |}";
}

}  // namespace shapecheck::measure
