#ifndef SHAPECHECK_TERM_HPP
#define SHAPECHECK_TERM_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shapecheck::calculus {

using Name = std::string;

/// Ordered, duplicate-free list of the function names whose expansions
/// produced a subterm. Only membership matters for reduction.
class Trace {
 public:
  Trace() = default;
  /// Throws std::invalid_argument on duplicates.
  explicit Trace(std::vector<Name> names);

  bool contains(const Name& f) const {
    return std::find(names_.begin(), names_.end(), f) != names_.end();
  }
  /// `this, f`. Precondition: !contains(f).
  Trace extended(const Name& f) const;

  const std::vector<Name>& names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }

  /// `[a,b]`, in trace order.
  std::string render() const;

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<Name> names_;
};

struct NoAnnotation {
  friend bool operator==(NoAnnotation, NoAnnotation) { return true; }
};

namespace detail {
inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}
inline std::size_t annotation_hash(NoAnnotation) { return 0; }
inline std::size_t annotation_hash(const Trace& t) {
  std::size_t h = 0x51ed;
  for (const auto& n : t.names()) h = hash_mix(h, std::hash<Name>{}(n));
  return h;
}
}  // namespace detail

/// Immutable term node shared between terms. A term is a variable, a bare
/// function/constructor name, or an application of a head term to arguments.
/// In first-order programs the head of an application is always a name.
/// `Annotation` is carried by application nodes only.
template <class Annotation>
class Node {
 public:
  using Ptr = std::shared_ptr<const Node>;
  enum class Kind : std::uint8_t { Var, Name, App };

  static Ptr var(Name x) { return make(Kind::Var, std::move(x), nullptr, {}, {}); }
  static Ptr name(Name f) { return make(Kind::Name, std::move(f), nullptr, {}, {}); }
  static Ptr app(Ptr head, std::vector<Ptr> args, Annotation a = {}) {
    return make(Kind::App, {}, std::move(head), std::move(args), std::move(a));
  }
  /// First-order shorthand: `f(args)`.
  static Ptr call(Name f, std::vector<Ptr> args, Annotation a = {}) {
    return app(name(std::move(f)), std::move(args), std::move(a));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_var() const noexcept { return kind_ == Kind::Var; }
  bool is_name() const noexcept { return kind_ == Kind::Name; }
  bool is_app() const noexcept { return kind_ == Kind::App; }

  /// Identifier of a Var or Name node.
  const Name& id() const noexcept { return id_; }
  const Ptr& head() const noexcept { return head_; }
  std::span<const Ptr> args() const noexcept { return args_; }
  const Annotation& annotation() const noexcept { return annotation_; }

  /// Name of the head when the head is a bare name, else nullptr.
  const Name* head_name() const noexcept {
    return (kind_ == Kind::App && head_->is_name()) ? &head_->id() : nullptr;
  }

  /// Children in path order: the head first, then the arguments.
  std::size_t child_count() const noexcept {
    return kind_ == Kind::App ? args_.size() + 1 : 0;
  }
  const Ptr& child(std::size_t i) const { return i == 0 ? head_ : args_.at(i - 1); }

  std::size_t hash() const noexcept { return hash_; }
  /// Tree node count (saturating), counting head names as nodes.
  std::uint64_t tree_size() const noexcept { return size_; }

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  ~Node() {
    // Iterative: children are released from a work list, so stack depth is
    // constant in the term depth.
    thread_local std::vector<Ptr> pending;
    thread_local bool draining = false;
    if (head_) pending.push_back(std::move(head_));
    for (auto& a : args_) pending.push_back(std::move(a));
    if (draining) return;
    draining = true;
    while (!pending.empty()) {
      Ptr p = std::move(pending.back());
      pending.pop_back();
      p.reset();
    }
    draining = false;
  }

 private:
  struct Token {};

 public:
  Node(Token, Kind k, Name id, Ptr head, std::vector<Ptr> args, Annotation a)
      : kind_(k), id_(std::move(id)), head_(std::move(head)),
        args_(std::move(args)), annotation_(std::move(a)) {
    std::size_t h = detail::hash_mix(static_cast<std::size_t>(k) + 1,
                                     std::hash<Name>{}(id_));
    std::uint64_t size = 1;
    if (head_) {
      h = detail::hash_mix(h, head_->hash_);
      size = saturating_add(size, head_->size_);
    }
    for (const auto& c : args_) {
      h = detail::hash_mix(h, c->hash_);
      size = saturating_add(size, c->size_);
    }
    h = detail::hash_mix(h, detail::annotation_hash(annotation_));
    hash_ = h;
    size_ = size;
  }

 private:
  static std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
  }
  static Ptr make(Kind k, Name id, Ptr head, std::vector<Ptr> args, Annotation a) {
    return std::make_shared<const Node>(Token{}, k, std::move(id), std::move(head),
                                        std::move(args), std::move(a));
  }

  Kind kind_;
  Name id_;
  Ptr head_;
  std::vector<Ptr> args_;
  Annotation annotation_;
  std::size_t hash_ = 0;
  std::uint64_t size_ = 1;
};

/// Structural equality; shared subterms are compared once.
template <class A>
bool equal(const std::shared_ptr<const Node<A>>& a,
           const std::shared_ptr<const Node<A>>& b) {
  using Pair = std::pair<const Node<A>*, const Node<A>*>;
  std::vector<Pair> work{{a.get(), b.get()}};
  std::set<Pair> seen;
  while (!work.empty()) {
    auto [x, y] = work.back();
    work.pop_back();
    if (x == y || !seen.insert({x, y}).second) continue;
    if (x->hash() != y->hash() || x->kind() != y->kind() || x->id() != y->id() ||
        x->args().size() != y->args().size() || !(x->annotation() == y->annotation()))
      return false;
    if (x->is_app()) {
      work.emplace_back(x->head().get(), y->head().get());
      for (std::size_t i = 0; i < x->args().size(); ++i)
        work.emplace_back(x->args()[i].get(), y->args()[i].get());
    }
  }
  return true;
}

using Term = Node<NoAnnotation>;
using TermPtr = Term::Ptr;
using AnnTerm = Node<Trace>;
using AnnTermPtr = AnnTerm::Ptr;

}  // namespace shapecheck::calculus

#endif  // SHAPECHECK_TERM_HPP
