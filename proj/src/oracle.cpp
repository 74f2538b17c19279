#include "shapecheck/oracle.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>
#include <unordered_map>

#include "shapecheck/error.hpp"

namespace shapecheck::oracle {

using calculus::Definition;
using calculus::Term;

namespace {

// Body of `d` with its parameters replaced by `args`.
TermPtr instantiate_body(const TermPtr& t, const Definition& d, std::span<const TermPtr> args) {
  switch (t->kind()) {
    case Term::Kind::Var:
      for (std::size_t i = 0; i < d.params.size(); ++i)
        if (d.params[i] == t->id()) return args[i];
      return t;
    case Term::Kind::Name:
      return t;
    case Term::Kind::App: {
      std::vector<TermPtr> out;
      out.reserve(t->args().size());
      for (const auto& a : t->args()) out.push_back(instantiate_body(a, d, args));
      return Term::app(instantiate_body(t->head(), d, args), std::move(out));
    }
  }
  return t;
}

TermPtr contract(const Program& p, const Term& redex) {
  const Definition& d = *p.find(*redex.head_name());
  return instantiate_body(d.body, d, redex.args());
}

// First-order leftmost-outermost: contract the root while it is a redex,
// then normalize the arguments left to right. Ancestors of a contracted
// position never become redexes in first-order terms, so this is exactly
// the leftmost-outermost sequence.
FuelOutcome fo_outermost(const Program& p, std::uint64_t fuel) {
  struct Frame {
    TermPtr node;
    std::vector<TermPtr> done;
    bool changed = false;
  };
  FuelOutcome out;
  std::vector<Frame> stack;
  // Subterms already known to be normal; arguments are shared, so a copied
  // argument is visited once.
  std::unordered_map<const Term*, TermPtr> normal;
  TermPtr cur = p.root();
  for (;;) {
    while (!normal.contains(cur.get()) && calculus::is_redex(p, *cur)) {
      if (out.steps == fuel) {
        out.kind = FuelOutcome::Kind::OutOfFuel;
        return out;
      }
      ++out.steps;
      cur = contract(p, *cur);
    }
    if (!normal.contains(cur.get()) && cur->is_app() && !cur->args().empty()) {
      stack.push_back({cur, {}});
      TermPtr first = cur->args()[0];
      cur = std::move(first);
      continue;
    }
    TermPtr value = cur;
    for (;;) {
      normal.emplace(value.get(), value);
      if (stack.empty()) {
        out.normal_form = std::move(value);
        return out;
      }
      Frame& top = stack.back();
      if (value != top.node->args()[top.done.size()]) top.changed = true;
      top.done.push_back(std::move(value));
      if (top.done.size() < top.node->args().size()) {
        cur = top.node->args()[top.done.size()];
        break;
      }
      value = top.changed ? Term::app(top.node->head(), std::move(top.done)) : top.node;
      stack.pop_back();
    }
  }
}

// First-order leftmost-innermost as an environment machine: arguments are
// evaluated left to right to normal form before a call is contracted, and
// a contracted body is evaluated before anything to its right.
FuelOutcome fo_innermost(const Program& p, std::uint64_t fuel) {
  using Env = std::shared_ptr<const std::vector<TermPtr>>;
  struct Instr {
    bool build;  // false: evaluate `expr`; true: assemble `expr` from values
    const Term* expr;
    const Definition* def;  // parameters of `env`
    Env env;
  };
  FuelOutcome out;
  std::vector<Instr> code{{false, p.root().get(), nullptr, nullptr}};
  std::vector<TermPtr> values;
  TermPtr root_keep = p.root();
  while (!code.empty()) {
    Instr in = std::move(code.back());
    code.pop_back();
    const Term& e = *in.expr;
    if (!in.build) {
      if (e.is_var()) {
        TermPtr v;
        if (in.def != nullptr)
          for (std::size_t i = 0; i < in.def->params.size(); ++i)
            if (in.def->params[i] == e.id()) v = (*in.env)[i];
        values.push_back(v ? v : Term::var(e.id()));
      } else if (e.is_name()) {
        values.push_back(Term::name(e.id()));
      } else {
        code.push_back({true, in.expr, in.def, in.env});
        for (std::size_t i = e.args().size(); i-- > 0;)
          code.push_back({false, e.args()[i].get(), in.def, in.env});
      }
      continue;
    }
    std::size_t n = e.args().size();
    std::vector<TermPtr> args(std::make_move_iterator(values.end() - static_cast<std::ptrdiff_t>(n)),
                              std::make_move_iterator(values.end()));
    values.resize(values.size() - n);
    const Definition* d = e.head()->is_name() ? p.find(e.head()->id()) : nullptr;
    if (d != nullptr && d->params.size() == n) {
      if (out.steps == fuel) {
        out.kind = FuelOutcome::Kind::OutOfFuel;
        return out;
      }
      ++out.steps;
      code.push_back({false, d->body.get(), d, std::make_shared<const std::vector<TermPtr>>(std::move(args))});
    } else {
      values.push_back(Term::app(e.head(), std::move(args)));
    }
  }
  out.normal_form = values.back();
  return out;
}

template <class Visit>
void visit_plain(const TermPtr& t, bool postorder, Visit&& visit) {
  struct Frame {
    const Term* node;
    std::size_t next;
  };
  calculus::Path path;
  std::vector<Frame> stack{{t.get(), 0}};
  if (!postorder && !visit(*t, path)) return;
  while (!stack.empty()) {
    Frame& fr = stack.back();
    if (fr.next < fr.node->child_count()) {
      std::size_t i = fr.next++;
      const Term* c = fr.node->child(i).get();
      path.push_back(i);
      stack.push_back({c, 0});
      if (!postorder && !visit(*c, path)) return;
    } else {
      if (postorder && !visit(*fr.node, path)) return;
      stack.pop_back();
      if (!stack.empty()) path.pop_back();
    }
  }
}

}  // namespace

PlainStep plain_step(const Program& p, const TermPtr& t, Strategy strategy) {
  PlainStep s;
  const Term* found = nullptr;
  visit_plain(t, strategy == Strategy::LeftmostInnermost, [&](const Term& n, const calculus::Path& path) {
    if (!calculus::is_redex(p, n)) return true;
    found = &n;
    s.path = path;
    return false;
  });
  if (found == nullptr) return s;
  s.reduced = true;
  s.name = *found->head_name();
  s.next = calculus::replace_at(t, s.path, contract(p, *found));
  return s;
}

FuelOutcome fuel_normalize(const Program& p, Strategy strategy, std::uint64_t fuel) {
  if (fuel == 0) throw Error(ErrorKind::InvalidArgument, "fuel must be at least 1");
  if (p.mode() == calculus::Mode::FirstOrder)
    return strategy == Strategy::LeftmostOutermost ? fo_outermost(p, fuel) : fo_innermost(p, fuel);
  FuelOutcome out;
  TermPtr cur = p.root();
  for (;;) {
    PlainStep s = plain_step(p, cur, strategy);
    if (!s.reduced) {
      out.normal_form = cur;
      return out;
    }
    if (out.steps == fuel) {
      out.kind = FuelOutcome::Kind::OutOfFuel;
      return out;
    }
    ++out.steps;
    cur = std::move(s.next);
  }
}

std::string_view to_string(MonitorOutcome::Kind k) {
  switch (k) {
    case MonitorOutcome::Kind::Normal: return "normal";
    case MonitorOutcome::Kind::Blocked: return "blocked";
    case MonitorOutcome::Kind::OutOfFuel: return "out-of-fuel";
  }
  return "?";
}

namespace {

template <class Refuse, class Record>
MonitorOutcome run_monitor(const Program& p, Strategy strategy, std::uint64_t fuel, Refuse refuse,
                           Record record) {
  MonitorOutcome out;
  TermPtr cur = p.root();
  record(cur, PlainStep{});
  for (;;) {
    PlainStep s = plain_step(p, cur, strategy);
    if (!s.reduced) {
      out.term = cur;
      return out;
    }
    if (refuse(s)) {
      out.kind = MonitorOutcome::Kind::Blocked;
      out.term = cur;
      out.blocked_name = s.name;
      return out;
    }
    if (out.steps == fuel) {
      out.kind = MonitorOutcome::Kind::OutOfFuel;
      out.term = cur;
      return out;
    }
    ++out.steps;
    cur = s.next;
    record(cur, s);
  }
}

}  // namespace

MonitorOutcome naive_whole_term_monitor(const Program& p, Strategy strategy, std::uint64_t fuel) {
  std::unordered_multimap<std::size_t, TermPtr> seen;
  auto contains = [&](const TermPtr& t) {
    auto [lo, hi] = seen.equal_range(t->hash());
    for (auto it = lo; it != hi; ++it)
      if (calculus::equal(it->second, t)) return true;
    return false;
  };
  return run_monitor(
      p, strategy, fuel, [&](const PlainStep& s) { return contains(s.next); },
      [&](const TermPtr& t, const PlainStep&) { seen.emplace(t->hash(), t); });
}

MonitorOutcome head_function_monitor(const Program& p, Strategy strategy, std::uint64_t fuel) {
  std::set<calculus::Name> expanded;
  return run_monitor(
      p, strategy, fuel, [&](const PlainStep& s) { return expanded.contains(s.name); },
      [&](const TermPtr&, const PlainStep& s) {
        if (s.reduced) expanded.insert(s.name);
      });
}

// ------------------------------------------------------------------ values

using decls::Decl;
using decls::DeclEnv;
using decls::TypeExpr;
using shapes::Head;
using shapes::Side;

std::string Value::render() const {
  if (kind == Kind::Prim) {
    if (forwarded) return name + "!" + args[0].render();
    if (!args.empty()) {
      std::string out = "(";
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        out += args[i].render();
      }
      return out + ")";
    }
    return "<" + name + " " + shapes::render(head) + ">";
  }
  if (args.empty()) return name;
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i].render();
  }
  return out + ")";
}

std::string Repr::render() const {
  if (side == Side::Imm) return "Imm " + std::to_string(value);
  std::string out = "Block " + std::to_string(value);
  if (args.empty()) return out;
  out += " (";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i].render();
  }
  return out + ")";
}

namespace {

TypeExpr subst_params(const TypeExpr& t, const std::vector<std::string>& params,
                      const std::vector<TypeExpr>& args) {
  if (t.kind == TypeExpr::Kind::Var) {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i] == t.name) return args[i];
    return t;
  }
  TypeExpr out = t;
  for (auto& a : out.args) a = subst_params(a, params, args);
  return out;
}

std::vector<Head> sample_heads(const shapes::HeadShapeStx& s) {
  std::vector<Head> out;
  if (s.imm.is_top()) {
    out.push_back({Side::Imm, 0});
    out.push_back({Side::Imm, 1});
  } else {
    for (auto v : s.imm.values()) out.push_back({Side::Imm, v});
  }
  if (s.block.is_top()) {
    out.push_back({Side::Block, 0});
  } else {
    for (auto v : s.block.values()) out.push_back({Side::Block, v});
  }
  return out;
}

constexpr int kMaxAbbrevUnfold = 64;

class Enumerator {
 public:
  Enumerator(const DeclEnv& env, std::size_t max) : env_(env), max_(max) {}

  std::vector<Value> values(const TypeExpr& t, int depth, int unfold = 0) {
    std::vector<Value> out;
    switch (t.kind) {
      case TypeExpr::Kind::Var:
        throw Error(ErrorKind::InvalidArgument, "cannot enumerate the open type " + decls::render(t));
      case TypeExpr::Kind::Prim: {
        const shapes::PrimEntry* e = env_.prims().find(t.name);
        if (e == nullptr) throw Error(ErrorKind::UnknownPrimitive, "unknown primitive " + t.name);
        if (t.name == "tuple" && !t.args.empty()) {
          if (depth <= 0) return out;
          for (auto& parts : product(t.args, depth - 1)) {
            Value v;
            v.kind = Value::Kind::Prim;
            v.name = t.name;
            v.head = {Side::Block, 0};
            v.args = std::move(parts);
            push(out, std::move(v));
          }
          return out;
        }
        for (const Head& h : sample_heads(e->shape)) {
          Value v;
          v.kind = Value::Kind::Prim;
          v.name = t.name;
          v.head = h;
          push(out, std::move(v));
        }
        if (e->lazy_like && !t.args.empty())
          for (auto& inner : values(t.args[0], depth, unfold)) {
            Value v;
            v.kind = Value::Kind::Prim;
            v.name = t.name;
            v.forwarded = true;
            v.args.push_back(std::move(inner));
            push(out, std::move(v));
          }
        return out;
      }
      case TypeExpr::Kind::App:
        break;
    }
    const Decl* d = env_.find(t.name);
    if (d == nullptr) throw Error(ErrorKind::UnboundTypeName, "unbound type " + t.name);
    switch (d->body) {
      case Decl::Body::Abstract:
        for (const Head& h : sample_heads(d->shape)) {
          Value v;
          v.kind = Value::Kind::Prim;
          v.name = d->name;
          v.head = h;
          push(out, std::move(v));
        }
        return out;
      case Decl::Body::Abbrev:
        if (unfold >= kMaxAbbrevUnfold)
          throw Error(ErrorKind::InvalidArgument, "abbreviation cycle through " + d->name);
        return values(subst_params(d->abbrev, d->params, t.args), depth, unfold + 1);
      case Decl::Body::Variant:
        break;
    }
    if (depth <= 0) return out;
    for (const auto& c : d->ctors) {
      std::vector<TypeExpr> arg_types;
      for (const auto& a : c.args) arg_types.push_back(subst_params(a, d->params, t.args));
      for (auto& parts : product(arg_types, depth - 1)) {
        Value v;
        v.kind = Value::Kind::Ctor;
        v.name = c.name;
        v.type_name = d->name;
        v.args = std::move(parts);
        push(out, std::move(v));
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<Value>> product(const std::vector<TypeExpr>& types, int depth) {
    std::vector<std::vector<Value>> acc(1);
    for (const auto& ty : types) {
      std::vector<Value> vs = values(ty, depth);
      std::vector<std::vector<Value>> next;
      for (const auto& prefix : acc)
        for (const auto& v : vs) {
          if (next.size() >= max_) break;
          next.push_back(prefix);
          next.back().push_back(v);
        }
      acc = std::move(next);
    }
    return acc;
  }

  void push(std::vector<Value>& out, Value v) {
    if (out.size() < max_) out.push_back(std::move(v));
  }

  const DeclEnv& env_;
  std::size_t max_;
};

[[noreturn]] void ill_typed(const Value& v, const TypeExpr& t) {
  throw Error(ErrorKind::IllTyped, v.render() + " is not a value of " + decls::render(t));
}

}  // namespace

std::vector<Value> enumerate_values(const TypeExpr& t, const DeclEnv& env, int depth,
                                    std::size_t max_values) {
  return Enumerator(env, max_values).values(t, depth);
}

Repr repr_value(const Value& v, const TypeExpr& t, const DeclEnv& env) {
  switch (t.kind) {
    case TypeExpr::Kind::Var: ill_typed(v, t);
    case TypeExpr::Kind::Prim: {
      if (v.kind != Value::Kind::Prim || v.name != t.name) ill_typed(v, t);
      const shapes::PrimEntry* e = env.prims().find(t.name);
      if (e == nullptr) ill_typed(v, t);
      if (v.forwarded) {
        if (!e->lazy_like || t.args.empty() || v.args.size() != 1) ill_typed(v, t);
        return repr_value(v.args[0], t.args[0], env);
      }
      Repr r{v.head.side, v.head.value, {}};
      if (!v.args.empty()) {
        if (v.args.size() != t.args.size()) ill_typed(v, t);
        for (std::size_t i = 0; i < v.args.size(); ++i)
          r.args.push_back(repr_value(v.args[i], t.args[i], env));
      }
      return r;
    }
    case TypeExpr::Kind::App:
      break;
  }
  const Decl* d = env.find(t.name);
  if (d == nullptr) throw Error(ErrorKind::UnboundTypeName, "unbound type " + t.name);
  if (d->body == Decl::Body::Abstract) {
    if (v.kind != Value::Kind::Prim || v.name != d->name) ill_typed(v, t);
    return {v.head.side, v.head.value, {}};
  }
  if (d->body == Decl::Body::Abbrev)
    return repr_value(v, subst_params(d->abbrev, d->params, t.args), env);
  if (v.kind != Value::Kind::Ctor || v.type_name != d->name) ill_typed(v, t);
  const decls::CtorDecl* c = d->find_ctor(v.name);
  if (c == nullptr || c->args.size() != v.args.size()) ill_typed(v, t);
  if (c->unboxed) return repr_value(v.args[0], subst_params(c->args[0], d->params, t.args), env);
  if (c->is_constant()) return {Side::Imm, static_cast<shapes::MachInt>(c->index), {}};
  Repr r{Side::Block, static_cast<shapes::MachInt>(c->index), {}};
  for (std::size_t i = 0; i < v.args.size(); ++i)
    r.args.push_back(repr_value(v.args[i], subst_params(c->args[i], d->params, t.args), env));
  return r;
}

Head head_of(const Value& v, const TypeExpr& t, const DeclEnv& env) {
  Repr r = repr_value(v, t, env);
  return {r.side, r.value};
}

TypeExpr instantiate(const Decl& d, const TypeExpr& arg) {
  return TypeExpr::app(d.name, std::vector<TypeExpr>(d.params.size(), arg));
}

// -------------------------------------------------------------- generators

namespace {

struct ProgramShape {
  std::vector<std::string> names;
  std::vector<std::size_t> arity;
  bool recursive = false;
};

// First-order term over `params`; definition `self` may call later
// definitions only, unless the program is recursive.
TermPtr gen_fo_term(Rng& rng, const ProgramGenParams& gp, const ProgramShape& ps,
                    const std::vector<std::string>& params, std::size_t self, std::size_t depth) {
  std::size_t roll = rng.below(10);
  if (depth == 0 || roll < 4) {
    if (!params.empty() && rng.chance(0.6)) return Term::var(params[rng.below(params.size())]);
    return Term::call("c0", {});
  }
  std::vector<std::size_t> callable;
  for (std::size_t i = 0; i < ps.names.size(); ++i)
    if (ps.recursive || i > self) callable.push_back(i);
  std::vector<TermPtr> args;
  if (roll < 7 && !callable.empty()) {
    std::size_t g = callable[rng.below(callable.size())];
    for (std::size_t i = 0; i < ps.arity[g]; ++i)
      args.push_back(gen_fo_term(rng, gp, ps, params, self, depth - 1));
    return Term::call(ps.names[g], std::move(args));
  }
  std::size_t c = gp.free_names <= 1 ? 0 : 1 + rng.below(gp.free_names - 1);
  std::size_t arity = std::min<std::size_t>(c, 2);
  for (std::size_t i = 0; i < arity; ++i)
    args.push_back(gen_fo_term(rng, gp, ps, params, self, depth - 1));
  return Term::call("c" + std::to_string(c), std::move(args));
}

TermPtr gen_ho_leaf(Rng& rng, const ProgramGenParams& gp, const ProgramShape& ps,
                    const std::vector<std::string>& params) {
  std::size_t roll = rng.below(10);
  if (!params.empty() && roll < 4) return Term::var(params[rng.below(params.size())]);
  if (!ps.names.empty() && roll < 8) return Term::name(ps.names[rng.below(ps.names.size())]);
  return Term::name("c" + std::to_string(rng.below(std::max<std::size_t>(gp.free_names, 1))));
}

TermPtr gen_ho_term(Rng& rng, const ProgramGenParams& gp, const ProgramShape& ps,
                    const std::vector<std::string>& params, std::size_t self, std::size_t depth) {
  if (depth == 0 || rng.below(10) < 4) return gen_ho_leaf(rng, gp, ps, params);
  TermPtr head;
  std::size_t nargs;
  std::vector<std::size_t> callable;
  for (std::size_t i = 0; i < ps.names.size(); ++i)
    if (ps.recursive || i > self) callable.push_back(i);
  if (!callable.empty() && rng.chance(0.6)) {
    std::size_t g = callable[rng.below(callable.size())];
    head = Term::name(ps.names[g]);
    nargs = rng.chance(0.85) ? ps.arity[g] : rng.below(gp.max_arity + 1);
  } else {
    head = gen_ho_leaf(rng, gp, ps, params);
    nargs = 1 + rng.below(std::max<std::size_t>(gp.max_arity, 1));
  }
  std::vector<TermPtr> args;
  for (std::size_t i = 0; i < nargs; ++i)
    args.push_back(gen_ho_term(rng, gp, ps, params, self, depth - 1));
  return Term::app(std::move(head), std::move(args));
}

}  // namespace

Program gen_program(Rng& rng, const ProgramGenParams& gp) {
  ProgramShape ps;
  std::size_t n = rng.below(gp.max_defs + 1);
  ps.recursive = rng.chance(gp.recursive_bias);
  for (std::size_t i = 0; i < n; ++i) {
    ps.names.push_back("f" + std::to_string(i));
    ps.arity.push_back(rng.below(gp.max_arity + 1));
  }
  const bool fo = gp.mode == calculus::Mode::FirstOrder;
  std::vector<Definition> defs;
  for (std::size_t i = 0; i < n; ++i) {
    Definition d;
    d.name = ps.names[i];
    for (std::size_t k = 0; k < ps.arity[i]; ++k) d.params.push_back("x" + std::to_string(k));
    d.body = fo ? gen_fo_term(rng, gp, ps, d.params, i, gp.max_depth)
                : gen_ho_term(rng, gp, ps, d.params, i, gp.max_depth);
    defs.push_back(std::move(d));
  }
  // The root may call every definition, and is a call when one exists.
  ProgramShape root_shape = ps;
  root_shape.recursive = true;
  auto gen = [&](std::size_t depth) {
    return fo ? gen_fo_term(rng, gp, root_shape, {}, 0, depth)
              : gen_ho_term(rng, gp, root_shape, {}, 0, depth);
  };
  TermPtr root;
  if (n > 0 && gp.max_depth > 0) {
    std::size_t g = rng.below(n);
    std::vector<TermPtr> args;
    for (std::size_t k = 0; k < ps.arity[g]; ++k) args.push_back(gen(gp.max_depth - 1));
    root = fo ? Term::call(ps.names[g], std::move(args))
              : Term::app(Term::name(ps.names[g]), std::move(args));
  } else {
    root = gen(gp.max_depth);
  }
  return Program(std::move(defs), std::move(root), gp.mode);
}

std::vector<Program> gen_programs(std::uint64_t seed, const ProgramGenParams& params,
                                  std::size_t count) {
  Rng rng(seed);
  std::vector<Program> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen_program(rng, params));
  return out;
}

namespace {

const char* const kGenPrims[] = {"int", "bool", "unit", "string", "float"};

std::string gen_type_expr(Rng& rng, const DeclGenParams& gp, std::size_t n_types,
                          const std::vector<std::size_t>& n_params, std::size_t self,
                          bool recursive, std::size_t n_own_params, std::size_t depth) {
  std::size_t roll = rng.below(10);
  if (depth == 0 || roll < 3) {
    if (n_own_params > 0 && rng.chance(0.3)) return "'a" + std::to_string(rng.below(n_own_params));
    return kGenPrims[rng.below(std::size(kGenPrims))];
  }
  if (roll == 3) {
    return "(" + gen_type_expr(rng, gp, n_types, n_params, self, recursive, n_own_params, depth - 1) +
           " * " + gen_type_expr(rng, gp, n_types, n_params, self, recursive, n_own_params, depth - 1) +
           ")";
  }
  if (roll == 4)
    return "(" + gen_type_expr(rng, gp, n_types, n_params, self, recursive, n_own_params, depth - 1) +
           ") lazy";
  std::vector<std::size_t> refs;
  for (std::size_t i = 0; i < n_types; ++i)
    if (recursive || i > self) refs.push_back(i);
  if (refs.empty()) return kGenPrims[rng.below(std::size(kGenPrims))];
  std::size_t g = refs[rng.below(refs.size())];
  std::string name = "t" + std::to_string(g);
  std::size_t k = n_params[g];
  if (k == 0) return name;
  std::string args;
  for (std::size_t i = 0; i < k; ++i) {
    if (i) args += ", ";
    args += gen_type_expr(rng, gp, n_types, n_params, self, recursive, n_own_params, depth - 1);
  }
  return "(" + args + ") " + name;
}

}  // namespace

std::string gen_decls(Rng& rng, const DeclGenParams& gp) {
  std::size_t n = 1 + rng.below(std::max<std::size_t>(gp.max_decls, 1));
  bool recursive = rng.chance(gp.recursive_bias);
  std::vector<std::size_t> n_params(n);
  for (auto& k : n_params) k = rng.below(gp.max_params + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += i == 0 ? "type " : "and ";
    if (n_params[i] == 1) out += "'a0 ";
    if (n_params[i] > 1) {
      out += "(";
      for (std::size_t k = 0; k < n_params[i]; ++k) out += (k ? ", 'a" : "'a") + std::to_string(k);
      out += ") ";
    }
    out += "t" + std::to_string(i);
    std::size_t kind = rng.below(10);
    if (kind == 0) {
      if (n_params[i] == 0 && rng.chance(0.5)) out += " [@shape (imm: {}; block: {255})]";
      out += "\n";
      continue;
    }
    out += " =";
    if (kind == 1) {
      out += " " + gen_type_expr(rng, gp, n, n_params, i, recursive, n_params[i], gp.max_depth) + "\n";
      continue;
    }
    std::size_t nctors = 1 + rng.below(std::max<std::size_t>(gp.max_ctors, 1));
    for (std::size_t c = 0; c < nctors; ++c) {
      out += "\n  | C" + std::to_string(i) + "_" + std::to_string(c);
      std::size_t ck = rng.below(3);
      if (ck == 0) continue;
      out += " of " + gen_type_expr(rng, gp, n, n_params, i, recursive, n_params[i], gp.max_depth);
      if (ck == 1 && rng.chance(0.5))
        out += " * " + gen_type_expr(rng, gp, n, n_params, i, recursive, n_params[i], gp.max_depth);
      else if (ck == 2)
        out += " [@unboxed]";
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> gen_decls(std::uint64_t seed, const DeclGenParams& params,
                                   std::size_t count) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen_decls(rng, params));
  return out;
}

namespace {

std::string gen_macro_term(Rng& rng, const MacroGenParams& gp, const std::vector<std::size_t>& arity,
                           bool recursive, std::size_t self, std::size_t n_formals,
                           std::size_t depth) {
  std::size_t roll = rng.below(10);
  if (depth == 0 || roll < 4) {
    if (n_formals > 0 && rng.chance(0.6)) return "p" + std::to_string(rng.below(n_formals));
    std::size_t leaf = rng.below(3);
    return leaf == 0 ? "x" : leaf == 1 ? "y" : "42";
  }
  std::vector<std::size_t> callable;
  for (std::size_t i = 0; i < arity.size(); ++i)
    if (recursive || i > self) callable.push_back(i);
  std::string head;
  std::size_t nargs;
  if (roll < 7 && !callable.empty()) {
    std::size_t g = callable[rng.below(callable.size())];
    head = "M" + std::to_string(g);
    nargs = arity[g];
  } else {
    head = rng.chance(0.5) ? "h" : "k";
    nargs = 1 + rng.below(2);
  }
  std::string out = head + "(";
  for (std::size_t i = 0; i < nargs; ++i) {
    if (i) out += ", ";
    out += gen_macro_term(rng, gp, arity, recursive, self, n_formals, depth - 1);
  }
  return out + ")";
}

}  // namespace

std::string gen_macros(Rng& rng, const MacroGenParams& gp) {
  std::size_t n = rng.below(gp.max_macros + 1);
  bool recursive = rng.chance(gp.recursive_bias);
  std::vector<std::size_t> arity(n);
  for (auto& a : arity) a = rng.below(gp.max_arity + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += "#define M" + std::to_string(i) + "(";
    for (std::size_t k = 0; k < arity[i]; ++k) out += (k ? ", p" : "p") + std::to_string(k);
    out += ") " + gen_macro_term(rng, gp, arity, recursive, i, arity[i], gp.max_depth) + "\n";
  }
  out += gen_macro_term(rng, gp, arity, true, 0, 0, gp.max_depth) + "\n";
  return out;
}

std::vector<std::string> gen_macros(std::uint64_t seed, const MacroGenParams& params,
                                    std::size_t count) {
  Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(gen_macros(rng, params));
  return out;
}

}  // namespace shapecheck::oracle
