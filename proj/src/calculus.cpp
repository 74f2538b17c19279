#include "shapecheck/calculus.hpp"

#include <cctype>
#include <set>
#include <stdexcept>

#include "shapecheck/error.hpp"

namespace shapecheck::calculus {

Trace::Trace(std::vector<Name> names) : names_(std::move(names)) {
  std::set<Name> seen;
  for (const auto& n : names_)
    if (!seen.insert(n).second)
      throw std::invalid_argument("duplicate name in trace: " + n);
}

Trace Trace::extended(const Name& f) const {
  Trace t = *this;
  t.names_.push_back(f);
  return t;
}

std::string Trace::render() const {
  std::string out = "[";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (i) out += ',';
    out += names_[i];
  }
  return out + "]";
}

std::string_view to_string(Mode m) {
  return m == Mode::FirstOrder ? "first-order" : "closed-higher-order";
}

std::string_view to_string(Strategy s) {
  return s == Strategy::LeftmostOutermost ? "leftmost-outermost" : "leftmost-innermost";
}

std::string render_path(const Path& p) {
  if (p.empty()) return "root";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += '.';
    out += std::to_string(p[i]);
  }
  return out;
}

// ---------------------------------------------------------------- Program

namespace {

void check_term(const Program& p, const TermPtr& t, const std::set<Name>* params,
                const std::string& where) {
  std::vector<const Term*> work{t.get()};
  while (!work.empty()) {
    const Term* n = work.back();
    work.pop_back();
    switch (n->kind()) {
      case Term::Kind::Var:
        if (params != nullptr && !params->contains(n->id()))
          throw Error(ErrorKind::MalformedProgram,
                      "unbound variable " + n->id() + " in " + where);
        break;
      case Term::Kind::Name:
        if (p.mode() == Mode::FirstOrder && p.is_defined(n->id()))
          throw Error(ErrorKind::ArityMismatch,
                      "function " + n->id() + " used without arguments in " + where);
        break;
      case Term::Kind::App: {
        if (p.mode() == Mode::FirstOrder) {
          if (!n->head()->is_name())
            throw Error(ErrorKind::MalformedProgram,
                        "first-order application with a non-name head in " + where);
          if (const Definition* d = p.find(n->head()->id());
              d != nullptr && d->params.size() != n->args().size())
            throw Error(ErrorKind::ArityMismatch,
                        "function " + d->name + " expects " +
                            std::to_string(d->params.size()) + " argument(s), got " +
                            std::to_string(n->args().size()) + " in " + where);
        } else {
          work.push_back(n->head().get());
        }
        for (const auto& a : n->args()) work.push_back(a.get());
        break;
      }
    }
  }
}

}  // namespace

Program::Program(std::vector<Definition> defs, TermPtr root, Mode mode)
    : defs_(std::move(defs)), root_(std::move(root)), mode_(mode) {
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    const auto& d = defs_[i];
    if (!index_.emplace(d.name, i).second)
      throw Error(ErrorKind::DuplicateDefinition, "function " + d.name + " defined twice");
    std::set<Name> ps;
    for (const auto& x : d.params)
      if (!ps.insert(x).second)
        throw Error(ErrorKind::MalformedProgram,
                    "parameter " + x + " repeated in definition of " + d.name);
    if (!d.body) throw Error(ErrorKind::MalformedProgram, "missing body for " + d.name);
  }
  if (!root_) throw Error(ErrorKind::MalformedProgram, "missing root term");
  for (const auto& d : defs_) {
    std::set<Name> ps(d.params.begin(), d.params.end());
    check_term(*this, d.body, &ps, "definition of " + d.name);
  }
  check_term(*this, root_, nullptr, "root term");
}

const Definition* Program::find(const Name& f) const {
  auto it = index_.find(f);
  return it == index_.end() ? nullptr : &defs_[it->second];
}

Program Program::with_root(TermPtr root) const { return Program(defs_, std::move(root), mode_); }

// --------------------------------------------------- annotation and erasure

AnnTermPtr annotate(const TermPtr& t, const Substitution& subst, const Trace& l) {
  switch (t->kind()) {
    case Term::Kind::Var: {
      auto it = subst.find(t->id());
      return it != subst.end() ? it->second : AnnTerm::var(t->id());
    }
    case Term::Kind::Name:
      return AnnTerm::name(t->id());
    case Term::Kind::App: {
      std::vector<AnnTermPtr> args;
      args.reserve(t->args().size());
      for (const auto& a : t->args()) args.push_back(annotate(a, subst, l));
      return AnnTerm::app(annotate(t->head(), subst, l), std::move(args), l);
    }
  }
  return nullptr;
}

TermPtr erase(const AnnTermPtr& t) {
  switch (t->kind()) {
    case AnnTerm::Kind::Var: return Term::var(t->id());
    case AnnTerm::Kind::Name: return Term::name(t->id());
    case AnnTerm::Kind::App: {
      std::vector<TermPtr> args;
      args.reserve(t->args().size());
      for (const auto& a : t->args()) args.push_back(erase(a));
      return Term::app(erase(t->head()), std::move(args));
    }
  }
  return nullptr;
}

namespace {

template <class A>
const std::shared_ptr<const Node<A>>& subterm_at_impl(const std::shared_ptr<const Node<A>>& t,
                                                       const Path& p) {
  const std::shared_ptr<const Node<A>>* cur = &t;
  for (std::size_t i : p) {
    if (i >= (*cur)->child_count())
      throw std::out_of_range("path " + render_path(p) + " does not address a subterm");
    cur = &(*cur)->child(i);
  }
  return *cur;
}

template <class A>
std::shared_ptr<const Node<A>> replace_at_impl(const std::shared_ptr<const Node<A>>& t,
                                               const Path& p, std::size_t depth,
                                               std::shared_ptr<const Node<A>> with) {
  if (depth == p.size()) return with;
  std::size_t i = p[depth];
  if (i >= t->child_count())
    throw std::out_of_range("path " + render_path(p) + " does not address a subterm");
  auto head = t->head();
  std::vector<std::shared_ptr<const Node<A>>> args(t->args().begin(), t->args().end());
  if (i == 0)
    head = replace_at_impl<A>(head, p, depth + 1, std::move(with));
  else
    args[i - 1] = replace_at_impl<A>(args[i - 1], p, depth + 1, std::move(with));
  return Node<A>::app(std::move(head), std::move(args), t->annotation());
}

}  // namespace

const AnnTermPtr& subterm_at(const AnnTermPtr& t, const Path& p) { return subterm_at_impl(t, p); }
const TermPtr& subterm_at(const TermPtr& t, const Path& p) { return subterm_at_impl(t, p); }

AnnTermPtr replace_at(const AnnTermPtr& t, const Path& p, AnnTermPtr with) {
  return replace_at_impl<Trace>(t, p, 0, std::move(with));
}
TermPtr replace_at(const TermPtr& t, const Path& p, TermPtr with) {
  return replace_at_impl<NoAnnotation>(t, p, 0, std::move(with));
}

// ----------------------------------------------------------------- redexes

namespace {

struct Frame {
  const AnnTerm* node;
  std::size_t next_child;
};

/// Visits application nodes that are redexes, in preorder or postorder.
template <class Visit>
void visit_redexes(const Program& p, const AnnTermPtr& t, bool postorder, Visit&& visit) {
  Path path;
  std::vector<Frame> stack{{t.get(), 0}};
  auto report = [&](const AnnTerm* n) {
    if (!is_redex(p, *n)) return true;
    const Name& f = *n->head_name();
    RedexStatus s = n->annotation().contains(f) ? RedexStatus::Blocked : RedexStatus::Enabled;
    return visit(path, s, f, n->annotation());
  };
  if (!postorder && !report(t.get())) return;
  while (!stack.empty()) {
    Frame& fr = stack.back();
    if (fr.next_child < fr.node->child_count()) {
      std::size_t i = fr.next_child++;
      const AnnTerm* c = fr.node->child(i).get();
      path.push_back(i);
      stack.push_back({c, 0});
      if (!postorder && !report(c)) return;
    } else {
      if (postorder && !report(fr.node)) return;
      stack.pop_back();
      if (!path.empty() && !stack.empty()) path.pop_back();
    }
  }
}

}  // namespace

std::vector<Redex> find_redexes(const Program& p, const AnnTermPtr& t) {
  std::vector<Redex> out;
  visit_redexes(p, t, false, [&](const Path& path, RedexStatus s, const Name& f, const Trace& l) {
    out.push_back({path, s, f, l});
    return true;
  });
  return out;
}

AnnTermPtr contract_at(const Program& p, const AnnTermPtr& t, const Path& path) {
  const AnnTermPtr& redex = subterm_at(t, path);
  if (!is_redex(p, *redex)) throw std::invalid_argument("no redex at " + render_path(path));
  const Name& f = *redex->head_name();
  const Trace& l = redex->annotation();
  if (l.contains(f)) throw std::invalid_argument("redex at " + render_path(path) + " is blocked");
  const Definition& d = *p.find(f);
  Substitution sigma;
  for (std::size_t i = 0; i < d.params.size(); ++i) sigma[d.params[i]] = redex->args()[i];
  return replace_at(t, path, annotate(d.body, sigma, l.extended(f)));
}

StepResult step(const Program& p, const AnnTermPtr& t, Strategy strategy) {
  std::optional<Redex> enabled, blocked;
  visit_redexes(p, t, strategy == Strategy::LeftmostInnermost,
                [&](const Path& path, RedexStatus s, const Name& f, const Trace& l) {
                  if (s == RedexStatus::Enabled) {
                    enabled = Redex{path, s, f, l};
                    return false;
                  }
                  if (!blocked) blocked = Redex{path, s, f, l};
                  return true;
                });
  StepResult r;
  if (enabled) {
    r.kind = StepResult::Kind::Reduced;
    r.next = contract_at(p, t, enabled->path);
    r.path = std::move(enabled->path);
    r.name = std::move(enabled->name);
  } else if (blocked) {
    r.kind = StepResult::Kind::Blocked;
    r.path = std::move(blocked->path);
    r.name = std::move(blocked->name);
    r.trace = std::move(blocked->trace);
  }
  return r;
}

Outcome normalize(const Program& p, Strategy strategy, const NormalizeOptions& opts) {
  Outcome out;
  AnnTermPtr cur = annotate(p.root(), {}, {});
  for (;;) {
    if (opts.max_steps != 0 && out.steps >= opts.max_steps) {
      out.kind = Outcome::Kind::StepLimit;
      out.final_term = cur;
      return out;
    }
    StepResult r = step(p, cur, strategy);
    switch (r.kind) {
      case StepResult::Kind::Reduced:
        ++out.steps;
        if (opts.on_step) opts.on_step(cur, r, out.steps);
        cur = std::move(r.next);
        break;
      case StepResult::Kind::NormalForm:
        out.kind = Outcome::Kind::Normal;
        out.final_term = cur;
        out.normal_form = erase(cur);
        return out;
      case StepResult::Kind::Blocked:
        out.kind = Outcome::Kind::Diverges;
        out.final_term = cur;
        out.blocked_path = std::move(r.path);
        out.blocked_name = std::move(r.name);
        out.blocked_trace = std::move(r.trace);
        return out;
    }
  }
}

// ---------------------------------------------------------------- rendering

namespace {

template <class A>
void render_into(std::string& out, const Node<A>& t, Mode mode) {
  constexpr bool annotated = std::is_same_v<A, Trace>;
  switch (t.kind()) {
    case Node<A>::Kind::Var:
    case Node<A>::Kind::Name:
      out += t.id();
      return;
    case Node<A>::Kind::App:
      break;
  }
  const bool first_order_call = mode == Mode::FirstOrder && t.head()->is_name();
  render_into(out, *t.head(), mode);
  if constexpr (annotated)
    if (first_order_call) out += t.annotation().render();
  if (!(first_order_call && t.args().empty())) {
    out += '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) out += ',';
      render_into(out, *t.args()[i], mode);
    }
    out += ')';
  }
  if constexpr (annotated)
    if (!first_order_call) out += t.annotation().render();
}

}  // namespace

std::string render(const TermPtr& t, Mode mode) {
  std::string out;
  render_into(out, *t, mode);
  return out;
}

std::string render(const AnnTermPtr& t, Mode mode) {
  std::string out;
  render_into(out, *t, mode);
  return out;
}

std::string render(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.defs().size(); ++i) {
    const auto& d = p.defs()[i];
    out += i == 0 ? "let rec " : "    and ";
    out += d.name + "(";
    for (std::size_t j = 0; j < d.params.size(); ++j) {
      if (j) out += ", ";
      out += d.params[j];
    }
    out += ") = " + render(d.body, p.mode()) + "\n";
  }
  if (!p.defs().empty()) out += "in ";
  out += render(p.root(), p.mode()) + "\n";
  return out;
}

// ------------------------------------------------------------------ parsing

namespace {

struct Tok {
  enum class K { Ident, LParen, RParen, Comma, Equals, End } k;
  std::string text;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src_(s) {}

  std::vector<Tok> run() {
    std::vector<Tok> out;
    for (;;) {
      skip_blank();
      SourcePos pos{line_, col_};
      if (i_ >= src_.size()) {
        out.push_back({Tok::K::End, "", pos});
        return out;
      }
      char c = src_[i_];
      if (c == '(' || c == ')' || c == ',' || c == '=') {
        advance();
        Tok::K k = c == '(' ? Tok::K::LParen
                   : c == ')' ? Tok::K::RParen
                   : c == ',' ? Tok::K::Comma
                              : Tok::K::Equals;
        out.push_back({k, std::string(1, c), pos});
      } else if (std::islower(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) ||
                                    src_[i_] == '_')) {
          id += src_[i_];
          advance();
        }
        out.push_back({Tok::K::Ident, std::move(id), pos});
      } else {
        throw Error(ErrorKind::SyntaxError, std::string("unexpected character '") + c + "'", pos);
      }
    }
  }

 private:
  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }
  void skip_blank() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (c == '#') {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view src_;
  std::size_t i_ = 0, line_ = 1, col_ = 1;
};

bool is_keyword(const std::string& s) {
  return s == "let" || s == "rec" || s == "and" || s == "in";
}

struct RawTerm {
  std::string name;
  SourcePos pos;
  // Each element is one parenthesised argument list applied in sequence.
  std::vector<std::vector<RawTerm>> calls;
};

struct RawDef {
  std::string name;
  SourcePos pos;
  std::vector<std::string> params;
  RawTerm body;
};

class Parser {
 public:
  Parser(std::vector<Tok> toks, Mode mode) : toks_(std::move(toks)), mode_(mode) {}

  Program parse() {
    std::vector<RawDef> raw;
    if (peek_keyword("let")) {
      next();
      expect_keyword("rec");
      raw.push_back(def());
      while (peek_keyword("and")) {
        next();
        raw.push_back(def());
      }
      expect_keyword("in");
    }
    RawTerm root = term();
    if (cur().k != Tok::K::End) fail("unexpected '" + cur().text + "' after the root term");

    std::map<std::string, std::pair<std::size_t, SourcePos>> arity;
    for (const auto& d : raw)
      if (!arity.emplace(d.name, std::pair{d.params.size(), d.pos}).second)
        throw Error(ErrorKind::DuplicateDefinition, "function " + d.name + " defined twice", d.pos);

    std::vector<Definition> defs;
    for (const auto& d : raw) {
      std::set<std::string> ps;
      for (const auto& x : d.params)
        if (!ps.insert(x).second)
          throw Error(ErrorKind::SyntaxError, "parameter " + x + " repeated", d.pos);
      defs.push_back({d.name, d.params, convert(d.body, ps, arity)});
    }
    TermPtr r = convert(root, {}, arity);
    return Program(std::move(defs), std::move(r), mode_);
  }

 private:
  const Tok& cur() const { return toks_[i_]; }
  const Tok& next() { return toks_[i_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::SyntaxError, msg, cur().pos);
  }
  bool peek_keyword(const char* kw) const {
    return cur().k == Tok::K::Ident && cur().text == kw;
  }
  void expect_keyword(const char* kw) {
    if (!peek_keyword(kw)) fail(std::string("expected '") + kw + "'");
    next();
  }
  void expect(Tok::K k, const char* what) {
    if (cur().k != k) fail(std::string("expected ") + what);
    next();
  }
  std::string ident(const char* what) {
    if (cur().k != Tok::K::Ident || is_keyword(cur().text)) fail(std::string("expected ") + what);
    return next().text;
  }

  RawDef def() {
    RawDef d;
    d.pos = cur().pos;
    d.name = ident("function name");
    if (cur().k == Tok::K::LParen) {
      next();
      if (cur().k != Tok::K::RParen) {
        d.params.push_back(ident("parameter name"));
        while (cur().k == Tok::K::Comma) {
          next();
          d.params.push_back(ident("parameter name"));
        }
      }
      expect(Tok::K::RParen, "')'");
    }
    expect(Tok::K::Equals, "'='");
    d.body = term();
    return d;
  }

  RawTerm term() {
    RawTerm t;
    t.pos = cur().pos;
    t.name = ident("a term");
    while (cur().k == Tok::K::LParen) {
      next();
      std::vector<RawTerm> args;
      if (cur().k != Tok::K::RParen) {
        args.push_back(term());
        while (cur().k == Tok::K::Comma) {
          next();
          args.push_back(term());
        }
      }
      expect(Tok::K::RParen, "')' to close the argument list");
      t.calls.push_back(std::move(args));
    }
    return t;
  }

  TermPtr convert(const RawTerm& t, const std::set<std::string>& params,
                  const std::map<std::string, std::pair<std::size_t, SourcePos>>& arity) {
    const bool is_param = params.contains(t.name);
    auto defined = arity.find(t.name);
    std::vector<std::vector<TermPtr>> calls;
    for (const auto& c : t.calls) {
      std::vector<TermPtr> args;
      for (const auto& a : c) args.push_back(convert(a, params, arity));
      calls.push_back(std::move(args));
    }
    if (mode_ == Mode::FirstOrder) {
      if (is_param) {
        if (!calls.empty())
          throw Error(ErrorKind::SyntaxError,
                      "parameter " + t.name + " cannot be applied in first-order mode", t.pos);
        return Term::var(t.name);
      }
      if (calls.size() > 1)
        throw Error(ErrorKind::SyntaxError,
                    "chained application of " + t.name + " requires --higher-order", t.pos);
      std::vector<TermPtr> args = calls.empty() ? std::vector<TermPtr>{} : std::move(calls[0]);
      if (defined != arity.end() && defined->second.first != args.size())
        throw Error(ErrorKind::ArityMismatch,
                    "function " + t.name + " expects " + std::to_string(defined->second.first) +
                        " argument(s), got " + std::to_string(args.size()),
                    t.pos);
      return Term::call(t.name, std::move(args));
    }
    TermPtr head = is_param ? Term::var(t.name) : Term::name(t.name);
    for (auto& args : calls) head = Term::app(std::move(head), std::move(args));
    return head;
  }

  std::vector<Tok> toks_;
  std::size_t i_ = 0;
  Mode mode_;
};

}  // namespace

Program parse_program(std::string_view text, Mode mode) {
  return Parser(Lexer(text).run(), mode).parse();
}

}  // namespace shapecheck::calculus
