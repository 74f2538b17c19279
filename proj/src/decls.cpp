#include "shapecheck/decls.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <memory>
#include <set>

namespace shapecheck::decls {

using shapes::ConflictWitness;
using shapes::PrimTable;

namespace {

constexpr std::string_view kSum = "sum";
constexpr std::string_view kBox = "box";
constexpr std::string_view kEmptySum = "empty_sum";

// ------------------------------------------------------------------- lexer

enum class Tok {
  End, Type, And, Of, LIdent, UIdent, TyVar, LParen, RParen, LBrace, RBrace, Comma, Star,
  Bar, Equal, Colon, Semi, Arrow, Attr, Int
};

struct Token {
  Tok kind;
  std::string text;  // identifier, attribute name, or attribute payload
  std::string payload;
  SourcePos pos;
};

std::string_view describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Type: return "'type'";
    case Tok::And: return "'and'";
    case Tok::Of: return "'of'";
    case Tok::LIdent: return "a type name";
    case Tok::UIdent: return "a constructor name";
    case Tok::TyVar: return "a type variable";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Star: return "'*'";
    case Tok::Bar: return "'|'";
    case Tok::Equal: return "'='";
    case Tok::Colon: return "':'";
    case Tok::Semi: return "';'";
    case Tok::Arrow: return "'->'";
    case Tok::Attr: return "an attribute";
    case Tok::Int: return "an integer";
  }
  return "a token";
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto adv = [&] {
    if (s[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (i < s.size()) {
    char c = s[i];
    SourcePos pos{line, col};
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv();
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') adv();
      continue;
    }
    if (c == '(' && i + 1 < s.size() && s[i + 1] == '*') {
      int depth = 0;
      do {
        if (i + 1 < s.size() && s[i] == '(' && s[i + 1] == '*') {
          ++depth;
          adv();
          adv();
        } else if (i + 1 < s.size() && s[i] == '*' && s[i + 1] == ')') {
          --depth;
          adv();
          adv();
        } else if (i < s.size()) {
          adv();
        } else {
          throw Error(ErrorKind::SyntaxError, "unterminated comment", pos);
        }
      } while (depth > 0);
      continue;
    }
    if (c == '[' && i + 1 < s.size() && s[i + 1] == '@') {
      adv();
      while (i < s.size() && s[i] == '@') adv();
      std::size_t start = i;
      while (i < s.size() && (ident_char(s[i]) || s[i] == '.')) adv();
      std::string name(s.substr(start, i - start));
      if (name.empty()) throw Error(ErrorKind::SyntaxError, "expected an attribute name", pos);
      std::size_t pstart = i;
      int depth = 1;
      while (i < s.size()) {
        if (s[i] == '[') ++depth;
        if (s[i] == ']' && --depth == 0) break;
        adv();
      }
      if (i >= s.size()) throw Error(ErrorKind::SyntaxError, "unterminated attribute", pos);
      std::string payload(s.substr(pstart, i - pstart));
      adv();
      out.push_back({Tok::Attr, std::move(name), std::move(payload), pos});
      continue;
    }
    if (c == '\'') {
      adv();
      std::size_t start = i;
      while (i < s.size() && ident_char(s[i])) adv();
      if (start == i) throw Error(ErrorKind::SyntaxError, "expected a type variable name", pos);
      out.push_back({Tok::TyVar, std::string(s.substr(start, i - start)), {}, pos});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < s.size() && ident_char(s[i])) adv();
      std::string id(s.substr(start, i - start));
      Tok k = std::isupper(static_cast<unsigned char>(id[0])) ? Tok::UIdent : Tok::LIdent;
      if (id == "type") k = Tok::Type;
      if (id == "and") k = Tok::And;
      if (id == "of") k = Tok::Of;
      out.push_back({k, std::move(id), {}, pos});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) adv();
      out.push_back({Tok::Int, std::string(s.substr(start, i - start)), {}, pos});
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      adv();
      adv();
      out.push_back({Tok::Arrow, "->", {}, pos});
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case ',': k = Tok::Comma; break;
      case '*': k = Tok::Star; break;
      case '|': k = Tok::Bar; break;
      case '=': k = Tok::Equal; break;
      case ':': k = Tok::Colon; break;
      case ';': k = Tok::Semi; break;
      default:
        throw Error(ErrorKind::SyntaxError, std::string("unexpected character '") + c + "'", pos);
    }
    adv();
    out.push_back({k, std::string(1, c), {}, pos});
  }
  out.push_back({Tok::End, {}, {}, {line, col}});
  return out;
}

// ------------------------------------------------------------------ parser

// Type names are parsed as Kind::App and resolved once the whole file is read.
class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Decl> file() {
    std::vector<Decl> out;
    while (peek().kind != Tok::End) {
      expect(Tok::Type);
      out.push_back(decl());
      while (peek().kind == Tok::And) {
        next();
        out.push_back(decl());
      }
    }
    return out;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string& msg, const Token& t) const {
    throw Error(ErrorKind::SyntaxError, msg, t.pos);
  }
  const Token& expect(Tok k) {
    if (peek().kind != k)
      fail("expected " + std::string(describe(k)) + ", found " + std::string(describe(peek().kind)),
           peek());
    return next();
  }

  HeadShapeStx shape_attr(const Token& t) {
    try {
      return shapes::parse_shape(t.payload);
    } catch (const Error& e) {
      // Positions inside the payload are relative; report at the attribute.
      throw Error(ErrorKind::SyntaxError, "in [@shape]: " + e.message(), t.pos);
    }
  }

  void decl_attrs(Decl& d, bool after_body) {
    while (peek().kind == Tok::Attr) {
      const Token& a = next();
      if (a.text != "shape") fail("unsupported attribute [@" + a.text + "]", a);
      if (d.has_shape_attr) fail("duplicate [@shape] attribute", a);
      d.shape = shape_attr(a);
      d.has_shape_attr = true;
      (void)after_body;
    }
  }

  Decl decl() {
    Decl d;
    d.pos = peek().pos;
    if (peek().kind == Tok::TyVar) {
      d.params.push_back(next().text);
    } else if (peek().kind == Tok::LParen && peek(1).kind == Tok::TyVar) {
      next();
      d.params.push_back(expect(Tok::TyVar).text);
      while (peek().kind == Tok::Comma) {
        next();
        d.params.push_back(expect(Tok::TyVar).text);
      }
      expect(Tok::RParen);
    }
    for (std::size_t i = 0; i < d.params.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (d.params[i] == d.params[j])
          throw Error(ErrorKind::SyntaxError, "duplicate type parameter '" + d.params[i], d.pos);
    const Token& name = expect(Tok::LIdent);
    d.name = name.text;
    d.pos = name.pos;
    decl_attrs(d, false);
    if (peek().kind != Tok::Equal) {
      d.body = Decl::Body::Abstract;
      return d;
    }
    next();
    if (peek().kind == Tok::UIdent || peek().kind == Tok::Bar) {
      d.body = Decl::Body::Variant;
      if (peek().kind == Tok::Bar) next();
      if (peek().kind == Tok::UIdent) {
        d.ctors.push_back(ctor());
        while (peek().kind == Tok::Bar) {
          next();
          d.ctors.push_back(ctor());
        }
      }
    } else {
      d.body = Decl::Body::Abbrev;
      d.abbrev = texpr();
    }
    decl_attrs(d, true);
    if (d.has_shape_attr)
      throw Error(ErrorKind::SyntaxError, "[@shape] is only allowed on abstract types", d.pos);
    return d;
  }

  CtorDecl ctor() {
    CtorDecl c;
    const Token& name = expect(Tok::UIdent);
    c.name = name.text;
    c.pos = name.pos;
    if (peek().kind == Tok::Of) {
      next();
      if (peek().kind == Tok::LBrace) {
        next();
        for (;;) {
          c.fields.push_back(expect(Tok::LIdent).text);
          expect(Tok::Colon);
          c.args.push_back(texpr());
          if (peek().kind == Tok::Semi) next();
          if (peek().kind == Tok::RBrace) break;
        }
        expect(Tok::RBrace);
      } else {
        c.args.push_back(app_expr());
        while (peek().kind == Tok::Star) {
          next();
          c.args.push_back(app_expr());
        }
        if (peek().kind == Tok::Arrow) fail("function argument types must be parenthesized", peek());
      }
    }
    while (peek().kind == Tok::Attr) {
      const Token& a = next();
      if (a.text != "unboxed") fail("unsupported constructor attribute [@" + a.text + "]", a);
      c.unboxed = true;
    }
    if (c.unboxed && c.args.size() != 1)
      throw Error(ErrorKind::SyntaxError,
                  "unboxed constructor " + c.name + " must take exactly one argument", c.pos);
    return c;
  }

  // texpr ::= prod ('->' texpr)?
  TypeExpr texpr() {
    TypeExpr left = prod();
    if (peek().kind == Tok::Arrow) {
      SourcePos p = next().pos;
      TypeExpr right = texpr();
      TypeExpr f = TypeExpr::prim("func", {std::move(left), std::move(right)});
      f.pos = p;
      return f;
    }
    return left;
  }

  // prod ::= app ('*' app)*
  TypeExpr prod() {
    TypeExpr first = app_expr();
    if (peek().kind != Tok::Star) return first;
    SourcePos p = peek().pos;
    std::vector<TypeExpr> parts{std::move(first)};
    while (peek().kind == Tok::Star) {
      next();
      parts.push_back(app_expr());
    }
    TypeExpr t = TypeExpr::prim("tuple", std::move(parts));
    t.pos = p;
    return t;
  }

  // app ::= atom lident*  |  '(' texpr (',' texpr)+ ')' lident lident*
  TypeExpr app_expr() {
    TypeExpr cur;
    if (peek().kind == Tok::LParen) {
      SourcePos p = next().pos;
      std::vector<TypeExpr> inner{texpr()};
      while (peek().kind == Tok::Comma) {
        next();
        inner.push_back(texpr());
      }
      expect(Tok::RParen);
      if (inner.size() > 1) {
        const Token& n = expect(Tok::LIdent);
        cur = TypeExpr::app(n.text, std::move(inner));
        cur.pos = n.pos;
      } else {
        cur = std::move(inner.front());
        if (cur.pos.line == 0) cur.pos = p;
      }
    } else if (peek().kind == Tok::TyVar) {
      const Token& v = next();
      cur = TypeExpr::var(v.text);
      cur.pos = v.pos;
    } else if (peek().kind == Tok::LIdent) {
      const Token& n = next();
      cur = TypeExpr::app(n.text, {});
      cur.pos = n.pos;
    } else {
      fail("expected a type, found " + std::string(describe(peek().kind)), peek());
    }
    while (peek().kind == Tok::LIdent) {
      const Token& n = next();
      TypeExpr t = TypeExpr::app(n.text, {});
      t.args.push_back(std::move(cur));
      t.pos = n.pos;
      cur = std::move(t);
    }
    return cur;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void resolve(TypeExpr& t, const Decl& owner, const std::map<std::string, const Decl*>& names,
             const PrimTable& prims) {
  switch (t.kind) {
    case TypeExpr::Kind::Var:
      if (std::find(owner.params.begin(), owner.params.end(), t.name) == owner.params.end())
        throw Error(ErrorKind::UnboundTypeName,
                    "unbound type variable '" + t.name + " in " + owner.name, t.pos);
      return;
    case TypeExpr::Kind::Prim:
      if (!prims.contains(t.name))
        throw Error(ErrorKind::UnknownPrimitive, "no primitive '" + t.name + "' in the table",
                    t.pos);
      break;
    case TypeExpr::Kind::App:
      if (auto it = names.find(t.name); it != names.end()) {
        if (it->second->params.size() != t.args.size())
          throw Error(ErrorKind::ArityMismatch,
                      "type " + t.name + " expects " + std::to_string(it->second->params.size()) +
                          " argument(s), got " + std::to_string(t.args.size()),
                      t.pos);
      } else if (prims.contains(t.name)) {
        t.kind = TypeExpr::Kind::Prim;
      } else {
        throw Error(ErrorKind::UnboundTypeName, "unbound type " + t.name, t.pos);
      }
      break;
  }
  for (auto& a : t.args) resolve(a, owner, names, prims);
}

}  // namespace

const CtorDecl* Decl::find_ctor(std::string_view c) const {
  for (const auto& x : ctors)
    if (x.name == c) return &x;
  return nullptr;
}

std::vector<Decl> parse_decls(std::string_view text, const PrimTable& prims) {
  std::vector<Decl> decls = Parser(lex(text)).file();
  std::map<std::string, const Decl*> names;
  for (const auto& d : decls) {
    if (prims.contains(d.name))
      throw Error(ErrorKind::DuplicateTypeName, "type " + d.name + " shadows a primitive", d.pos);
    if (!names.emplace(d.name, &d).second)
      throw Error(ErrorKind::DuplicateTypeName, "type " + d.name + " is declared twice", d.pos);
  }
  for (auto& d : decls) {
    std::set<std::string> ctor_names;
    std::size_t constant = 0, non_constant = 0;
    for (auto& c : d.ctors) {
      if (!ctor_names.insert(c.name).second)
        throw Error(ErrorKind::DuplicateCtor,
                    "constructor " + c.name + " appears twice in " + d.name, c.pos);
      for (auto& a : c.args) resolve(a, d, names, prims);
      if (!c.unboxed) c.index = c.is_constant() ? constant++ : non_constant++;
    }
    if (d.body == Decl::Body::Abbrev) resolve(d.abbrev, d, names, prims);
  }
  return decls;
}

DeclEnv::DeclEnv(const std::vector<Decl>& decls, const PrimTable& prims)
    : decls_(&decls), prims_(&prims) {
  for (std::size_t i = 0; i < decls.size(); ++i) index_.emplace(decls[i].name, i);
}

const Decl* DeclEnv::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &(*decls_)[it->second];
}

// --------------------------------------------------------------- rendering

std::string render(const TypeExpr& t) {
  if (t.kind == TypeExpr::Kind::Var) return "'" + t.name;
  auto atom = [](const TypeExpr& a) {
    std::string s = render(a);
    bool compound = a.kind == TypeExpr::Kind::Prim && (a.name == "tuple" || a.name == "func") &&
                    a.args.size() > 1;
    return compound ? "(" + s + ")" : s;
  };
  if (t.kind == TypeExpr::Kind::Prim && t.args.size() > 1 && (t.name == "tuple" || t.name == "func")) {
    std::string sep = t.name == "tuple" ? " * " : " -> ";
    std::string out;
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += sep;
      out += atom(t.args[i]);
    }
    return out;
  }
  if (t.args.empty()) return t.name;
  if (t.args.size() == 1) return atom(t.args[0]) + " " + t.name;
  std::string out = "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) {
    if (i) out += ", ";
    out += render(t.args[i]);
  }
  return out + ") " + t.name;
}

std::string Component::render() const {
  switch (kind) {
    case Kind::BoxedCtor: {
      std::string out = name + " (" + type_name + "." + name;
      for (const auto& a : args) out += ", " + decls::render(a);
      return out + ")";
    }
    case Kind::Var: return "'" + name;
    case Kind::Abstract: return name + " (abstract)";
    case Kind::Prim: {
      if (arg_nfs.empty()) return name;
      std::string out = name + " (";
      for (std::size_t i = 0; i < arg_nfs.size(); ++i) {
        if (i) out += ", ";
        out += decls::render(arg_nfs[i]);
      }
      return out + ")";
    }
  }
  return name;
}

std::string render(const SumNF& s) {
  if (s.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += " + ";
    out += s[i].render();
  }
  return out;
}

std::string_view to_string(CheckReport::Verdict v) {
  switch (v) {
    case CheckReport::Verdict::Accepted: return "Accepted";
    case CheckReport::Verdict::RejectedConflict: return "RejectedConflict";
    case CheckReport::Verdict::RejectedCycle: return "RejectedCycle";
  }
  return "?";
}

// ----------------------------------------------------------- normalization

namespace {

// A type expression under an annotating substitution: the nodes of `expr`
// carry `trace`; its variables stand for the closures in `env`.
struct Closure;
using Env = std::shared_ptr<const std::map<std::string, Closure>>;
struct Closure {
  const TypeExpr* expr;
  Env env;
  calculus::Trace trace;
};

TypeExpr materialize(const TypeExpr& t, const Env& env) {
  if (t.kind == TypeExpr::Kind::Var) {
    if (env) {
      auto it = env->find(t.name);
      if (it != env->end()) return materialize(*it->second.expr, it->second.env);
    }
    return t;
  }
  TypeExpr out = t;
  for (auto& a : out.args) a = materialize(a, env);
  return out;
}

class Normalizer {
 public:
  Normalizer(const DeclEnv& env, std::size_t limit) : env_(env), limit_(limit) {}

  /// False when blocked; the cycle is then in `cycle`.
  bool norm(const Closure& c, SumNF& out) {
    const TypeExpr& t = *c.expr;
    switch (t.kind) {
      case TypeExpr::Kind::Var: {
        if (c.env) {
          auto it = c.env->find(t.name);
          if (it != c.env->end()) return norm(it->second, out);
        }
        Component v;
        v.kind = Component::Kind::Var;
        v.name = t.name;
        return emit(std::move(v), out);
      }
      case TypeExpr::Kind::Prim: {
        Component p;
        p.kind = Component::Kind::Prim;
        p.name = t.name;
        p.args = t.args;
        for (auto& a : p.args) a = materialize(a, c.env);
        const shapes::PrimEntry* e = env_.prims().find(t.name);
        if (e == nullptr)
          throw Error(ErrorKind::UnknownPrimitive, "unknown primitive " + t.name, t.pos);
        if (e->lazy_like) {
          for (const auto& a : t.args) {
            SumNF sub;
            if (!norm({&a, c.env, c.trace}, sub)) return false;
            p.arg_nfs.push_back(std::move(sub));
          }
        }
        return emit(std::move(p), out);
      }
      case TypeExpr::Kind::App:
        break;
    }
    const Decl* d = env_.find(t.name);
    if (d == nullptr) throw Error(ErrorKind::UnboundTypeName, "unbound type " + t.name, t.pos);
    if (d->body == Decl::Body::Abstract) {
      Component a;
      a.kind = Component::Kind::Abstract;
      a.name = d->name;
      a.abstract_shape = d->shape;
      return emit(std::move(a), out);
    }
    if (c.trace.contains(d->name)) {
      cycle = Cycle{d->name, c.trace, path_};
      cycle->path.push_back(d->name);
      return false;
    }
    if (d->params.size() != t.args.size())
      throw Error(ErrorKind::ArityMismatch, "type " + d->name + " applied to " +
                                                std::to_string(t.args.size()) + " argument(s)",
                  t.pos);
    Closure body{nullptr, bind(*d, t, c), c.trace.extended(d->name)};
    path_.push_back(d->name);
    bool ok = true;
    if (d->body == Decl::Body::Abbrev) {
      body.expr = &d->abbrev;
      ok = norm(body, out);
    } else {
      for (const auto& ctor : d->ctors) {
        ok = ctor_into(*d, ctor, body, out);
        if (!ok) break;
      }
    }
    if (ok) path_.pop_back();
    return ok;
  }

  /// Components contributed by one constructor of `d`, whose parameters are
  /// bound in `body`.
  bool ctor_into(const Decl& d, const CtorDecl& ctor, const Closure& body, SumNF& out) {
    if (ctor.unboxed) return norm({&ctor.args[0], body.env, body.trace}, out);
    Component b;
    b.kind = Component::Kind::BoxedCtor;
    b.name = ctor.name;
    b.type_name = d.name;
    b.index = ctor.index;
    b.constant = ctor.is_constant();
    for (const auto& a : ctor.args) b.args.push_back(materialize(a, body.env));
    return emit(std::move(b), out);
  }

  Env bind(const Decl& d, const TypeExpr& app, const Closure& c) {
    auto m = std::make_shared<std::map<std::string, Closure>>();
    for (std::size_t i = 0; i < d.params.size(); ++i)
      m->emplace(d.params[i], Closure{&app.args[i], c.env, c.trace});
    return m;
  }

  void enter(const std::string& name) { path_.push_back(name); }

  std::optional<Cycle> cycle;

 private:
  bool emit(Component c, SumNF& out) {
    if (++count_ > limit_)
      throw Error(ErrorKind::ExpansionLimit,
                  "sum normal form exceeds " + std::to_string(limit_) + " components");
    out.push_back(std::move(c));
    return true;
  }

  const DeclEnv& env_;
  std::size_t limit_;
  std::size_t count_ = 0;
  std::vector<std::string> path_;
};

}  // namespace

std::variant<SumNF, Cycle> normalize_type(const TypeExpr& t, const DeclEnv& env,
                                          std::size_t max_components) {
  Normalizer n(env, max_components);
  SumNF out;
  if (!n.norm({&t, nullptr, {}}, out)) return *n.cycle;
  return out;
}

// ------------------------------------------------------------------ shapes

HeadShapeStx component_shape(const Component& c, const PrimTable& prims) {
  switch (c.kind) {
    case Component::Kind::BoxedCtor:
      return c.constant ? shapes::constant_ctor_shape(c.index) : shapes::block_ctor_shape(c.index);
    case Component::Kind::Var: return shapes::var_shape();
    case Component::Kind::Abstract: return c.abstract_shape;
    case Component::Kind::Prim: {
      std::vector<HeadShapeStx> arg_shapes;
      for (const auto& nf : c.arg_nfs) {
        HeadShapeStx s;
        for (const auto& x : nf) s = shapes::shape_union(s, component_shape(x, prims));
        arg_shapes.push_back(std::move(s));
      }
      return prims.shape(c.name, arg_shapes);
    }
  }
  return HeadShapeStx::top();
}

namespace {

std::variant<HeadShapeStx, ConflictWitness> fold_shapes(
    const SumNF& s, const std::vector<std::string>& origins, const PrimTable& prims) {
  HeadShapeStx acc;
  std::vector<HeadShapeStx> seen;
  for (std::size_t i = 0; i < s.size(); ++i) {
    HeadShapeStx h = component_shape(s[i], prims);
    auto r = shapes::shape_disjoint_union(acc, h);
    if (auto* w = std::get_if<ConflictWitness>(&r)) {
      for (std::size_t j = 0; j < i; ++j)
        if (shapes::shape_mem(w->head(), seen[j])) {
          w->left_origin = origins[j];
          break;
        }
      w->right_origin = origins[i];
      return *w;
    }
    acc = std::get<HeadShapeStx>(std::move(r));
    seen.push_back(std::move(h));
  }
  return acc;
}

}  // namespace

std::variant<HeadShapeStx, ConflictWitness> shape_of_snf(const SumNF& s, const PrimTable& prims) {
  std::vector<std::string> origins;
  for (const auto& c : s) origins.push_back(c.render());
  return fold_shapes(s, origins, prims);
}

// ---------------------------------------------------------------- checking

std::vector<CheckReport> check_decls(const std::vector<Decl>& decls, const PrimTable& prims) {
  DeclEnv env(decls, prims);
  std::vector<CheckReport> out;
  for (const auto& d : decls) {
    CheckReport r;
    r.decl = d.name;
    if (d.body == Decl::Body::Abstract) {
      r.shape = d.shape;
      out.push_back(std::move(r));
      continue;
    }
    Normalizer n(env, 1'000'000);
    SumNF snf;
    std::vector<std::string> origins;
    // Per unboxed constructor: [begin, end) of its components in `snf`.
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> unboxed;
    std::vector<TypeExpr> params;
    for (const auto& p : d.params) params.push_back(TypeExpr::var(p));
    TypeExpr self = TypeExpr::app(d.name, std::move(params));
    bool ok;
    if (d.body == Decl::Body::Abbrev) {
      ok = n.norm({&self, nullptr, {}}, snf);
      for (const auto& c : snf) origins.push_back(c.render());
    } else {
      Closure body{nullptr, n.bind(d, self, {nullptr, nullptr, {}}), calculus::Trace({d.name})};
      n.enter(d.name);
      ok = true;
      for (const auto& ctor : d.ctors) {
        std::size_t begin = snf.size();
        if (!n.ctor_into(d, ctor, body, snf)) {
          ok = false;
          break;
        }
        for (std::size_t i = begin; i < snf.size(); ++i)
          origins.push_back(ctor.name + ": " + snf[i].render());
        if (ctor.unboxed) unboxed.push_back({ctor.name, {begin, snf.size()}});
      }
    }
    if (!ok) {
      r.verdict = CheckReport::Verdict::RejectedCycle;
      r.cycle = std::move(n.cycle);
    } else {
      auto shape = fold_shapes(snf, origins, prims);
      if (auto* w = std::get_if<ConflictWitness>(&shape)) {
        r.verdict = CheckReport::Verdict::RejectedConflict;
        r.witness = std::move(*w);
      } else {
        r.shape = std::get<HeadShapeStx>(shape);
        for (const auto& [name, range] : unboxed) {
          SumNF part(snf.begin() + static_cast<std::ptrdiff_t>(range.first),
                     snf.begin() + static_cast<std::ptrdiff_t>(range.second));
          // Disjoint within the whole sum, hence within the part.
          r.unboxed_shapes.emplace_back(name, std::get<HeadShapeStx>(shape_of_snf(part, prims)));
        }
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

DispatchTest match_plan(const Decl& decl, const CheckReport& report, std::string_view ctor) {
  const CtorDecl* c = decl.find_ctor(ctor);
  if (c == nullptr)
    throw Error(ErrorKind::UnknownCtor,
                "type " + decl.name + " has no constructor " + std::string(ctor));
  if (report.verdict != CheckReport::Verdict::Accepted)
    throw Error(ErrorKind::DeclNotAccepted, "type " + decl.name + " was not accepted");
  if (!c->unboxed)
    return {c->name, c->is_constant() ? shapes::constant_ctor_shape(c->index)
                                      : shapes::block_ctor_shape(c->index)};
  for (const auto& [name, shape] : report.unboxed_shapes)
    if (name == c->name) return {c->name, shape};
  throw Error(ErrorKind::DeclNotAccepted, "no recorded shape for " + c->name);
}

// ---------------------------------------------------------------- encoding

namespace {

bool is_helper(std::string_view n) { return n == kSum || n == kBox || n == kEmptySum; }

// Declared types named like an encoding helper get a suffix that cannot
// occur in a type name.
std::string fn_name(const std::string& type) { return is_helper(type) ? type + "#type" : type; }

std::string type_of_fn(const std::string& fn) {
  constexpr std::string_view suffix = "#type";
  if (fn.size() > suffix.size() && fn.ends_with(suffix)) return fn.substr(0, fn.size() - suffix.size());
  return fn;
}

calculus::TermPtr encode(const TypeExpr& t, const DeclEnv& env) {
  using calculus::Term;
  switch (t.kind) {
    case TypeExpr::Kind::Var: return Term::var("'" + t.name);
    case TypeExpr::Kind::Prim: {
      const shapes::PrimEntry* e = env.prims().find(t.name);
      std::vector<calculus::TermPtr> args;
      if (e != nullptr && e->lazy_like)
        for (const auto& a : t.args) args.push_back(encode(a, env));
      return Term::call(t.name, std::move(args));
    }
    case TypeExpr::Kind::App: {
      const Decl* d = env.find(t.name);
      if (d != nullptr && d->body == Decl::Body::Abstract) return Term::call(t.name, {});
      std::vector<calculus::TermPtr> args;
      for (const auto& a : t.args) args.push_back(encode(a, env));
      return Term::call(fn_name(t.name), std::move(args));
    }
  }
  return nullptr;
}

}  // namespace

calculus::Program translate_to_program(const std::vector<Decl>& decls, const PrimTable& prims) {
  using calculus::Term;
  DeclEnv env(decls, prims);
  std::vector<calculus::Definition> defs;
  for (const auto& d : decls) {
    if (d.body == Decl::Body::Abstract) continue;
    calculus::Definition def;
    def.name = fn_name(d.name);
    for (const auto& p : d.params) def.params.push_back("'" + p);
    if (d.body == Decl::Body::Abbrev) {
      def.body = encode(d.abbrev, env);
    } else {
      std::vector<calculus::TermPtr> cases;
      for (const auto& c : d.ctors) {
        if (c.unboxed)
          cases.push_back(encode(c.args[0], env));
        else
          cases.push_back(Term::call(std::string(kBox), {Term::call(d.name + "." + c.name, {})}));
      }
      if (cases.empty()) {
        def.body = Term::call(std::string(kEmptySum), {});
      } else {
        calculus::TermPtr acc = cases.back();
        for (std::size_t i = cases.size() - 1; i-- > 0;)
          acc = Term::call(std::string(kSum), {cases[i], acc});
        def.body = acc;
      }
    }
    defs.push_back(std::move(def));
  }
  return calculus::Program(std::move(defs), Term::call(std::string(kEmptySum), {}),
                           calculus::Mode::FirstOrder);
}

calculus::TermPtr translate_root(const Decl& decl) {
  using calculus::Term;
  std::vector<calculus::TermPtr> args;
  for (const auto& p : decl.params) args.push_back(Term::call("'" + p, {}));
  if (decl.body == Decl::Body::Abstract) return Term::call(decl.name, {});
  return Term::call(fn_name(decl.name), std::move(args));
}

std::optional<SumNF> read_back(const calculus::TermPtr& t, const DeclEnv& env) {
  SumNF out;
  std::vector<const calculus::Term*> work{t.get()};
  // Depth-first, left to right, so components come out in sum order.
  while (!work.empty()) {
    const calculus::Term* n = work.back();
    work.pop_back();
    const std::string* f = n->head_name();
    if (f == nullptr) return std::nullopt;
    auto args = n->args();
    if (*f == kSum && args.size() == 2) {
      work.push_back(args[1].get());
      work.push_back(args[0].get());
      continue;
    }
    if (*f == kEmptySum && args.empty()) continue;
    Component c;
    if (*f == kBox && args.size() == 1) {
      const std::string* qual = args[0]->head_name();
      if (qual == nullptr || !args[0]->args().empty()) return std::nullopt;
      auto dot = qual->find('.');
      if (dot == std::string::npos) return std::nullopt;
      const Decl* d = env.find(qual->substr(0, dot));
      const CtorDecl* ctor = d ? d->find_ctor(qual->substr(dot + 1)) : nullptr;
      if (ctor == nullptr || ctor->unboxed) return std::nullopt;
      c.kind = Component::Kind::BoxedCtor;
      c.name = ctor->name;
      c.type_name = d->name;
      c.index = ctor->index;
      c.constant = ctor->is_constant();
    } else if (!f->empty() && f->front() == '\'' && args.empty()) {
      c.kind = Component::Kind::Var;
      c.name = f->substr(1);
    } else if (const shapes::PrimEntry* e = env.prims().find(*f)) {
      c.kind = Component::Kind::Prim;
      c.name = *f;
      if (e->lazy_like) {
        for (const auto& a : args) {
          auto sub = read_back(a, env);
          if (!sub) return std::nullopt;
          c.arg_nfs.push_back(std::move(*sub));
        }
      } else if (!args.empty()) {
        return std::nullopt;
      }
    } else if (const Decl* d = env.find(type_of_fn(*f));
               d != nullptr && d->body == Decl::Body::Abstract && args.empty()) {
      c.kind = Component::Kind::Abstract;
      c.name = d->name;
      c.abstract_shape = d->shape;
    } else {
      return std::nullopt;
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool same_components(const SumNF& a, const SumNF& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Component& x = a[i];
    const Component& y = b[i];
    if (x.kind != y.kind || x.name != y.name) return false;
    if (x.kind == Component::Kind::BoxedCtor && x.type_name != y.type_name) return false;
    if (x.arg_nfs.size() != y.arg_nfs.size()) return false;
    for (std::size_t j = 0; j < x.arg_nfs.size(); ++j)
      if (!same_components(x.arg_nfs[j], y.arg_nfs[j])) return false;
  }
  return true;
}

}  // namespace shapecheck::decls
