#include "shapecheck/cppmacro.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>
#include <optional>

namespace shapecheck::cppmacro {

MacroTable::MacroTable(std::vector<MacroDef> defs) : defs_(std::move(defs)) {
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    const MacroDef& d = defs_[i];
    if (!index_.emplace(d.name, i).second)
      throw Error(ErrorKind::DuplicateDefinition, "macro " + d.name + " is defined twice", d.pos);
    for (std::size_t a = 0; a < d.formals.size(); ++a)
      for (std::size_t b = 0; b < a; ++b)
        if (d.formals[a] == d.formals[b])
          throw Error(ErrorKind::SyntaxError,
                      "duplicate parameter " + d.formals[a] + " in macro " + d.name, d.pos);
  }
}

const MacroDef* MacroTable::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &defs_[it->second];
}

// ------------------------------------------------------------------ lexing

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool punct(char c) { return c == '(' || c == ')' || c == ','; }

}  // namespace

TokenSeq tokenize(std::string_view text, std::size_t line) {
  TokenSeq out;
  std::size_t i = 0, col = 1;
  auto adv = [&] {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (i < text.size()) {
    char c = text[i];
    SourcePos pos{line, col};
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv();
      continue;
    }
    Token t;
    t.pos = pos;
    if (punct(c)) {
      t.kind = c == '(' ? Token::Kind::LParen : c == ')' ? Token::Kind::RParen : Token::Kind::Comma;
      t.text = std::string(1, c);
      adv();
    } else if (ident_start(c)) {
      std::size_t start = i;
      while (i < text.size() && ident_char(text[i])) adv();
      t.kind = Token::Kind::Ident;
      t.text = std::string(text.substr(start, i - start));
    } else {
      std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             !punct(text[i]) && !(i > start && ident_start(text[i]) &&
                                  !std::isalnum(static_cast<unsigned char>(text[i - 1]))))
        adv();
      t.kind = Token::Kind::Other;
      t.text = std::string(text.substr(start, i - start));
    }
    out.push_back(std::move(t));
  }
  return out;
}

MacroFile parse_macro_file(std::string_view text) {
  std::vector<MacroDef> defs;
  TokenSeq call;
  bool have_call = false;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) continue;
    if (line[i] != '#') {
      if (have_call)
        throw Error(ErrorKind::SyntaxError, "only one call line is allowed", {line_no, i + 1});
      call = tokenize(line, line_no);
      have_call = true;
      continue;
    }
    if (have_call)
      throw Error(ErrorKind::SyntaxError, "definitions must precede the call line", {line_no, i + 1});
    constexpr std::string_view kDefine = "#define";
    if (line.substr(i, kDefine.size()) != kDefine)
      throw Error(ErrorKind::SyntaxError, "only #define directives are supported", {line_no, i + 1});
    std::size_t after = i + kDefine.size();
    TokenSeq toks = tokenize(line.substr(after), line_no);
    for (auto& t : toks) t.pos.column += after;
    SourcePos dpos{line_no, i + 1};
    if (toks.empty() || toks[0].kind != Token::Kind::Ident)
      throw Error(ErrorKind::SyntaxError, "expected a macro name", dpos);
    MacroDef d;
    d.name = toks[0].text;
    d.pos = toks[0].pos;
    // A function-like macro has '(' immediately after its name.
    std::size_t name_end = after;
    {
      std::size_t k = after;
      while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
      name_end = k + d.name.size();
    }
    if (toks.size() < 2 || toks[1].kind != Token::Kind::LParen || name_end >= line.size() ||
        line[name_end] != '(')
      throw Error(ErrorKind::SyntaxError, "only function-like macros are supported", d.pos);
    std::size_t k = 2;
    if (k < toks.size() && toks[k].kind == Token::Kind::RParen) {
      ++k;
    } else {
      for (;;) {
        if (k >= toks.size() || toks[k].kind != Token::Kind::Ident)
          throw Error(ErrorKind::SyntaxError, "expected a parameter name",
                      k < toks.size() ? toks[k].pos : d.pos);
        d.formals.push_back(toks[k++].text);
        if (k < toks.size() && toks[k].kind == Token::Kind::Comma) {
          ++k;
          continue;
        }
        if (k < toks.size() && toks[k].kind == Token::Kind::RParen) {
          ++k;
          break;
        }
        throw Error(ErrorKind::SyntaxError, "expected ',' or ')'",
                    k < toks.size() ? toks[k].pos : d.pos);
      }
    }
    d.body.assign(toks.begin() + static_cast<std::ptrdiff_t>(k), toks.end());
    defs.push_back(std::move(d));
  }
  if (!have_call) throw Error(ErrorKind::SyntaxError, "missing call line", {line_no, 1});
  return {MacroTable(std::move(defs)), std::move(call)};
}

// --------------------------------------------------------------- expansion

TokenSeq hsadd(const HideSet& hs, TokenSeq ts) {
  if (hs.empty()) return ts;
  for (auto& t : ts) t.hide.insert(hs.begin(), hs.end());
  return ts;
}

namespace {

struct Budget {
  const ExpandOptions& opts;
  std::uint64_t expansions = 0;
  std::uint64_t tokens = 0;
};

TokenSeq expand_impl(const TokenSeq& ts, const MacroTable& defs, Budget& b);

TokenSeq subst_impl(const TokenSeq& is, const std::vector<std::string>& formals,
                    const std::vector<TokenSeq>& actuals, const HideSet& hs,
                    const MacroTable& defs, Budget& b) {
  TokenSeq os;
  std::vector<std::optional<TokenSeq>> expanded(actuals.size());
  for (const Token& t : is) {
    std::size_t i = formals.size();
    if (t.kind == Token::Kind::Ident)
      i = static_cast<std::size_t>(std::find(formals.begin(), formals.end(), t.text) -
                                   formals.begin());
    if (i < formals.size()) {
      // Actuals are expanded in isolation; every occurrence has the same result.
      if (!expanded[i]) expanded[i] = expand_impl(actuals[i], defs, b);
      os.insert(os.end(), expanded[i]->begin(), expanded[i]->end());
    } else {
      os.push_back(t);
    }
  }
  return hsadd(hs, std::move(os));
}

TokenSeq expand_impl(const TokenSeq& ts, const MacroTable& defs, Budget& b) {
  TokenSeq out;
  // Remaining input, next token last.
  TokenSeq input(ts.rbegin(), ts.rend());
  while (!input.empty()) {
    Token t = std::move(input.back());
    input.pop_back();
    const MacroDef* m = t.kind == Token::Kind::Ident ? defs.find(t.text) : nullptr;
    if (m == nullptr || t.hide.contains(t.text) || input.empty() ||
        input.back().kind != Token::Kind::LParen) {
      if (++b.tokens > b.opts.max_tokens)
        throw Error(ErrorKind::ExpansionLimit,
                    "expansion exceeds " + std::to_string(b.opts.max_tokens) + " tokens");
      out.push_back(std::move(t));
      continue;
    }
    // Collect the actuals up to the matching ')'.
    input.pop_back();
    std::vector<TokenSeq> actuals(1);
    int depth = 0;
    bool closed = false;
    HideSet close_hs;
    while (!input.empty()) {
      Token a = std::move(input.back());
      input.pop_back();
      if (a.kind == Token::Kind::LParen) ++depth;
      if (a.kind == Token::Kind::RParen) {
        if (depth == 0) {
          closed = true;
          close_hs = std::move(a.hide);
          break;
        }
        --depth;
      }
      if (a.kind == Token::Kind::Comma && depth == 0) {
        actuals.emplace_back();
        continue;
      }
      actuals.back().push_back(std::move(a));
    }
    if (!closed)
      throw Error(ErrorKind::MalformedCall, "unterminated invocation of macro " + m->name, t.pos);
    if (m->formals.empty() && actuals.size() == 1 && actuals[0].empty()) actuals.clear();
    if (actuals.size() != m->formals.size())
      throw Error(ErrorKind::MalformedCall,
                  "macro " + m->name + " expects " + std::to_string(m->formals.size()) +
                      " argument(s), got " + std::to_string(actuals.size()),
                  t.pos);
    if (++b.expansions > b.opts.max_expansions)
      throw Error(ErrorKind::ExpansionLimit,
                  "more than " + std::to_string(b.opts.max_expansions) + " macro expansions");
    HideSet hs;
    std::set_intersection(t.hide.begin(), t.hide.end(), close_hs.begin(), close_hs.end(),
                          std::inserter(hs, hs.end()));
    hs.insert(m->name);
    TokenSeq result = subst_impl(m->body, m->formals, actuals, hs, defs, b);
    // The result is rescanned together with the rest of the input.
    input.insert(input.end(), std::make_move_iterator(result.rbegin()),
                 std::make_move_iterator(result.rend()));
  }
  return out;
}

}  // namespace

TokenSeq expand(const TokenSeq& ts, const MacroTable& defs, const ExpandOptions& opts) {
  Budget b{opts};
  return expand_impl(ts, defs, b);
}

TokenSeq subst(const TokenSeq& is, const std::vector<std::string>& formals,
               const std::vector<TokenSeq>& actuals, const HideSet& hs, const MacroTable& defs,
               const ExpandOptions& opts) {
  if (formals.size() != actuals.size())
    throw Error(ErrorKind::InvalidArgument, "formals and actuals differ in length");
  Budget b{opts};
  return subst_impl(is, formals, actuals, hs, defs, b);
}

namespace {

bool is_punct(std::string_view s) { return s == "(" || s == ")" || s == ","; }

// Tokens are separated by a space only when neither is punctuation.
void append_token(std::string& out, std::string_view& prev, std::string_view tok) {
  if (!prev.empty() && !is_punct(prev) && !is_punct(tok)) out += ' ';
  out += tok;
  prev = tok;
}

}  // namespace

std::string render(const TokenSeq& ts, bool show_hidesets) {
  std::string out;
  std::string_view prev;
  for (const Token& t : ts) {
    if (!show_hidesets) {
      append_token(out, prev, t.text);
      continue;
    }
    if (!out.empty()) out += ' ';
    out += t.text;
    if (t.hide.empty()) continue;
    out += "^{";
    bool first = true;
    for (const auto& h : t.hide) {
      if (!first) out += ',';
      out += h;
      first = false;
    }
    out += '}';
  }
  return out;
}

// ------------------------------------------------------ first-order bridge

namespace {

[[noreturn]] void not_first_order(const std::string& msg, const Token* t, const std::string& where) {
  throw Error(ErrorKind::NotFirstOrder, msg + " in " + where, t ? t->pos : SourcePos{});
}

class TermReader {
 public:
  TermReader(const TokenSeq& ts, const MacroTable& defs, const std::vector<std::string>* formals,
             std::string where)
      : ts_(ts), defs_(defs), formals_(formals), where_(std::move(where)) {}

  calculus::TermPtr whole() {
    if (ts_.empty()) not_first_order("empty term", nullptr, where_);
    calculus::TermPtr t = term();
    if (i_ < ts_.size()) not_first_order("more than one term", &ts_[i_], where_);
    return t;
  }

 private:
  bool is_formal(const std::string& s) const {
    return formals_ && std::find(formals_->begin(), formals_->end(), s) != formals_->end();
  }

  calculus::TermPtr term() {
    using calculus::Term;
    if (i_ >= ts_.size()) not_first_order("missing term", nullptr, where_);
    const Token& t = ts_[i_++];
    bool applied = i_ < ts_.size() && ts_[i_].kind == Token::Kind::LParen;
    if (t.kind == Token::Kind::Other) {
      if (applied) not_first_order("literal '" + t.text + "' applied", &t, where_);
      return Term::call(t.text, {});
    }
    if (t.kind != Token::Kind::Ident) not_first_order("unexpected '" + t.text + "'", &t, where_);
    if (is_formal(t.text)) {
      if (applied) not_first_order("parameter " + t.text + " used as a function", &t, where_);
      return Term::var(t.text);
    }
    const MacroDef* m = defs_.find(t.text);
    if (!applied) {
      if (m != nullptr) not_first_order("macro " + t.text + " not applied", &t, where_);
      return Term::call(t.text, {});
    }
    ++i_;
    std::vector<calculus::TermPtr> args;
    if (i_ < ts_.size() && ts_[i_].kind == Token::Kind::RParen) {
      ++i_;
      if (m == nullptr) not_first_order("free name " + t.text + " applied to ()", &t, where_);
    } else {
      for (;;) {
        args.push_back(term());
        if (i_ < ts_.size() && ts_[i_].kind == Token::Kind::Comma) {
          ++i_;
          continue;
        }
        if (i_ < ts_.size() && ts_[i_].kind == Token::Kind::RParen) {
          ++i_;
          break;
        }
        not_first_order("expected ',' or ')'", i_ < ts_.size() ? &ts_[i_] : nullptr, where_);
      }
    }
    if (m != nullptr && m->formals.size() != args.size())
      not_first_order("macro " + t.text + " applied to " + std::to_string(args.size()) +
                          " argument(s), expects " + std::to_string(m->formals.size()),
                      &t, where_);
    return Term::call(t.text, std::move(args));
  }

  const TokenSeq& ts_;
  const MacroTable& defs_;
  const std::vector<std::string>* formals_;
  std::string where_;
  std::size_t i_ = 0;
};

}  // namespace

calculus::Program to_program(const MacroTable& defs, const TokenSeq& call) {
  std::vector<calculus::Definition> out;
  for (const auto& d : defs.defs()) {
    calculus::Definition def;
    def.name = d.name;
    def.params = d.formals;
    def.body = TermReader(d.body, defs, &d.formals, "the body of " + d.name).whole();
    out.push_back(std::move(def));
  }
  calculus::TermPtr root = TermReader(call, defs, nullptr, "the call").whole();
  return calculus::Program(std::move(out), std::move(root), calculus::Mode::FirstOrder);
}

void check_first_order(const MacroTable& defs, const TokenSeq& call) { (void)to_program(defs, call); }

std::string render_as_tokens(const calculus::TermPtr& t, const calculus::Program& p) {
  std::string out;
  struct Item {
    const calculus::Term* node;
    std::string_view text;  // emitted when node is null
  };
  std::vector<Item> work{{t.get(), {}}};
  std::string_view prev;
  auto emit = [&](std::string_view s) { append_token(out, prev, s); };
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    if (it.node == nullptr) {
      emit(it.text);
      continue;
    }
    const calculus::Term& n = *it.node;
    if (!n.is_app()) {
      emit(n.id());
      continue;
    }
    const std::string& f = n.head()->id();
    emit(f);
    if (n.args().empty() && !p.is_defined(f)) continue;
    work.push_back({nullptr, ")"});
    for (std::size_t i = n.args().size(); i-- > 0;) {
      work.push_back({n.args()[i].get(), {}});
      if (i > 0) work.push_back({nullptr, ","});
    }
    work.push_back({nullptr, "("});
  }
  return out;
}

AgreementReport compare_first_order(const MacroTable& defs, const TokenSeq& call,
                                    calculus::Strategy strategy) {
  calculus::Program p = to_program(defs, call);
  AgreementReport r;
  TokenSeq out = expand(call, defs);
  r.cpp_output = render(out);
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (out[i].kind == Token::Kind::Ident && defs.find(out[i].text) != nullptr &&
        out[i + 1].kind == Token::Kind::LParen)
      r.cpp_residual = true;
  calculus::Outcome o = calculus::normalize(p, strategy);
  r.calculus_kind = o.kind;
  r.calculus_steps = o.steps;
  r.calculus_output = render_as_tokens(calculus::erase(o.final_term), p);
  r.agree = r.cpp_output == r.calculus_output &&
            r.cpp_residual == (o.kind == calculus::Outcome::Kind::Diverges);
  return r;
}

}  // namespace shapecheck::cppmacro
