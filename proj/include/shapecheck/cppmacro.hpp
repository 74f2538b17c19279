#ifndef SHAPECHECK_CPPMACRO_HPP
#define SHAPECHECK_CPPMACRO_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "shapecheck/calculus.hpp"
#include "shapecheck/error.hpp"

// The core of cpp function-like macro expansion: Prosser's expand / subst /
// hsadd over tokens carrying hide sets, without stringization, pasting,
// object-like macros or conditionals.

namespace shapecheck::cppmacro {

using HideSet = std::set<std::string>;

struct Token {
  enum class Kind { Ident, LParen, RParen, Comma, Other };
  Kind kind = Kind::Other;
  std::string text;
  HideSet hide;
  SourcePos pos;

  static Token ident(std::string t, HideSet hs = {}) {
    return {Kind::Ident, std::move(t), std::move(hs), {}};
  }
};

using TokenSeq = std::vector<Token>;

struct MacroDef {
  std::string name;
  std::vector<std::string> formals;
  TokenSeq body;
  SourcePos pos;
};

class MacroTable {
 public:
  MacroTable() = default;
  /// Throws Error(DuplicateDefinition) or Error(SyntaxError) for repeated
  /// formals.
  explicit MacroTable(std::vector<MacroDef> defs);
  const MacroDef* find(std::string_view name) const;
  const std::vector<MacroDef>& defs() const noexcept { return defs_; }

 private:
  std::vector<MacroDef> defs_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Identifiers `[A-Za-z_][A-Za-z0-9_]*`, parentheses, commas; any other
/// maximal run of characters that are not spaces, punctuation or identifier
/// starts is one Other token.
TokenSeq tokenize(std::string_view text, std::size_t line = 1);

/// `#define NAME(formals) body` lines followed by exactly one call line;
/// `//` comments are stripped.
struct MacroFile {
  MacroTable macros;
  TokenSeq call;
};
MacroFile parse_macro_file(std::string_view text);

struct ExpandOptions {
  /// Macro invocations allowed before Error(ExpansionLimit).
  std::uint64_t max_expansions = 1'000'000;
  /// Output tokens allowed before Error(ExpansionLimit).
  std::uint64_t max_tokens = 10'000'000;
};

/// Prosser's expand. Raises Error(MalformedCall) for a macro invocation with
/// the wrong number of actuals or without a closing parenthesis.
TokenSeq expand(const TokenSeq& ts, const MacroTable& defs, const ExpandOptions& opts = {});

/// Prosser's subst for the core fragment: formals replaced by the expansion
/// of the matching actual, then hsadd(hs, result).
TokenSeq subst(const TokenSeq& is, const std::vector<std::string>& formals,
               const std::vector<TokenSeq>& actuals, const HideSet& hs, const MacroTable& defs,
               const ExpandOptions& opts = {});

/// Adds `hs` to the hide set of every token.
TokenSeq hsadd(const HideSet& hs, TokenSeq ts);

/// Token texts with a space only between two non-punctuation tokens. With
/// hide sets every token is space-separated and written `tok^{a,b}` when its
/// hide set is nonempty.
std::string render(const TokenSeq& ts, bool show_hidesets = false);

/// Throws Error(NotFirstOrder) naming the first macro occurrence that is not
/// immediately applied to its arity, a formal used as a function, a body or
/// argument that is not a single term, or a free `f()` call.
void check_first_order(const MacroTable& defs, const TokenSeq& call);

/// The first-order program with one definition per macro and `call` as root.
/// Formals are variables, other identifiers and literals are free names.
calculus::Program to_program(const MacroTable& defs, const TokenSeq& call);

/// Token rendering of a first-order term as cpp would print it: defined
/// names always take parentheses, free nullary names do not.
std::string render_as_tokens(const calculus::TermPtr& t, const calculus::Program& p);

struct AgreementReport {
  bool agree = false;
  std::string cpp_output;
  /// cpp output still contains an invocation of a (hidden) macro.
  bool cpp_residual = false;
  calculus::Outcome::Kind calculus_kind = calculus::Outcome::Kind::Normal;
  std::string calculus_output;
  std::uint64_t calculus_steps = 0;
};

/// Runs both engines on a first-order macro system; they agree when the
/// outputs are the same token sequence and both or neither stop short.
AgreementReport compare_first_order(const MacroTable& defs, const TokenSeq& call,
                                    calculus::Strategy strategy =
                                        calculus::Strategy::LeftmostOutermost);

}  // namespace shapecheck::cppmacro

#endif  // SHAPECHECK_CPPMACRO_HPP
