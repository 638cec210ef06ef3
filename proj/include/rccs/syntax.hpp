#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rccs/errors.hpp"
#include "rccs/rational.hpp"

namespace rccs {

// ---------------------------------------------------------------------------
// Abstract syntax
// ---------------------------------------------------------------------------

enum class Polarity { Input, Output, Tau };

/// An action prefix: a, 'a (the co-action of a), or tau. channel is empty
/// exactly when polarity is Tau.
struct Prefix {
  Polarity polarity = Polarity::Tau;
  std::string channel;

  friend bool operator==(const Prefix&, const Prefix&) = default;
  friend auto operator<=>(const Prefix&, const Prefix&) = default;
};

inline Prefix act_in(std::string channel) { return {Polarity::Input, std::move(channel)}; }
inline Prefix act_out(std::string channel) { return {Polarity::Output, std::move(channel)}; }
inline Prefix act_tau() { return {Polarity::Tau, {}}; }

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct ChoiceBranch {
  Prefix action;
  TermPtr continuation;
};

struct RandomBranch {
  Rational probability;  // in (0,1); the branch list sums to exactly 1
  TermPtr continuation;
};

/// Immutable term tree. Channels are lowercase identifiers, process variables
/// uppercase; the two name spaces never mix. Terms are shared read-only.
struct Term {
  enum class Kind { Var, Choice, Random, Par, Restrict, Fix };

  Kind kind = Kind::Choice;
  std::string name;                    // Var name / Restrict channel / Fix variable
  std::vector<ChoiceBranch> branches;  // Choice: empty list is 0
  std::vector<RandomBranch> randoms;   // Random: at least two branches
  TermPtr left;                        // Par left / Restrict body / Fix body
  TermPtr right;                       // Par right
};

inline TermPtr nil() {
  static const TermPtr zero = std::make_shared<Term>(Term{Term::Kind::Choice, {}, {}, {}, nullptr, nullptr});
  return zero;
}

inline TermPtr var(std::string name) {
  return std::make_shared<Term>(Term{Term::Kind::Var, std::move(name), {}, {}, nullptr, nullptr});
}

inline TermPtr choice(std::vector<ChoiceBranch> branches) {
  return std::make_shared<Term>(Term{Term::Kind::Choice, {}, std::move(branches), {}, nullptr, nullptr});
}

inline TermPtr prefix(Prefix action, TermPtr continuation) {
  return choice({ChoiceBranch{std::move(action), std::move(continuation)}});
}

inline TermPtr random_choice(std::vector<RandomBranch> branches) {
  return std::make_shared<Term>(Term{Term::Kind::Random, {}, {}, std::move(branches), nullptr, nullptr});
}

inline TermPtr par(TermPtr left, TermPtr right) {
  return std::make_shared<Term>(Term{Term::Kind::Par, {}, {}, {}, std::move(left), std::move(right)});
}

inline TermPtr restriction(std::string channel, TermPtr body) {
  return std::make_shared<Term>(Term{Term::Kind::Restrict, std::move(channel), {}, {}, std::move(body), nullptr});
}

inline TermPtr fix(std::string variable, TermPtr body) {
  return std::make_shared<Term>(Term{Term::Kind::Fix, std::move(variable), {}, {}, std::move(body), nullptr});
}

inline bool is_nil(const TermPtr& t) {
  return t->kind == Term::Kind::Choice && t->branches.empty();
}

/// Structural equality on ASTs (names compared literally; use alpha_normalize
/// before comparing up to renaming of bound names).
inline bool term_eq(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind != b->kind || a->name != b->name) return false;
  switch (a->kind) {
    case Term::Kind::Var:
      return true;
    case Term::Kind::Choice:
      if (a->branches.size() != b->branches.size()) return false;
      for (std::size_t i = 0; i < a->branches.size(); ++i) {
        if (a->branches[i].action != b->branches[i].action) return false;
        if (!term_eq(a->branches[i].continuation, b->branches[i].continuation)) return false;
      }
      return true;
    case Term::Kind::Random:
      if (a->randoms.size() != b->randoms.size()) return false;
      for (std::size_t i = 0; i < a->randoms.size(); ++i) {
        if (a->randoms[i].probability != b->randoms[i].probability) return false;
        if (!term_eq(a->randoms[i].continuation, b->randoms[i].continuation)) return false;
      }
      return true;
    case Term::Kind::Par:
      return term_eq(a->left, b->left) && term_eq(a->right, b->right);
    case Term::Kind::Restrict:
    case Term::Kind::Fix:
      return term_eq(a->left, b->left);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Free names
// ---------------------------------------------------------------------------

namespace detail {

inline void free_vars_into(const TermPtr& t, std::set<std::string>& bound,
                           std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      break;
    case Term::Kind::Choice:
      for (const auto& b : t->branches) free_vars_into(b.continuation, bound, out);
      break;
    case Term::Kind::Random:
      for (const auto& b : t->randoms) free_vars_into(b.continuation, bound, out);
      break;
    case Term::Kind::Par:
      free_vars_into(t->left, bound, out);
      free_vars_into(t->right, bound, out);
      break;
    case Term::Kind::Restrict:
      free_vars_into(t->left, bound, out);
      break;
    case Term::Kind::Fix: {
      bool fresh = bound.insert(t->name).second;
      free_vars_into(t->left, bound, out);
      if (fresh) bound.erase(t->name);
      break;
    }
  }
}

inline void free_channels_into(const TermPtr& t, std::set<std::string>& bound,
                               std::set<std::string>& out) {
  switch (t->kind) {
    case Term::Kind::Var:
      break;
    case Term::Kind::Choice:
      for (const auto& b : t->branches) {
        if (b.action.polarity != Polarity::Tau && !bound.count(b.action.channel))
          out.insert(b.action.channel);
        free_channels_into(b.continuation, bound, out);
      }
      break;
    case Term::Kind::Random:
      for (const auto& b : t->randoms) free_channels_into(b.continuation, bound, out);
      break;
    case Term::Kind::Par:
      free_channels_into(t->left, bound, out);
      free_channels_into(t->right, bound, out);
      break;
    case Term::Kind::Restrict: {
      bool fresh = bound.insert(t->name).second;
      free_channels_into(t->left, bound, out);
      if (fresh) bound.erase(t->name);
      break;
    }
    case Term::Kind::Fix:
      free_channels_into(t->left, bound, out);
      break;
  }
}

}  // namespace detail

/// Free process variables of a term. A term is a process iff this is empty.
inline std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  detail::free_vars_into(t, bound, out);
  return out;
}

/// Channel names occurring outside any enclosing restriction of that name.
inline std::set<std::string> free_channels(const TermPtr& t) {
  std::set<std::string> bound, out;
  detail::free_channels_into(t, bound, out);
  return out;
}

inline bool is_process(const TermPtr& t) { return free_vars(t).empty(); }

inline bool contains_random(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var: return false;
    case Term::Kind::Random: return true;
    case Term::Kind::Choice:
      return std::any_of(t->branches.begin(), t->branches.end(),
                         [](const ChoiceBranch& b) { return contains_random(b.continuation); });
    case Term::Kind::Par:
      return contains_random(t->left) || contains_random(t->right);
    case Term::Kind::Restrict:
    case Term::Kind::Fix:
      return contains_random(t->left);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 0;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

inline TermPtr rename_free_var(const TermPtr& t, const std::string& from, const std::string& to) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == from ? var(to) : t;
    case Term::Kind::Choice: {
      std::vector<ChoiceBranch> bs;
      bs.reserve(t->branches.size());
      for (const auto& b : t->branches)
        bs.push_back({b.action, rename_free_var(b.continuation, from, to)});
      return choice(std::move(bs));
    }
    case Term::Kind::Random: {
      std::vector<RandomBranch> bs;
      bs.reserve(t->randoms.size());
      for (const auto& b : t->randoms)
        bs.push_back({b.probability, rename_free_var(b.continuation, from, to)});
      return random_choice(std::move(bs));
    }
    case Term::Kind::Par:
      return par(rename_free_var(t->left, from, to), rename_free_var(t->right, from, to));
    case Term::Kind::Restrict:
      return restriction(t->name, rename_free_var(t->left, from, to));
    case Term::Kind::Fix:
      if (t->name == from) return t;  // shadowed
      return fix(t->name, rename_free_var(t->left, from, to));
  }
  return t;
}

inline TermPtr rename_free_channel(const TermPtr& t, const std::string& from, const std::string& to) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t;
    case Term::Kind::Choice: {
      std::vector<ChoiceBranch> bs;
      bs.reserve(t->branches.size());
      for (const auto& b : t->branches) {
        Prefix a = b.action;
        if (a.polarity != Polarity::Tau && a.channel == from) a.channel = to;
        bs.push_back({a, rename_free_channel(b.continuation, from, to)});
      }
      return choice(std::move(bs));
    }
    case Term::Kind::Random: {
      std::vector<RandomBranch> bs;
      bs.reserve(t->randoms.size());
      for (const auto& b : t->randoms)
        bs.push_back({b.probability, rename_free_channel(b.continuation, from, to)});
      return random_choice(std::move(bs));
    }
    case Term::Kind::Par:
      return par(rename_free_channel(t->left, from, to), rename_free_channel(t->right, from, to));
    case Term::Kind::Restrict:
      if (t->name == from) return t;  // shadowed
      return restriction(t->name, rename_free_channel(t->left, from, to));
    case Term::Kind::Fix:
      return fix(t->name, rename_free_channel(t->left, from, to));
  }
  return t;
}

}  // namespace detail

/// Capture-avoiding substitution of `replacement` for free occurrences of the
/// process variable `variable`. Binders (both fixpoint variables and
/// restricted channels) are renamed on demand when they would capture a free
/// name of the replacement.
inline TermPtr substitute(const TermPtr& t, const std::string& variable, const TermPtr& replacement) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name == variable ? replacement : t;
    case Term::Kind::Choice: {
      std::vector<ChoiceBranch> bs;
      bs.reserve(t->branches.size());
      for (const auto& b : t->branches)
        bs.push_back({b.action, substitute(b.continuation, variable, replacement)});
      return choice(std::move(bs));
    }
    case Term::Kind::Random: {
      std::vector<RandomBranch> bs;
      bs.reserve(t->randoms.size());
      for (const auto& b : t->randoms)
        bs.push_back({b.probability, substitute(b.continuation, variable, replacement)});
      return random_choice(std::move(bs));
    }
    case Term::Kind::Par:
      return par(substitute(t->left, variable, replacement),
                 substitute(t->right, variable, replacement));
    case Term::Kind::Restrict: {
      if (!free_channels(replacement).count(t->name))
        return restriction(t->name, substitute(t->left, variable, replacement));
      std::set<std::string> avoid = free_channels(t->left);
      auto repl_free = free_channels(replacement);
      avoid.insert(repl_free.begin(), repl_free.end());
      std::string renamed = detail::fresh_name(t->name, avoid);
      TermPtr body = detail::rename_free_channel(t->left, t->name, renamed);
      return restriction(renamed, substitute(body, variable, replacement));
    }
    case Term::Kind::Fix: {
      if (t->name == variable) return t;  // variable is bound here
      if (!free_vars(replacement).count(t->name))
        return fix(t->name, substitute(t->left, variable, replacement));
      std::set<std::string> avoid = free_vars(t->left);
      auto repl_free = free_vars(replacement);
      avoid.insert(repl_free.begin(), repl_free.end());
      avoid.insert(variable);
      std::string renamed = detail::fresh_name(t->name, avoid);
      TermPtr body = detail::rename_free_var(t->left, t->name, renamed);
      return fix(renamed, substitute(body, variable, replacement));
    }
  }
  return t;
}

/// One-step unfolding of a fixpoint term: body{t/X}.
inline TermPtr unfold(const TermPtr& t) {
  if (t->kind != Term::Kind::Fix) throw Error("unfold: not a fixpoint term");
  return substitute(t->left, t->name, t);
}

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

namespace detail {

// A free occurrence of `variable` is guarded once it sits under any prefix of
// a sum or inside any random branch; only Par/Restrict/Fix contexts can leave
// it exposed.
inline bool guarded_in(const TermPtr& t, const std::string& variable) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name != variable;
    case Term::Kind::Choice:
    case Term::Kind::Random:
      return true;
    case Term::Kind::Par:
      return guarded_in(t->left, variable) && guarded_in(t->right, variable);
    case Term::Kind::Restrict:
      return guarded_in(t->left, variable);
    case Term::Kind::Fix:
      if (t->name == variable) return true;
      return guarded_in(t->left, variable);
  }
  return true;
}

}  // namespace detail

/// Checks the structural invariants: random choices have at least two
/// branches, each weight in (0,1), weights summing to exactly 1; every
/// fixpoint variable is guarded in its body. Throws IllFormedError.
inline void validate(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
      return;
    case Term::Kind::Choice:
      for (const auto& b : t->branches) validate(b.continuation);
      return;
    case Term::Kind::Random: {
      if (t->randoms.size() < 2)
        throw IllFormedError(IllFormedReason::SingletonRandomChoice);
      Rational sum = 0;
      for (const auto& b : t->randoms) {
        if (!is_branch_probability(b.probability))
          throw IllFormedError(IllFormedReason::ProbOutOfRange,
                               rational_string(b.probability));
        sum += b.probability;
      }
      if (sum != 1)
        throw IllFormedError(IllFormedReason::ProbSumNotOne, rational_string(sum));
      for (const auto& b : t->randoms) validate(b.continuation);
      return;
    }
    case Term::Kind::Par:
      validate(t->left);
      validate(t->right);
      return;
    case Term::Kind::Restrict:
      validate(t->left);
      return;
    case Term::Kind::Fix:
      if (!detail::guarded_in(t->left, t->name))
        throw IllFormedError(IllFormedReason::UnguardedVariable, t->name);
      validate(t->left);
      return;
  }
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string print_action(const Prefix& a) {
  switch (a.polarity) {
    case Polarity::Input: return a.channel;
    case Polarity::Output: return "'" + a.channel;
    case Polarity::Tau: return "tau";
  }
  return "?";
}

inline std::string print_term(const TermPtr& t);

// Continuation of a prefix: bare only for variables and prefix chains, so the
// chain rebinds unambiguously under "+" and "|".
inline std::string print_continuation(const TermPtr& t) {
  if (t->kind == Term::Kind::Var) return t->name;
  if (t->kind == Term::Kind::Choice && t->branches.size() == 1) {
    const auto& b = t->branches.front();
    if (is_nil(b.continuation)) return print_action(b.action);
    return print_action(b.action) + "." + print_continuation(b.continuation);
  }
  return "(" + print_term(t) + ")";
}

inline std::string print_branch(const ChoiceBranch& b) {
  if (is_nil(b.continuation)) return print_action(b.action);
  return print_action(b.action) + "." + print_continuation(b.continuation);
}

inline std::string print_restrict_body(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name;
    case Term::Kind::Choice:
      if (t->branches.empty()) return "0";
      if (t->branches.size() == 1) return print_branch(t->branches.front());
      return "(" + print_term(t) + ")";
    case Term::Kind::Restrict:
      return print_term(t);
    default:
      return "(" + print_term(t) + ")";
  }
}

inline std::string print_par_operand(const TermPtr& t, bool leftmost) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name;
    case Term::Kind::Choice:
      if (t->branches.empty()) return "0";
      if (t->branches.size() == 1) return print_branch(t->branches.front());
      return "(" + print_term(t) + ")";
    case Term::Kind::Restrict:
      return print_term(t);
    case Term::Kind::Par:
      // "|" is left-associative; a right-nested Par keeps its parentheses.
      return leftmost ? print_term(t) : "(" + print_term(t) + ")";
    default:
      return "(" + print_term(t) + ")";
  }
}

inline std::string print_term(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var:
      return t->name;
    case Term::Kind::Choice: {
      if (t->branches.empty()) return "0";
      std::string out;
      for (std::size_t i = 0; i < t->branches.size(); ++i) {
        if (i) out += " + ";
        out += print_branch(t->branches[i]);
      }
      return out;
    }
    case Term::Kind::Random: {
      std::string out;
      for (std::size_t i = 0; i < t->randoms.size(); ++i) {
        const auto& b = t->randoms[i];
        if (i) out += " (+) ";
        out += "(" + rational_string(b.probability) + ")tau";
        out += is_nil(b.continuation) ? ".0" : "." + print_continuation(b.continuation);
      }
      return out;
    }
    case Term::Kind::Par:
      return print_par_operand(t->left, true) + " | " + print_par_operand(t->right, false);
    case Term::Kind::Restrict:
      return "(new " + t->name + ")" + print_restrict_body(t->left);
    case Term::Kind::Fix:
      return "mu " + t->name + ". (" + print_term(t->left) + ")";
  }
  return "?";
}

}  // namespace detail

/// Canonical concrete syntax. parse(print(t)) reproduces t exactly, and the
/// printer is injective on ASTs, so printed text doubles as a state key.
inline std::string print(const TermPtr& t) { return detail::print_term(t); }

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok {
  LParen, RParen, OPlus, Plus, Bar, Dot, Slash, Quote,
  Int, LowerIdent, UpperIdent, KwMu, KwNew, KwTau, End
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto isid = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    std::size_t pos = i;
    if (c == '(') {
      // "(+)" is a single token with no interior spaces.
      if (i + 2 < src.size() && src[i + 1] == '+' && src[i + 2] == ')') {
        out.push_back({Tok::OPlus, "(+)", pos});
        i += 3;
        continue;
      }
      out.push_back({Tok::LParen, "(", pos});
      ++i;
      continue;
    }
    switch (c) {
      case ')': out.push_back({Tok::RParen, ")", pos}); ++i; continue;
      case '+': out.push_back({Tok::Plus, "+", pos}); ++i; continue;
      case '|': out.push_back({Tok::Bar, "|", pos}); ++i; continue;
      case '.': out.push_back({Tok::Dot, ".", pos}); ++i; continue;
      case '/': out.push_back({Tok::Slash, "/", pos}); ++i; continue;
      case '\'': out.push_back({Tok::Quote, "'", pos}); ++i; continue;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), pos});
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && isid(src[j])) ++j;
      std::string word(src.substr(i, j - i));
      Tok kind;
      if (word == "mu") kind = Tok::KwMu;
      else if (word == "new") kind = Tok::KwNew;
      else if (word == "tau") kind = Tok::KwTau;
      else if (std::isupper(static_cast<unsigned char>(c))) kind = Tok::UpperIdent;
      else kind = Tok::LowerIdent;
      out.push_back({kind, std::move(word), pos});
      i = j;
      continue;
    }
    throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

// Recursive descent over the precedence ladder
//   prefix > restrict > "|" > "+"/"(+)"
// with greedy bodies for "mu". Sums only admit guarded summands.
class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  TermPtr parse() {
    TermPtr t = parse_sum();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }

  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool accept(Tok k) {
    if (peek().kind != k) return false;
    advance();
    return true;
  }

  const Token& expect(Tok k, const std::string& what) {
    if (peek().kind != k) throw SyntaxError(peek().pos, "expected " + what);
    return advance();
  }

  bool looks_like_random_branch() const {
    return peek(0).kind == Tok::LParen && peek(1).kind == Tok::Int &&
           peek(2).kind == Tok::Slash && peek(3).kind == Tok::Int &&
           peek(4).kind == Tok::RParen && peek(5).kind == Tok::KwTau;
  }

  RandomBranch parse_random_branch() {
    expect(Tok::LParen, "'('");
    const Token& num = expect(Tok::Int, "numerator");
    expect(Tok::Slash, "'/'");
    const Token& den = expect(Tok::Int, "denominator");
    if (den.text == "0") throw SyntaxError(den.pos, "zero denominator");
    expect(Tok::RParen, "')'");
    expect(Tok::KwTau, "'tau'");
    TermPtr cont = accept(Tok::Dot) ? parse_prefix_level() : nil();
    return {make_rational(Integer(num.text), Integer(den.text)), std::move(cont)};
  }

  TermPtr parse_sum() {
    if (looks_like_random_branch()) {
      std::vector<RandomBranch> branches;
      branches.push_back(parse_random_branch());
      while (accept(Tok::OPlus)) branches.push_back(parse_random_branch());
      return random_choice(std::move(branches));
    }
    std::size_t start = peek().pos;
    TermPtr first = parse_par();
    if (peek().kind != Tok::Plus) {
      if (peek().kind == Tok::OPlus)
        throw SyntaxError(peek().pos, "'(+)' joins probability-weighted tau branches only");
      return first;
    }
    std::vector<ChoiceBranch> branches = to_summands(first, start);
    while (accept(Tok::Plus)) {
      std::size_t opos = peek().pos;
      TermPtr next = parse_par();
      auto more = to_summands(next, opos);
      branches.insert(branches.end(), more.begin(), more.end());
    }
    return choice(std::move(branches));
  }

  static std::vector<ChoiceBranch> to_summands(const TermPtr& t, std::size_t pos) {
    if (t->kind != Term::Kind::Choice)
      throw SyntaxError(pos, "summand must be a guarded prefix or 0");
    return t->branches;
  }

  TermPtr parse_par() {
    TermPtr t = parse_restrict_level();
    while (accept(Tok::Bar)) t = par(t, parse_restrict_level());
    return t;
  }

  bool at_restriction() const {
    return peek(0).kind == Tok::LParen && peek(1).kind == Tok::KwNew;
  }

  TermPtr parse_restrict_level() {
    if (at_restriction()) {
      advance();  // (
      advance();  // new
      const Token& name = expect(Tok::LowerIdent, "channel name");
      expect(Tok::RParen, "')'");
      return restriction(name.text, parse_restrict_level());
    }
    return parse_prefix_level();
  }

  TermPtr parse_prefix_level() {
    switch (peek().kind) {
      case Tok::KwTau:
      case Tok::LowerIdent:
      case Tok::Quote: {
        Prefix action = parse_action();
        TermPtr cont = accept(Tok::Dot) ? parse_prefix_level() : nil();
        return prefix(std::move(action), std::move(cont));
      }
      default:
        return parse_primary();
    }
  }

  Prefix parse_action() {
    if (accept(Tok::KwTau)) return act_tau();
    if (accept(Tok::Quote)) {
      const Token& name = expect(Tok::LowerIdent, "channel name after '");
      return act_out(name.text);
    }
    const Token& name = expect(Tok::LowerIdent, "action");
    return act_in(name.text);
  }

  TermPtr parse_primary() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::LParen:
        if (at_restriction()) return parse_restrict_level();
        advance();
        {
          TermPtr t = parse_sum();
          expect(Tok::RParen, "')'");
          return t;
        }
      case Tok::UpperIdent:
        advance();
        return var(tok.text);
      case Tok::KwMu: {
        advance();
        const Token& name = expect(Tok::UpperIdent, "process variable");
        expect(Tok::Dot, "'.'");
        TermPtr body = parse_sum();  // binder body extends as far right as possible
        return fix(name.text, std::move(body));
      }
      case Tok::Int:
        if (tok.text == "0") {
          advance();
          return nil();
        }
        throw SyntaxError(tok.pos, "unexpected number (only 0 is a term)");
      default:
        throw SyntaxError(tok.pos, "expected a term");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the ASCII grammar and validates well-formedness. Throws SyntaxError
/// or IllFormedError.
inline TermPtr parse(std::string_view text) {
  detail::Parser parser(detail::lex(text));
  TermPtr t = parser.parse();
  validate(t);
  return t;
}

// ---------------------------------------------------------------------------
// Alpha-normalization
// ---------------------------------------------------------------------------

namespace detail {

struct NormState {
  const std::set<std::string>* free_variable_names;
  const std::set<std::string>* free_channel_names;
  int next_var = 0;
  int next_chan = 0;

  std::string fresh_var() {
    for (;;) {
      std::string cand = "X" + std::to_string(next_var++);
      if (!free_variable_names->count(cand)) return cand;
    }
  }
  std::string fresh_chan() {
    for (;;) {
      std::string cand = "c" + std::to_string(next_chan++);
      if (!free_channel_names->count(cand)) return cand;
    }
  }
};

inline TermPtr normalize_rec(const TermPtr& t, NormState& st,
                             const std::map<std::string, std::string>& var_env,
                             const std::map<std::string, std::string>& chan_env) {
  switch (t->kind) {
    case Term::Kind::Var: {
      auto it = var_env.find(t->name);
      return it == var_env.end() ? t : var(it->second);
    }
    case Term::Kind::Choice: {
      std::vector<ChoiceBranch> bs;
      bs.reserve(t->branches.size());
      for (const auto& b : t->branches) {
        Prefix a = b.action;
        if (a.polarity != Polarity::Tau) {
          auto it = chan_env.find(a.channel);
          if (it != chan_env.end()) a.channel = it->second;
        }
        bs.push_back({std::move(a), normalize_rec(b.continuation, st, var_env, chan_env)});
      }
      return choice(std::move(bs));
    }
    case Term::Kind::Random: {
      std::vector<RandomBranch> bs;
      bs.reserve(t->randoms.size());
      for (const auto& b : t->randoms)
        bs.push_back({b.probability, normalize_rec(b.continuation, st, var_env, chan_env)});
      return random_choice(std::move(bs));
    }
    case Term::Kind::Par: {
      TermPtr l = normalize_rec(t->left, st, var_env, chan_env);
      TermPtr r = normalize_rec(t->right, st, var_env, chan_env);
      return par(std::move(l), std::move(r));
    }
    case Term::Kind::Restrict: {
      std::string renamed = st.fresh_chan();
      auto env = chan_env;
      env[t->name] = renamed;
      return restriction(renamed, normalize_rec(t->left, st, var_env, env));
    }
    case Term::Kind::Fix: {
      std::string renamed = st.fresh_var();
      auto env = var_env;
      env[t->name] = renamed;
      return fix(renamed, normalize_rec(t->left, st, env, chan_env));
    }
  }
  return t;
}

}  // namespace detail

/// Deterministic renaming of bound names: fixpoint variables become X0, X1, …
/// and restricted channels c0, c1, … in preorder, skipping names that occur
/// free anywhere in the term. Alpha-equivalent terms map to identical ASTs and
/// the map is idempotent.
inline TermPtr alpha_normalize(const TermPtr& t) {
  auto fv = free_vars(t);
  auto fc = free_channels(t);
  detail::NormState st{&fv, &fc, 0, 0};
  return detail::normalize_rec(t, st, {}, {});
}

}  // namespace rccs
