#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "rccs/errors.hpp"

namespace rccs {

/// Exact rational arithmetic. All probabilities in the calculus are rationals
/// kept in lowest terms with a positive denominator; equality of weighted
/// probabilities must be decidable exactly, so floats are out of the question.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw Error("rational with zero denominator");
  return Rational(num, den);
}

/// "num/den", always with an explicit denominator ("1/2", "3/1").
inline std::string rational_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos)
    return make_rational(Integer(text), 1);
  return make_rational(Integer(text.substr(0, slash)), Integer(text.substr(slash + 1)));
}

/// Strict membership in (0,1) — the legal range for a random-branch weight.
inline bool is_branch_probability(const Rational& r) { return r > 0 && r < 1; }

}  // namespace rccs
