#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rccs {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Why a syntactically parseable term was rejected.
enum class IllFormedReason {
  ProbSumNotOne,
  ProbOutOfRange,
  UnguardedVariable,
  SingletonRandomChoice,
};

inline const char* to_string(IllFormedReason r) {
  switch (r) {
    case IllFormedReason::ProbSumNotOne: return "ProbSumNotOne";
    case IllFormedReason::ProbOutOfRange: return "ProbOutOfRange";
    case IllFormedReason::UnguardedVariable: return "UnguardedVariable";
    case IllFormedReason::SingletonRandomChoice: return "SingletonRandomChoice";
  }
  return "?";
}

struct SyntaxError : Error {
  std::size_t position;
  SyntaxError(std::size_t pos, const std::string& msg)
      : Error("syntax error at offset " + std::to_string(pos) + ": " + msg),
        position(pos) {}
};

struct IllFormedError : Error {
  IllFormedReason reason;
  explicit IllFormedError(IllFormedReason r, const std::string& detail = "")
      : Error(std::string("ill-formed term: ") + to_string(r) +
              (detail.empty() ? "" : " (" + detail + ")")),
        reason(r) {}
};

struct OpenTermError : Error {
  explicit OpenTermError(const std::string& var)
      : Error("term has free variable " + var) {}
};

struct BoundExceededError : Error {
  std::size_t bound;
  explicit BoundExceededError(std::size_t b)
      : Error("state space exceeds bound of " + std::to_string(b) + " states"),
        bound(b) {}
};

struct VisibleInPathError : Error {
  VisibleInPathError() : Error("silent-transition path contains a visible label") {}
};

struct SameBlockError : Error {
  SameBlockError() : Error("target class must differ from the source state's class") {}
};

struct PreconditionError : Error {
  using Error::Error;
};

struct OracleBoundError : Error {
  std::size_t bound;
  explicit OracleBoundError(std::size_t b)
      : Error("state space too large for the enumeration oracle (bound " +
              std::to_string(b) + ")"),
        bound(b) {}
};

struct RandomTermInCcsOracleError : Error {
  RandomTermInCcsOracleError()
      : Error("the CCS baseline checker only accepts terms without random choice") {}
};

}  // namespace rccs
