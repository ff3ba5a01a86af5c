#pragma once

#include <stdexcept>
#include <string>

namespace tldiag {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A word that is not a reduced expression (some commutation/braid rewrite
// reaches a factor ss).
struct NotReducedError : Error {
  explicit NotReducedError(const std::string& msg) : Error(msg) {}
};

// A reduced word that is not fully commutative, in a context requiring FC.
struct NotFCError : Error {
  explicit NotFCError(const std::string& msg) : Error(msg) {}
};

// A diagram that fails the admissibility clauses.
struct NotAdmissibleError : Error {
  explicit NotAdmissibleError(const std::string& msg) : Error(msg) {}
};

// Rewriting exceeded the configured step budget; signals a defect, since
// every relation strictly decreases a decoration/loop measure.
struct NonTerminatingError : Error {
  explicit NonTerminatingError(const std::string& msg) : Error(msg) {}
};

// An internal consistency assertion failed (e.g. theta produced a scalar
// factor on FC input).
struct InternalAssertionError : Error {
  explicit InternalAssertionError(const std::string& msg) : Error(msg) {}
};

// Enumeration frontier exceeded the configured cap.
struct ResourceLimitError : Error {
  explicit ResourceLimitError(const std::string& msg) : Error(msg) {}
};

// Malformed input (bad generator index, width mismatch, bad JSON, ...).
struct InvalidInputError : Error {
  explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

}  // namespace tldiag
