#pragma once

#include <stdexcept>
#include <string>

namespace lis {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Key absent from a keyset or index.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid input file (duplicates, empty keyset).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Unparseable line in an input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Regression input that admits no unique line (too few distinct keys).
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range parameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An internal structural invariant did not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Index construction failed.
class BuildError : public Error {
 public:
  using Error::Error;
};

}  // namespace lis
