#pragma once

#include <stdexcept>
#include <string>

namespace tfsp {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the subclasses let the CLI map errors to kinds.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

// A domain invariant or operation precondition was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_input"; }
};

// A file could not be parsed. The message carries line and field context.
class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse_error"; }
};

// The embedded solver could not produce an answer (singular basis, refused
// model size, ...).
class SolverError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "solver_error"; }
};

}  // namespace tfsp
