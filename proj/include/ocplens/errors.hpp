#pragma once

#include <stdexcept>
#include <string>

namespace ocplens {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (scenario fields, shapes, ids).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A rollout or model evaluation produced a non-finite value.
class ModelBlowUp : public Error {
 public:
  ModelBlowUp(const std::string& what, int stage)
      : Error(what + " (stage " + std::to_string(stage) + ")"), stage_(stage) {}
  int stage() const noexcept { return stage_; }

 private:
  int stage_;
};

/// An iterative solver could not make progress (line search, LP pivoting).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ocplens
