#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdc {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class EstimatorError : public Error {
 public:
  using Error::Error;
};

class MissingDataError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class NumericBlowup : public Error {
 public:
  NumericBlowup(std::size_t step, const std::string& what)
      : Error("non-finite value at propagation step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace spdc
