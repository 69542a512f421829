#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssmcmc {

/// Caller broke a precondition (dimension mismatch, invalid index, bad label).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sampler, schedule or run configuration is inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chain produced a non-finite or runaway state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t step, const std::string& what)
      : std::runtime_error("chain diverged at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  DataError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Numerical breakdown tied to a specific datum (underflow, singular factor).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t datum, const std::string& what)
      : std::runtime_error("datum " + std::to_string(datum) + ": " + what), datum_(datum) {}

  std::size_t datum() const noexcept { return datum_; }

 private:
  std::size_t datum_;
};

}  // namespace ssmcmc
