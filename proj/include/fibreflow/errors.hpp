#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fibreflow {

/// Base class for every error raised by the solver suite.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a closure (e.g. h < 1 in I(h)).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or precondition violation on user input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The film touched the fibre (v = h^2 - 1 at or below the floor) at a node.
class DegenerateFilmError : public Error {
 public:
  DegenerateFilmError(std::size_t node, double h)
      : Error("degenerate film at node " + std::to_string(node) +
              " (h = " + std::to_string(h) + ")"),
        node_(node),
        h_(h) {}

  std::size_t node() const noexcept { return node_; }
  double h() const noexcept { return h_; }

 private:
  std::size_t node_;
  double h_;
};

class SingularMatrixError : public Error {
 public:
  explicit SingularMatrixError(std::size_t pivot)
      : Error("singular matrix: zero pivot at index " + std::to_string(pivot)),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Newton iteration failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(what + " (residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

}  // namespace fibreflow
