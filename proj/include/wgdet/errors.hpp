#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wgdet {

/// Raised by linear_solve when a pivot falls below working precision.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(std::size_t column, double pivot_magnitude);

  std::size_t column() const noexcept { return column_; }
  double pivot_magnitude() const noexcept { return pivot_magnitude_; }

 private:
  std::size_t column_;
  double pivot_magnitude_;
};

/// Raised by the eigensolver when the QR iteration stalls on a subblock.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::size_t block_begin, std::size_t block_end, int iterations);

  std::size_t block_begin() const noexcept { return block_begin_; }
  std::size_t block_end() const noexcept { return block_end_; }

 private:
  std::size_t block_begin_;
  std::size_t block_end_;
};

/// Atom positions incompatible with the requested geometry.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The resolvent (or inverse-scattering inner matrix) is singular at the
/// requested operating point.
class PoleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The selected collective mode decays slower than the free-space rate, so a
/// non-negative engineered rate cannot reach the CPA point.
class InsufficientDecayError : public std::runtime_error {
 public:
  InsufficientDecayError(double kappa, double gamma_free);

  double kappa() const noexcept { return kappa_; }
  double gamma_free() const noexcept { return gamma_free_; }

 private:
  double kappa_;
  double gamma_free_;
};

/// Least-squares fit that cannot be formed (too few or degenerate points).
class FitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace wgdet
