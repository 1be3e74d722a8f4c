#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "wgdet/errors.hpp"

namespace wgdet {

using Complex = std::complex<double>;

/// Dense row-major complex matrix. Entries are checked for finiteness when a
/// matrix is built from external data.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<Complex> entries() noexcept { return entries_; }
  std::span<const Complex> entries() const noexcept { return entries_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;

  /// Largest entry modulus.
  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale) noexcept;

  friend ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
  friend ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
  friend ComplexMatrix operator*(ComplexMatrix lhs, Complex scale) { return lhs *= scale; }
  friend ComplexMatrix operator*(Complex scale, ComplexMatrix rhs) { return rhs *= scale; }
  friend ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

/// Solves A X = B by LU factorisation with partial pivoting.
///
/// A pivot is treated as zero when its modulus is below
/// n * eps * max(|A|_max, scale_hint). Callers that assemble A from a
/// difference of larger terms pass the magnitude of those terms as
/// `scale_hint` so that cancellation to roundoff is still detected.
ComplexMatrix linear_solve(const ComplexMatrix& a, const ComplexMatrix& b, double scale_hint = 0.0);

/// All eigenvalues of a general complex square matrix (with multiplicity, no
/// particular order). Balancing, Householder reduction to Hessenberg form and
/// single-shift complex QR with deflation.
std::vector<Complex> eigenvalues(const ComplexMatrix& a);

/// Singular values in descending order, via one-sided Jacobi. For an m x n
/// input, min(m, n) values are returned.
std::vector<double> singular_values(const ComplexMatrix& a);

double min_singular_value(const ComplexMatrix& a);
double max_singular_value(const ComplexMatrix& a);

/// Dawson integral F(x) = exp(-x^2) * integral_0^x exp(t^2) dt.
double dawson(double x);

}  // namespace wgdet
