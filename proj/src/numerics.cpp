#include "wgdet/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace wgdet {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// |re| + |im|, the cheap modulus used for deflation and balancing tests.
double abs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

}  // namespace

SingularMatrixError::SingularMatrixError(std::size_t column, double pivot_magnitude)
    : std::runtime_error("singular matrix: pivot " + std::to_string(pivot_magnitude) + " in column " +
                         std::to_string(column)),
      column_(column),
      pivot_magnitude_(pivot_magnitude) {}

ConvergenceError::ConvergenceError(std::size_t block_begin, std::size_t block_end, int iterations)
    : std::runtime_error("QR iteration did not converge on subblock [" + std::to_string(block_begin) + ", " +
                         std::to_string(block_end) + "] after " + std::to_string(iterations) + " iterations"),
      block_begin_(block_begin),
      block_end_(block_end) {}

InsufficientDecayError::InsufficientDecayError(double kappa, double gamma_free)
    : std::runtime_error("insufficient collective decay: kappa " + std::to_string(kappa) +
                         " does not exceed gamma_free " + std::to_string(gamma_free)),
      kappa_(kappa),
      gamma_free_(gamma_free) {}

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, Complex{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
  }
  if (!all_finite()) {
    throw std::invalid_argument("ComplexMatrix: non-finite entry");
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw std::invalid_argument("ComplexMatrix: ragged initializer");
    }
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
  if (!all_finite()) {
    throw std::invalid_argument("ComplexMatrix: non-finite entry");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

double ComplexMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : entries_) m = std::max(m, std::abs(z));
  return m;
}

bool ComplexMatrix::all_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("ComplexMatrix: shape mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw std::invalid_argument("ComplexMatrix: shape mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) noexcept {
  for (auto& z : entries_) z *= scale;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) throw std::invalid_argument("ComplexMatrix: inner dimension mismatch");
  ComplexMatrix out(lhs.rows(), rhs.cols());
  for (std::size_t r = 0; r < lhs.rows(); ++r) {
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const Complex a = lhs(r, k);
      if (a == Complex{}) continue;
      for (std::size_t c = 0; c < rhs.cols(); ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear solve

ComplexMatrix linear_solve(const ComplexMatrix& a, const ComplexMatrix& b, double scale_hint) {
  if (!a.is_square()) throw std::invalid_argument("linear_solve: matrix is not square");
  if (b.rows() != a.rows()) throw std::invalid_argument("linear_solve: right-hand side has wrong row count");

  const std::size_t n = a.rows();
  ComplexMatrix lu = a;
  ComplexMatrix x = b;
  const double tol = static_cast<double>(std::max<std::size_t>(n, 1)) * kEps * std::max(a.max_abs(), scale_hint);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot_row = k;
    double pivot_abs = std::abs(lu(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(lu(r, k));
      if (v > pivot_abs) {
        pivot_abs = v;
        pivot_row = r;
      }
    }
    if (pivot_abs <= tol) throw SingularMatrixError(k, pivot_abs);
    if (pivot_row != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(pivot_row, c));
      for (std::size_t c = 0; c < x.cols(); ++c) std::swap(x(k, c), x(pivot_row, c));
    }
    const Complex inv_pivot = 1.0 / lu(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const Complex factor = lu(r, k) * inv_pivot;
      if (factor == Complex{}) continue;
      lu(r, k) = factor;
      for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= factor * lu(k, c);
      for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) -= factor * x(k, c);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    const Complex inv_pivot = 1.0 / lu(kk, kk);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      Complex s = x(kk, c);
      for (std::size_t j = kk + 1; j < n; ++j) s -= lu(kk, j) * x(j, c);
      x(kk, c) = s * inv_pivot;
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Eigenvalues

namespace {

// Diagonal similarity scaling by powers of two so that row and column norms
// are comparable.
void balance(ComplexMatrix& h) {
  const std::size_t n = h.rows();
  constexpr double radix = 2.0;
  constexpr double radix2 = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += abs1(h(j, i));
        r += abs1(h(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix2;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= radix2;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double inv_f = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) h(i, j) *= inv_f;
        for (std::size_t j = 0; j < n; ++j) h(j, i) *= f;
      }
    }
  }
}

void reduce_to_hessenberg(ComplexMatrix& h) {
  const std::size_t n = h.rows();
  std::vector<Complex> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double tail = 0.0;
    for (std::size_t r = k + 2; r < n; ++r) tail += std::norm(h(r, k));
    if (tail == 0.0) continue;
    const double x0_abs = std::abs(h(k + 1, k));
    const double alpha = std::sqrt(tail + x0_abs * x0_abs);
    const Complex phase = x0_abs == 0.0 ? Complex{1.0, 0.0} : h(k + 1, k) / x0_abs;
    const std::size_t m = n - k - 1;
    for (std::size_t r = 0; r < m; ++r) v[r] = h(k + 1 + r, k);
    v[0] += phase * alpha;
    // |v|^2 = 2 alpha (alpha + |x0|)
    const double inv_norm = 1.0 / std::sqrt(2.0 * alpha * (alpha + x0_abs));
    for (std::size_t r = 0; r < m; ++r) v[r] *= inv_norm;

    // Left: rows k+1.., columns k..
    for (std::size_t c = k; c < n; ++c) {
      Complex dot{};
      for (std::size_t r = 0; r < m; ++r) dot += std::conj(v[r]) * h(k + 1 + r, c);
      dot *= 2.0;
      for (std::size_t r = 0; r < m; ++r) h(k + 1 + r, c) -= v[r] * dot;
    }
    // Right: all rows, columns k+1..
    for (std::size_t r = 0; r < n; ++r) {
      Complex dot{};
      for (std::size_t c = 0; c < m; ++c) dot += h(r, k + 1 + c) * v[c];
      dot *= 2.0;
      for (std::size_t c = 0; c < m; ++c) h(r, k + 1 + c) -= dot * std::conj(v[c]);
    }
    h(k + 1, k) = -phase * alpha;
    for (std::size_t r = k + 2; r < n; ++r) h(r, k) = Complex{};
  }
}

struct Givens {
  double c;
  Complex s;
};

// Rotation G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
Givens make_givens(Complex a, Complex b, Complex& r) {
  const double b_abs = std::abs(b);
  if (b_abs == 0.0) {
    r = a;
    return {1.0, Complex{}};
  }
  const double a_abs = std::abs(a);
  if (a_abs == 0.0) {
    r = b_abs;
    return {0.0, std::conj(b) / b_abs};
  }
  const double rho = std::hypot(a_abs, b_abs);
  const Complex phase = a / a_abs;
  r = phase * rho;
  return {a_abs / rho, phase * std::conj(b) / rho};
}

Complex wilkinson_shift(const ComplexMatrix& h, std::size_t i) {
  const Complex a = h(i - 1, i - 1);
  const Complex b = h(i - 1, i);
  const Complex c = h(i, i - 1);
  const Complex d = h(i, i);
  const Complex p = 0.5 * (a - d);
  const Complex bc = b * c;
  const Complex disc = std::sqrt(p * p + bc);
  const Complex plus = p + disc;
  const Complex minus = p - disc;
  const Complex denom = std::abs(plus) >= std::abs(minus) ? plus : minus;
  if (denom == Complex{}) return d;
  return d - bc / denom;
}

}  // namespace

std::vector<Complex> eigenvalues(const ComplexMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("eigenvalues: matrix is not square");
  if (!a.all_finite()) throw std::invalid_argument("eigenvalues: non-finite entry");
  const std::size_t n = a.rows();
  std::vector<Complex> result(n);
  if (n == 0) return result;
  if (n == 1) {
    result[0] = a(0, 0);
    return result;
  }

  ComplexMatrix h = a;
  balance(h);
  reduce_to_hessenberg(h);

  const int max_iterations = 30 * static_cast<int>(std::max<std::size_t>(10, n));
  double window_norm = 0.0;
  for (const auto& z : h.entries()) window_norm = std::max(window_norm, abs1(z));

  std::size_t i = n - 1;
  for (;;) {
    int its = 0;
    for (;;) {
      // Look for a negligible subdiagonal entry in the active window.
      std::size_t l = i;
      for (; l > 0; --l) {
        double s = abs1(h(l - 1, l - 1)) + abs1(h(l, l));
        if (s == 0.0) s = window_norm;
        if (abs1(h(l, l - 1)) <= kEps * s) {
          h(l, l - 1) = Complex{};
          break;
        }
      }
      if (l == i) break;
      if (its >= max_iterations) throw ConvergenceError(l, i, its);

      Complex shift;
      if (its > 0 && its % 10 == 0) {
        shift = h(i, i) + 0.75 * std::abs(h(i, i - 1).real()) + Complex{0.0, 0.75 * std::abs(h(i, i - 1).imag())};
      } else {
        shift = wilkinson_shift(h, i);
      }

      for (std::size_t k = l; k < i; ++k) {
        Complex x;
        Complex y;
        if (k == l) {
          x = h(l, l) - shift;
          y = h(l + 1, l);
        } else {
          x = h(k, k - 1);
          y = h(k + 1, k - 1);
        }
        Complex r;
        const Givens g = make_givens(x, y, r);
        if (k > l) {
          h(k, k - 1) = r;
          h(k + 1, k - 1) = Complex{};
        }
        for (std::size_t c = k; c <= i; ++c) {
          const Complex top = h(k, c);
          const Complex bottom = h(k + 1, c);
          h(k, c) = g.c * top + g.s * bottom;
          h(k + 1, c) = -std::conj(g.s) * top + g.c * bottom;
        }
        const std::size_t r_end = std::min(k + 2, i);
        for (std::size_t row = l; row <= r_end; ++row) {
          const Complex left = h(row, k);
          const Complex right = h(row, k + 1);
          h(row, k) = left * g.c + right * std::conj(g.s);
          h(row, k + 1) = -left * g.s + right * g.c;
        }
      }
      ++its;
    }
    result[i] = h(i, i);
    if (i == 0) break;
    --i;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Singular values

std::vector<double> singular_values(const ComplexMatrix& a) {
  if (!a.all_finite()) throw std::invalid_argument("singular_values: non-finite entry");
  // Work on the orientation with at least as many rows as columns.
  const bool flip = a.rows() < a.cols();
  const std::size_t m = flip ? a.cols() : a.rows();
  const std::size_t n = flip ? a.rows() : a.cols();
  std::vector<std::vector<Complex>> cols(n, std::vector<Complex>(m));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (flip) {
        cols[r][c] = std::conj(a(r, c));
      } else {
        cols[c][r] = a(r, c);
      }
    }
  }

  constexpr int max_sweeps = 80;
  const double tol = 4.0 * kEps;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double alpha = 0.0;
        double beta = 0.0;
        Complex gamma{};
        for (std::size_t r = 0; r < m; ++r) {
          alpha += std::norm(cols[i][r]);
          beta += std::norm(cols[j][r]);
          gamma += std::conj(cols[i][r]) * cols[j][r];
        }
        const double gamma_abs = std::abs(gamma);
        if (gamma_abs == 0.0 || gamma_abs <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const Complex phase = gamma / gamma_abs;
        const double zeta = (beta - alpha) / (2.0 * gamma_abs);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const Complex ui = cols[i][r];
          const Complex uj = cols[j][r];
          cols[i][r] = c * ui - s * std::conj(phase) * uj;
          cols[j][r] = s * phase * ui + c * uj;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (const auto& z : cols[i]) norm2 += std::norm(z);
    values[i] = std::sqrt(norm2);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double min_singular_value(const ComplexMatrix& a) {
  const auto values = singular_values(a);
  return values.empty() ? 0.0 : values.back();
}

double max_singular_value(const ComplexMatrix& a) {
  const auto values = singular_values(a);
  return values.empty() ? 0.0 : values.front();
}

// ---------------------------------------------------------------------------
// Dawson integral

double dawson(double x) {
  if (!std::isfinite(x)) {
    if (std::isnan(x)) return x;
    return 0.0;
  }
  const double ax = std::abs(x);
  if (ax == 0.0) return 0.0;
  const double sign = x < 0.0 ? -1.0 : 1.0;

  if (ax > 1.0e3) {
    // Asymptotic series; the first omitted term is below 1e-16 here.
    const double inv2 = 1.0 / (2.0 * ax * ax);
    return sign * (1.0 + inv2 * (1.0 + 3.0 * inv2 * (1.0 + 5.0 * inv2))) / (2.0 * ax);
  }

  // Rybicki's sampling formula F(x) = pi^{-1/2} sum_{n odd} exp(-(x - n h)^2) / n.
  // The truncation error is of order exp(-(pi / 2h)^2), about 1e-17 for h = 1/4.
  constexpr double h = 0.25;
  constexpr double window = 9.0;
  const auto lo = static_cast<long>(std::floor((ax - window) / h));
  const auto hi = static_cast<long>(std::ceil((ax + window) / h));
  double sum = 0.0;
  for (long n = lo; n <= hi; ++n) {
    if (n % 2 == 0) continue;
    const double d = ax - static_cast<double>(n) * h;
    sum += std::exp(-d * d) / static_cast<double>(n);
  }
  return sign * sum * std::numbers::inv_sqrtpi;
}

}  // namespace wgdet
