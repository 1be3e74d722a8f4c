#include "wgdet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wgdet {

std::string_view to_string(Geometry g) {
  switch (g) {
    case Geometry::mirror:
      return "mirror";
    case Geometry::infinite:
      return "infinite";
  }
  return "unknown";
}

Geometry geometry_from_string(std::string_view name) {
  if (name == "mirror") return Geometry::mirror;
  if (name == "infinite") return Geometry::infinite;
  throw std::invalid_argument("unknown geometry '" + std::string(name) + "'");
}

AtomArray AtomArray::mirror_lattice(std::size_t n, double lattice) {
  AtomArray array{Geometry::mirror, {}, lattice, 0.0};
  array.positions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) array.positions.push_back((0.25 + static_cast<double>(i)) * lattice);
  return array;
}

AtomArray AtomArray::infinite_lattice(std::size_t n, double lattice) {
  AtomArray array{Geometry::infinite, {}, lattice, 0.0};
  array.positions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) array.positions.push_back(static_cast<double>(i) * lattice);
  return array;
}

double Rates::purcell() const {
  if (!(gamma_free > 0.0)) throw std::domain_error("purcell factor requires gamma_free > 0");
  return gamma_1d / gamma_free;
}

Rates Rates::from_purcell(double purcell, double gamma_1d) {
  if (!(purcell > 0.0) || !std::isfinite(purcell)) throw std::invalid_argument("purcell factor must be positive");
  return Rates{gamma_1d, 0.0, gamma_1d / purcell};
}

void Rates::validate() const {
  for (double r : {gamma_1d, gamma_eng, gamma_free}) {
    if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("rates must be finite and non-negative");
  }
}

double symmetry_residual(const DriftModel& model) { return (model.drift - model.drift.transpose()).max_abs(); }

double fdt_residual(const DriftModel& model) {
  return (model.drift + model.drift.adjoint() + model.coupling * model.coupling.adjoint()).max_abs();
}

namespace {

void check_array(const AtomArray& array) {
  if (array.positions.empty()) throw GeometryError("atom array must contain at least one atom");
  for (double x : array.positions) {
    if (!std::isfinite(x)) throw GeometryError("atom position is not finite");
  }
}

void check_rate(double gamma_1d) {
  if (!std::isfinite(gamma_1d) || gamma_1d < 0.0) throw std::invalid_argument("gamma_1d must be non-negative");
}

std::vector<Complex> phases(const AtomArray& array) {
  std::vector<Complex> p;
  p.reserve(array.size());
  for (double x : array.positions) p.push_back(std::polar(1.0, kWavevector * x));
  return p;
}

// exp(i k |x_m - x_n|) from the per-atom phases.
Complex propagation(const AtomArray& array, const std::vector<Complex>& p, std::size_t m, std::size_t n) {
  return array.positions[m] >= array.positions[n] ? p[m] * std::conj(p[n]) : p[n] * std::conj(p[m]);
}

}  // namespace

DriftModel mirror_drift(const AtomArray& array, double gamma_1d) {
  check_array(array);
  check_rate(gamma_1d);
  for (double x : array.positions) {
    if (x <= 0.0) throw GeometryError("mirror geometry requires all positions > 0, got " + std::to_string(x));
  }
  const std::size_t n = array.size();
  const auto p = phases(array);
  DriftModel model{ComplexMatrix(n, n), ComplexMatrix(n, 1), Geometry::mirror};
  const double pref = -0.25 * gamma_1d;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Complex v = pref * (propagation(array, p, i, j) - p[i] * p[j]);
      model.drift(i, j) = v;
      model.drift(j, i) = v;
    }
    model.coupling(i, 0) = std::sqrt(gamma_1d) * p[i].imag();
  }
  return model;
}

DriftModel infinite_drift(const AtomArray& array, double gamma_1d) {
  check_array(array);
  check_rate(gamma_1d);
  const std::size_t n = array.size();
  const auto p = phases(array);
  DriftModel model{ComplexMatrix(n, n), ComplexMatrix(n, 2), Geometry::infinite};
  const double root = std::sqrt(gamma_1d);
  for (std::size_t i = 0; i < n; ++i) {
    model.drift(i, i) = -gamma_1d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex v = -gamma_1d * propagation(array, p, i, j);
      model.drift(i, j) = v;
      model.drift(j, i) = v;
    }
    model.coupling(i, 0) = root * p[i];
    model.coupling(i, 1) = root * std::conj(p[i]);
  }
  return model;
}

Complex thermal_offdiagonal(double gamma_1d, double k0_sigma) {
  const double damping = std::exp(-k0_sigma * k0_sigma);
  return -0.5 * gamma_1d * Complex{damping, std::numbers::inv_sqrtpi * dawson(k0_sigma)};
}

double thermal_diagonal(double gamma_1d, double k0_sigma) {
  // Printed single-atom average; a direct average of exp(2 i k0 y) would give
  // exp(-2 (k0 sigma)^2) instead.
  return -0.25 * gamma_1d * (1.0 + std::exp(-k0_sigma * k0_sigma));
}

DriftModel thermal_mirror_drift(const AtomArray& base, double gamma_1d, double k0_sigma) {
  check_array(base);
  check_rate(gamma_1d);
  if (!std::isfinite(k0_sigma) || k0_sigma < 0.0) throw std::invalid_argument("k0_sigma must be non-negative");
  for (double x : base.positions) {
    const double frac = x - std::floor(x);
    if (x <= 0.0 || std::abs(frac - 0.25) > 1e-9) {
      throw GeometryError("thermal averaging requires atomic-mirror base positions (1/4 + n) wavelengths");
    }
  }
  const std::size_t n = base.size();
  DriftModel model = mirror_drift(base, gamma_1d);
  const Complex off = thermal_offdiagonal(gamma_1d, k0_sigma);
  const Complex diag = thermal_diagonal(gamma_1d, k0_sigma);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) model.drift(i, j) = i == j ? diag : off;
  }
  return model;
}

}  // namespace wgdet
