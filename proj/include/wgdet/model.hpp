#pragma once

#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "wgdet/numerics.hpp"

namespace wgdet {

/// Reference wavevector in units where lengths are measured in wavelengths.
inline constexpr double kWavevector = 2.0 * std::numbers::pi;

enum class Geometry { mirror, infinite };

std::string_view to_string(Geometry g);
Geometry geometry_from_string(std::string_view name);

/// Atom positions in units of the optical wavelength. For the mirror geometry
/// the mirror sits at x = 0 and all positions must be positive. `lattice` and
/// `sigma` record how the array was generated and are informational only.
struct AtomArray {
  Geometry geometry = Geometry::mirror;
  std::vector<double> positions;
  double lattice = 1.0;
  double sigma = 0.0;

  std::size_t size() const noexcept { return positions.size(); }

  /// Mirror array at the atomic-mirror configuration x_n = (1/4 + n) * lattice.
  static AtomArray mirror_lattice(std::size_t n, double lattice = 1.0);
  /// Infinite-waveguide array x_n = n * lattice.
  static AtomArray infinite_lattice(std::size_t n, double lattice);
};

/// Waveguide, engineered and free-space decay rates in units of the global
/// frequency scale (gamma_1d = 1 by convention).
struct Rates {
  double gamma_1d = 1.0;
  double gamma_eng = 0.0;
  double gamma_free = 0.0;

  double gamma_prime() const noexcept { return gamma_eng + gamma_free; }
  double purcell() const;

  /// gamma_free = gamma_1d / purcell, gamma_eng left at zero.
  static Rates from_purcell(double purcell, double gamma_1d = 1.0);
  void validate() const;
};

/// Linearised dynamics b' = (D - gamma'/2) b + L a_in with a_out = a_in + L^dagger b
/// up to sign conventions absorbed in L. D excludes the uniform loss gamma'.
struct DriftModel {
  ComplexMatrix drift;     ///< N x N, complex symmetric
  ComplexMatrix coupling;  ///< N x p; p = 1 (mirror) or 2 (infinite, columns +, -)
  Geometry geometry = Geometry::mirror;

  std::size_t atoms() const noexcept { return drift.rows(); }
  std::size_t ports() const noexcept { return coupling.cols(); }
};

/// Max-entry residual of D - D^T.
double symmetry_residual(const DriftModel& model);
/// Max-entry residual of D + D^dagger + L L^dagger (fluctuation-dissipation).
double fdt_residual(const DriftModel& model);

DriftModel mirror_drift(const AtomArray& array, double gamma_1d = 1.0);
DriftModel infinite_drift(const AtomArray& array, double gamma_1d = 1.0);

/// Mirror drift averaged over fast Gaussian motion about the atomic-mirror
/// lattice. `k0_sigma` is the dimensionless width k0 * sigma. The coupling
/// vector keeps its lattice value, so the fluctuation-dissipation identity no
/// longer holds for k0_sigma > 0.
DriftModel thermal_mirror_drift(const AtomArray& base, double gamma_1d, double k0_sigma);

/// Off-diagonal and diagonal entries used by thermal_mirror_drift.
Complex thermal_offdiagonal(double gamma_1d, double k0_sigma);
double thermal_diagonal(double gamma_1d, double k0_sigma);

}  // namespace wgdet
