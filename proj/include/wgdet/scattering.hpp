#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wgdet/model.hpp"
#include "wgdet/numerics.hpp"

namespace wgdet {

/// Amplitude scattering matrix at one detuning. Port order: the single mirror
/// port, or (+, -) for the infinite waveguide so that S(0, 0) is the
/// transmission of right-movers.
struct ScatteringMatrix {
  double omega = 0.0;
  ComplexMatrix s;
};

struct Mode {
  Complex drift_eigenvalue;
  double kappa;      ///< -2 Re(d)
  double omega_res;  ///< -Im(d)
};

/// Drift eigenmodes sorted by kappa descending, ties broken by omega_res ascending.
struct ModeSpectrum {
  std::vector<Mode> modes;

  const Mode& most_dissipative() const { return modes.front(); }
};

struct DetectionMetrics {
  double p_abs = 0.0;
  double eta = 0.0;
  double p_loss = 1.0;
  std::optional<double> bandwidth;
};

/// Operating point that places a zero of S on a drift eigenmode.
struct CpaTuning {
  double gamma_prime;
  double omega;
  double gamma_eng;
};

/// S = 1 + L^dagger (D - gamma'/2 + i omega)^{-1} L.
///
/// Throws PoleError when the resolvent is singular, which only happens at an
/// undamped pole (gamma' = 0 and omega on a dark mode).
ScatteringMatrix smatrix(const DriftModel& model, double gamma_prime, double omega);

/// S^{-1} = 1 + L^dagger (D^dagger + gamma'/2 - i omega)^{-1} L. Throws
/// PoleError at a CPA zero of S.
ComplexMatrix inverse_smatrix(const DriftModel& model, double gamma_prime, double omega);

ModeSpectrum mode_spectrum(const DriftModel& model);

/// Tunes gamma' and omega to the selected mode (index into the
/// kappa-descending spectrum). Throws InsufficientDecayError when that mode's
/// kappa does not exceed rates.gamma_free or is at roundoff level (a dark mode).
CpaTuning cpa_tuning(const DriftModel& model, const Rates& rates, std::size_t mode_index = 0);
CpaTuning cpa_tuning(const ModeSpectrum& spectrum, const Rates& rates, std::size_t mode_index = 0);

/// Absorption and detection probabilities for a photon entering `input_port`.
DetectionMetrics detection_metrics(const DriftModel& model, const Rates& rates, double omega,
                                   std::size_t input_port = 0);

/// Output/input photon flux ratio of the collective atomic-mirror mode,
/// |1 - N gamma_1d / (gamma_tot / 2 - i omega)|^2 with gamma_tot = N gamma_1d + gamma'.
double amc_analytic_output(std::size_t n_atoms, double gamma_1d, double gamma_prime, double omega);

struct ResponsePoint {
  double omega;
  double p_abs;
  double eta;
  double p_loss;
};

std::vector<ResponsePoint> response_curve(const DriftModel& model, const Rates& rates,
                                          std::span<const double> omega_grid, std::size_t input_port = 0);

/// Full width of the set {omega : eta(omega) >= eta_peak / 2}, with linear
/// interpolation at the crossings. Zero for an identically vanishing curve.
/// Throws std::invalid_argument when the half-maximum set touches either end
/// of the grid.
double bandwidth(std::span<const ResponsePoint> curve);

/// Uniform grid of `points` detunings on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

/// CSV with columns omega, p_abs, eta, p_loss.
void write_response_csv(std::ostream& out, std::span<const ResponsePoint> curve);

}  // namespace wgdet
