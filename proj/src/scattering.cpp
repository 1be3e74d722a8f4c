#include "wgdet/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "wgdet/io.hpp"

namespace wgdet {

namespace {

void check_operating_point(double gamma_prime, double omega) {
  if (!std::isfinite(gamma_prime) || gamma_prime < 0.0) {
    throw std::invalid_argument("gamma_prime must be finite and non-negative");
  }
  if (!std::isfinite(omega)) throw std::invalid_argument("omega must be finite");
}

// 1 + L^dagger A^{-1} L, mapping a singular A to a PoleError.
ComplexMatrix sandwich(const DriftModel& model, const ComplexMatrix& a, double scale_hint, const char* what) {
  ComplexMatrix x;
  try {
    x = linear_solve(a, model.coupling, scale_hint);
  } catch (const SingularMatrixError& e) {
    throw PoleError(std::string(what) + ": " + e.what());
  }
  ComplexMatrix s = model.coupling.adjoint() * x;
  for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) += 1.0;
  return s;
}

}  // namespace

ScatteringMatrix smatrix(const DriftModel& model, double gamma_prime, double omega) {
  check_operating_point(gamma_prime, omega);
  ComplexMatrix a = model.drift;
  const Complex shift{-0.5 * gamma_prime, omega};
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += shift;
  const double scale = std::max(model.drift.max_abs(), std::abs(shift));
  return {omega, sandwich(model, a, scale, "resolvent is singular (undamped pole)")};
}

ComplexMatrix inverse_smatrix(const DriftModel& model, double gamma_prime, double omega) {
  check_operating_point(gamma_prime, omega);
  ComplexMatrix a = model.drift.adjoint();
  const Complex shift{0.5 * gamma_prime, -omega};
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += shift;
  const double scale = std::max(model.drift.max_abs(), std::abs(shift));
  return sandwich(model, a, scale, "inverse scattering matrix has a pole (CPA point)");
}

ModeSpectrum mode_spectrum(const DriftModel& model) {
  const auto values = eigenvalues(model.drift);
  ModeSpectrum spectrum;
  spectrum.modes.reserve(values.size());
  for (const auto d : values) spectrum.modes.push_back({d, -2.0 * d.real(), -d.imag()});
  std::sort(spectrum.modes.begin(), spectrum.modes.end(), [](const Mode& a, const Mode& b) {
    if (a.kappa != b.kappa) return a.kappa > b.kappa;
    return a.omega_res < b.omega_res;
  });
  return spectrum;
}

CpaTuning cpa_tuning(const ModeSpectrum& spectrum, const Rates& rates, std::size_t mode_index) {
  rates.validate();
  if (mode_index >= spectrum.modes.size()) throw std::out_of_range("cpa_tuning: mode index out of range");
  const Mode& mode = spectrum.modes[mode_index];
  // Dark modes come out of the eigensolver with kappa at roundoff level.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * spectrum.modes.front().kappa;
  if (!(mode.kappa > rates.gamma_free) || mode.kappa <= floor) throw InsufficientDecayError(mode.kappa, rates.gamma_free);
  return {mode.kappa, mode.omega_res, mode.kappa - rates.gamma_free};
}

CpaTuning cpa_tuning(const DriftModel& model, const Rates& rates, std::size_t mode_index) {
  return cpa_tuning(mode_spectrum(model), rates, mode_index);
}

DetectionMetrics detection_metrics(const DriftModel& model, const Rates& rates, double omega, std::size_t input_port) {
  rates.validate();
  const double gamma_prime = rates.gamma_prime();
  if (!(gamma_prime > 0.0)) throw std::invalid_argument("detection_metrics requires gamma_eng + gamma_free > 0");
  if (input_port >= model.ports()) throw std::out_of_range("detection_metrics: input port out of range");
  const auto s = smatrix(model, gamma_prime, omega).s;
  double scattered = 0.0;
  for (std::size_t out = 0; out < s.rows(); ++out) scattered += std::norm(s(out, input_port));
  DetectionMetrics m;
  m.p_abs = std::max(0.0, 1.0 - scattered);
  m.eta = m.p_abs * rates.gamma_eng / gamma_prime;
  m.p_loss = 1.0 - m.eta;
  return m;
}

double amc_analytic_output(std::size_t n_atoms, double gamma_1d, double gamma_prime, double omega) {
  if (n_atoms == 0) throw std::invalid_argument("amc_analytic_output requires at least one atom");
  const double collective = static_cast<double>(n_atoms) * gamma_1d;
  const double gamma_tot = collective + gamma_prime;
  return std::norm(1.0 - collective / Complex{0.5 * gamma_tot, -omega});
}

std::vector<ResponsePoint> response_curve(const DriftModel& model, const Rates& rates,
                                          std::span<const double> omega_grid, std::size_t input_port) {
  if (!std::is_sorted(omega_grid.begin(), omega_grid.end())) {
    throw std::invalid_argument("response_curve: omega grid must be sorted ascending");
  }
  std::vector<ResponsePoint> curve;
  curve.reserve(omega_grid.size());
  for (double omega : omega_grid) {
    const auto m = detection_metrics(model, rates, omega, input_port);
    curve.push_back({omega, m.p_abs, m.eta, m.p_loss});
  }
  return curve;
}

double bandwidth(std::span<const ResponsePoint> curve) {
  if (curve.empty()) throw std::invalid_argument("bandwidth: empty curve");
  double peak = 0.0;
  for (const auto& p : curve) peak = std::max(peak, p.eta);
  if (peak <= 0.0) return 0.0;
  const double half = 0.5 * peak;
  if (curve.front().eta >= half || curve.back().eta >= half) {
    throw std::invalid_argument("bandwidth: half-maximum region is not bracketed by the omega grid");
  }
  double width = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto& a = curve[i];
    const auto& b = curve[i + 1];
    const double span = b.omega - a.omega;
    const bool a_in = a.eta >= half;
    const bool b_in = b.eta >= half;
    if (a_in && b_in) {
      width += span;
    } else if (a_in != b_in) {
      const double t = (half - a.eta) / (b.eta - a.eta);
      width += a_in ? t * span : (1.0 - t) * span;
    }
  }
  return width;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("linear_grid needs hi > lo and at least two points");
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

void write_response_csv(std::ostream& out, std::span<const ResponsePoint> curve) {
  out << "omega,p_abs,eta,p_loss\n";
  for (const auto& p : curve) {
    out << format_double(p.omega) << ',' << format_double(p.p_abs) << ',' << format_double(p.eta) << ','
        << format_double(p.p_loss) << '\n';
  }
}

}  // namespace wgdet
