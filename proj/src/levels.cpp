#include "wgdet/levels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace wgdet {

void DoubleLambdaParams::validate() const {
  for (double v : {omega1, omega2, delta1, delta2, gamma_g, gamma_s, gamma_1e, gamma_2e}) {
    if (!std::isfinite(v)) throw std::invalid_argument("double-Lambda parameters must be finite");
  }
  if (!(gamma_g > 0.0) || !(gamma_s > 0.0)) throw std::invalid_argument("gamma_g and gamma_s must be positive");
  if (gamma_1e < 0.0 || gamma_2e < 0.0) throw std::invalid_argument("parasitic decays must be non-negative");
}

EffectiveRates effective_rates(const DoubleLambdaParams& p) {
  p.validate();
  using C = std::complex<double>;
  const C denom1{2.0 * p.delta1, -(p.gamma_g + p.gamma_1e)};
  const C denom2{2.0 * p.delta2, -(p.gamma_s + p.gamma_2e)};
  const C amp_g = std::sqrt(p.gamma_g) * p.omega1 / denom1;
  const C amp_s = std::sqrt(p.gamma_s) * p.omega2 / denom2;
  const C amp_ee = std::sqrt(p.gamma_1e) * p.omega1 / denom1 + std::sqrt(p.gamma_2e) * p.omega2 / denom2;
  return {std::norm(amp_g), std::norm(amp_s), std::norm(amp_ee)};
}

ValidityReport validity_flags(const DoubleLambdaParams& p, double threshold) {
  const auto rates = effective_rates(p);
  ValidityReport report{};
  report.threshold = threshold;
  report.parasitic_ratio = p.gamma_2e / p.gamma_s;
  report.collective_ratio = rates.gamma_eng > 0.0 ? rates.gamma_1d / rates.gamma_eng
                                                  : std::numeric_limits<double>::infinity();
  report.parasitic_ok = report.parasitic_ratio < threshold;
  report.collective_ok = report.collective_ratio < threshold;
  return report;
}

NonlinearityEstimate nonlinearity_estimate(std::size_t photons, std::size_t atoms) {
  if (photons < 1) throw std::invalid_argument("nonlinearity_estimate requires at least one photon");
  if (photons > atoms) throw std::invalid_argument("nonlinearity_estimate requires photons <= atoms");
  const double m = static_cast<double>(photons);
  const double n2 = static_cast<double>(atoms) * static_cast<double>(atoms);
  const double raw = 1.0 - (2.0 * m * m * m - 3.0 * m * m + m) / (24.0 * n2);
  NonlinearityEstimate out{};
  out.delta_p_abs = m * m / (4.0 * n2);
  out.p_success = std::clamp(raw, 0.0, 1.0);
  out.perturbative = raw >= 0.0 && raw <= 1.0;
  return out;
}

}  // namespace wgdet
