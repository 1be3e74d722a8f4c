#pragma once

#include <cstddef>

namespace wgdet {

/// Drive and decay parameters of the double-Lambda scheme that realises both
/// the waveguide coupling (first Raman leg) and the engineered decay (second
/// leg). All rates share one frequency unit.
struct DoubleLambdaParams {
  double omega1 = 0.0;  ///< Rabi frequency, first leg
  double omega2 = 0.0;  ///< Rabi frequency, second leg
  double delta1 = 0.0;
  double delta2 = 0.0;
  double gamma_g = 1.0;   ///< f1 -> g
  double gamma_s = 1.0;   ///< f2 -> s
  double gamma_1e = 0.0;  ///< parasitic f1 -> e
  double gamma_2e = 0.0;  ///< parasitic f2 -> e

  void validate() const;
};

/// Rates of the adiabatically eliminated jump operators (|amplitude|^2). Only
/// meaningful for |delta| >> omega; that regime is not checked here.
struct EffectiveRates {
  double gamma_1d;
  double gamma_eng;
  double gamma_dephase;
};

EffectiveRates effective_rates(const DoubleLambdaParams& p);

struct ValidityReport {
  double parasitic_ratio;   ///< gamma_2e / gamma_s
  double collective_ratio;  ///< gamma_1d_eff / gamma_eng_eff
  double threshold;
  bool parasitic_ok;
  bool collective_ok;

  bool ok() const noexcept { return parasitic_ok && collective_ok; }
};

/// A ratio passes when it is strictly below `threshold`.
ValidityReport validity_flags(const DoubleLambdaParams& p, double threshold = 0.1);

struct NonlinearityEstimate {
  double delta_p_abs;  ///< m^2 / (4 N^2)
  double p_success;    ///< 1 - (2m^3 - 3m^2 + m) / (24 N^2), clamped to [0, 1]
  bool perturbative;   ///< false when the clamp was needed
};

NonlinearityEstimate nonlinearity_estimate(std::size_t photons, std::size_t atoms);

}  // namespace wgdet
