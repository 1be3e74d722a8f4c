#pragma once

#include <cstddef>

namespace wgdet {

/// Directional couplings of a single emitter in a chiral waveguide plus its
/// local loss channels.
struct ChiralRates {
  double gamma_plus = 1.0;
  double gamma_minus = 0.0;
  double gamma_eng = 0.0;
  double gamma_free = 0.0;

  double gamma_prime() const noexcept { return gamma_eng + gamma_free; }
  void validate() const;
};

/// On-resonance single-atom response for a right-moving input.
struct ChiralScattering {
  double beta_plus;
  double beta_minus;
  double t_plus;
  double r_plus;
  double absorption;  ///< 1 - |t_+|^2 - |r_+|^2
};

ChiralScattering single_atom_scattering(const ChiralRates& rates);

/// Closed form 4 beta_+ (1 - beta_-) that drops the beta_+^2 term of the
/// flux-conserving absorption. It is the form under which the first-order
/// efficiency below is consistent to second order; kept for comparison.
double absorption_reduced_form(const ChiralRates& rates);

/// |t|^(2N): probability that a photon passes N emitters.
double chain_transmission(double t_plus, std::size_t n_atoms);

struct ChiralEfficiency {
  double eta_exact;        ///< p_detect / (p_detect + p_loss) with per-atom probabilities
  double eta_first_order;  ///< (gamma_eng / gamma') (1 - gamma_- / (gamma_+ + gamma'))
};

ChiralEfficiency chiral_efficiency(const ChiralRates& rates);

}  // namespace wgdet
