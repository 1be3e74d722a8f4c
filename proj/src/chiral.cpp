#include "wgdet/chiral.hpp"

#include <cmath>
#include <stdexcept>

namespace wgdet {

void ChiralRates::validate() const {
  for (double r : {gamma_plus, gamma_minus, gamma_eng, gamma_free}) {
    if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("chiral rates must be finite and non-negative");
  }
  if (!(gamma_plus > 0.0)) throw std::invalid_argument("gamma_plus must be positive");
}

ChiralScattering single_atom_scattering(const ChiralRates& rates) {
  rates.validate();
  const double total = rates.gamma_plus + rates.gamma_minus + rates.gamma_prime();
  if (!(total > 0.0)) throw std::invalid_argument("single_atom_scattering: all rates vanish");
  ChiralScattering out{};
  out.beta_plus = rates.gamma_plus / total;
  out.beta_minus = rates.gamma_minus / total;
  out.t_plus = 1.0 - 2.0 * out.beta_plus;
  out.r_plus = -2.0 * std::sqrt(out.beta_plus * out.beta_minus);
  out.absorption = 1.0 - out.t_plus * out.t_plus - out.r_plus * out.r_plus;
  return out;
}

double absorption_reduced_form(const ChiralRates& rates) {
  const auto s = single_atom_scattering(rates);
  return 4.0 * s.beta_plus * (1.0 - s.beta_minus);
}

double chain_transmission(double t_plus, std::size_t n_atoms) {
  if (!(std::abs(t_plus) <= 1.0)) throw std::invalid_argument("chain_transmission requires |t| <= 1");
  return std::pow(t_plus * t_plus, static_cast<double>(n_atoms));
}

ChiralEfficiency chiral_efficiency(const ChiralRates& rates) {
  rates.validate();
  const double gamma_prime = rates.gamma_prime();
  if (!(gamma_prime > 0.0)) throw std::invalid_argument("chiral_efficiency requires gamma' > 0");
  const auto s = single_atom_scattering(rates);
  const double reflected = s.r_plus * s.r_plus;
  const double p_detect = s.absorption * rates.gamma_eng / gamma_prime;
  const double p_loss = reflected + s.absorption * rates.gamma_free / gamma_prime;
  if (!(p_detect + p_loss > 0.0)) throw std::invalid_argument("chiral_efficiency: emitter does not interact");
  ChiralEfficiency out{};
  out.eta_exact = p_detect / (p_detect + p_loss);
  out.eta_first_order =
      (rates.gamma_eng / gamma_prime) * (1.0 - rates.gamma_minus / (rates.gamma_plus + gamma_prime));
  return out;
}

}  // namespace wgdet
