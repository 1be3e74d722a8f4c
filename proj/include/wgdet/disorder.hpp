#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wgdet/model.hpp"
#include "wgdet/scattering.hpp"

namespace wgdet {

/// How the engineered decay and probe detuning are chosen for an ensemble.
enum class Strategy {
  fixed_amc,      ///< ideal-lattice CPA point, shared by all realizations
  ensemble_mean,  ///< mean most-dissipative mode of an independent calibration ensemble
  characterized,  ///< per-realization CPA tuning to the most dissipative mode
};

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

/// Gaussian position disorder around a regular lattice. Mirror base positions
/// are (1/4 + n) * lattice, infinite-waveguide base positions n * lattice.
struct DisorderSpec {
  Geometry geometry = Geometry::mirror;
  double lattice = 1.0;
  double sigma = 0.0;
  std::size_t atoms = 1;
  std::uint64_t master_seed = 0;
  std::size_t realizations = 150;

  void validate() const;
  AtomArray base_array() const;
};

/// Independent random streams derived from one master seed.
enum class SeedStream : std::uint64_t { evaluation = 0, calibration = 1, scaling = 2 };

std::uint64_t realization_seed(std::uint64_t master_seed, SeedStream stream, std::size_t index);

/// Base lattice plus i.i.d. N(0, sigma^2) offsets. In the mirror geometry an
/// offset that would put an atom at x <= 0 is redrawn.
AtomArray sample_positions(const DisorderSpec& spec, std::size_t index, SeedStream stream = SeedStream::evaluation);

struct Tuning {
  double gamma_eng;
  double omega;
};

/// gamma_eng = N gamma_1d - gamma_free, omega = 0 (mirror lattice with a = lambda).
Tuning strategy_fixed_amc(std::size_t atoms, const Rates& rates);
/// CPA point of the most dissipative mode of the disorder-free base lattice;
/// equals strategy_fixed_amc for the mirror geometry at a = lambda.
Tuning strategy_ideal_lattice(const DisorderSpec& spec, const Rates& rates);
/// Averages (kappa_max, omega_res) over spec.realizations draws of the
/// calibration stream.
Tuning strategy_ensemble_mean(const DisorderSpec& spec, const Rates& rates, std::size_t threads = 1);
Tuning strategy_characterized(const DriftModel& model, const Rates& rates);

struct RealizationRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double p_loss = 0.0;
  double eta = 0.0;
  double p_abs = 0.0;
  double kappa_max = 0.0;
  double omega_res = 0.0;
  double gamma_eng = 0.0;
  double omega = 0.0;
};

struct EnsembleAggregates {
  double mean_p_loss = 0.0;
  double std_p_loss = 0.0;
  double mean_eta = 0.0;
  double std_eta = 0.0;
  std::size_t failures = 0;
};

/// Mean and sample standard deviation over successful records, accumulated in
/// index order.
EnsembleAggregates aggregate(std::span<const RealizationRecord> records);

struct EnsembleResult {
  DisorderSpec spec;
  Strategy strategy = Strategy::fixed_amc;
  Rates rates;
  std::vector<RealizationRecord> records;
  EnsembleAggregates aggregates;
};

struct EnsembleOptions {
  std::size_t threads = 1;
  std::size_t input_port = 0;
};

/// Detection metrics for every realization at the strategy's operating point.
/// Strategy failures are recorded per realization (ok = false), never thrown.
EnsembleResult ensemble_efficiency(const DisorderSpec& spec, const Rates& rates, Strategy strategy,
                                   const EnsembleOptions& options = {});

std::string ensemble_csv_header();
std::string ensemble_csv_row(const RealizationRecord& record);
/// {spec, strategy, aggregates, code_version}
nlohmann::json ensemble_sidecar(const EnsembleResult& result);

/// Power-law fit kappa_max ~ prefactor * N^alpha for one lattice choice.
struct ScalingFit {
  std::string label;              ///< spacing value or "random"
  std::optional<double> spacing;  ///< empty for the fully random array
  std::vector<std::size_t> atoms;
  std::vector<double> kappa_max;
  double alpha = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  ///< RMS of the log-log residuals
};

/// Least-squares line through (log N, log kappa). Needs at least four
/// strictly increasing N values and positive kappas.
ScalingFit fit_power_law(std::string label, std::optional<double> spacing, std::vector<std::size_t> atoms,
                         std::vector<double> kappa_max);

struct ScalingOptions {
  double random_lattice = 1.0;
  double random_sigma = 1.0;
  std::size_t realizations = 150;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
};

/// kappa_max versus N for each lattice spacing (std::nullopt = fully random
/// array). Ordered lattices use `sigma` as position disorder; with sigma = 0 a
/// single deterministic array is used per N, otherwise the ensemble mean.
std::vector<ScalingFit> eigenvalue_scaling(Geometry geometry, std::span<const std::optional<double>> spacings,
                                           std::span<const std::size_t> atoms, double sigma,
                                           const ScalingOptions& options = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace wgdet
