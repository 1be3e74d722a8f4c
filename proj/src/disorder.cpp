#include "wgdet/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "wgdet/io.hpp"
#include "wgdet/parallel.hpp"

namespace wgdet {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::fixed_amc:
      return "fixed-amc";
    case Strategy::ensemble_mean:
      return "ensemble-mean";
    case Strategy::characterized:
      return "characterized";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
  if (name == "fixed-amc") return Strategy::fixed_amc;
  if (name == "ensemble-mean") return Strategy::ensemble_mean;
  if (name == "characterized") return Strategy::characterized;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void DisorderSpec::validate() const {
  if (!std::isfinite(sigma) || sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (!std::isfinite(lattice) || !(lattice > 0.0)) throw std::invalid_argument("lattice constant must be positive");
  if (atoms < 1) throw std::invalid_argument("atom count must be at least 1");
  if (realizations < 1) throw std::invalid_argument("n_realizations must be at least 1");
}

AtomArray DisorderSpec::base_array() const {
  AtomArray array = geometry == Geometry::mirror ? AtomArray::mirror_lattice(atoms, lattice)
                                                 : AtomArray::infinite_lattice(atoms, lattice);
  array.sigma = sigma;
  return array;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

DriftModel build_model(const AtomArray& array, const Rates& rates) {
  return array.geometry == Geometry::mirror ? mirror_drift(array, rates.gamma_1d)
                                            : infinite_drift(array, rates.gamma_1d);
}

Rates with_engineered(const Rates& rates, double gamma_eng) {
  Rates r = rates;
  r.gamma_eng = gamma_eng;
  return r;
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t master_seed, SeedStream stream, std::size_t index) {
  const std::uint64_t stream_key = splitmix64(master_seed) ^ splitmix64(0xa5a5a5a5ULL + static_cast<std::uint64_t>(stream));
  return splitmix64(stream_key + splitmix64(static_cast<std::uint64_t>(index)));
}

AtomArray sample_positions(const DisorderSpec& spec, std::size_t index, SeedStream stream) {
  spec.validate();
  AtomArray array = spec.base_array();
  if (spec.sigma == 0.0) return array;
  std::mt19937_64 rng(realization_seed(spec.master_seed, stream, index));
  std::normal_distribution<double> offset(0.0, spec.sigma);
  for (auto& x : array.positions) {
    double candidate = x + offset(rng);
    if (spec.geometry == Geometry::mirror) {
      while (candidate <= 0.0) candidate = x + offset(rng);
    }
    x = candidate;
  }
  return array;
}

Tuning strategy_fixed_amc(std::size_t atoms, const Rates& rates) {
  rates.validate();
  const double collective = static_cast<double>(atoms) * rates.gamma_1d;
  if (!(collective > rates.gamma_free)) throw InsufficientDecayError(collective, rates.gamma_free);
  return {collective - rates.gamma_free, 0.0};
}

Tuning strategy_ideal_lattice(const DisorderSpec& spec, const Rates& rates) {
  spec.validate();
  if (spec.geometry == Geometry::mirror && spec.lattice == 1.0) return strategy_fixed_amc(spec.atoms, rates);
  const auto tuning = cpa_tuning(build_model(spec.base_array(), rates), rates);
  return {tuning.gamma_eng, tuning.omega};
}

Tuning strategy_ensemble_mean(const DisorderSpec& spec, const Rates& rates, std::size_t threads) {
  spec.validate();
  rates.validate();
  if (spec.sigma == 0.0) return strategy_ideal_lattice(spec, rates);
  std::vector<Mode> top(spec.realizations);
  parallel_for(spec.realizations, threads, [&](std::size_t i) {
    const auto model = build_model(sample_positions(spec, i, SeedStream::calibration), rates);
    top[i] = mode_spectrum(model).most_dissipative();
  });
  double kappa = 0.0;
  double omega = 0.0;
  for (const auto& m : top) {
    kappa += m.kappa;
    omega += m.omega_res;
  }
  kappa /= static_cast<double>(top.size());
  omega /= static_cast<double>(top.size());
  if (!(kappa > rates.gamma_free)) throw InsufficientDecayError(kappa, rates.gamma_free);
  return {kappa - rates.gamma_free, omega};
}

Tuning strategy_characterized(const DriftModel& model, const Rates& rates) {
  const auto tuning = cpa_tuning(model, rates);
  return {tuning.gamma_eng, tuning.omega};
}

EnsembleAggregates aggregate(std::span<const RealizationRecord> records) {
  EnsembleAggregates agg;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (!r.ok) {
      ++agg.failures;
      continue;
    }
    ++n;
    agg.mean_p_loss += r.p_loss;
    agg.mean_eta += r.eta;
  }
  if (n == 0) {
    agg.mean_p_loss = agg.mean_eta = agg.std_p_loss = agg.std_eta = std::numeric_limits<double>::quiet_NaN();
    return agg;
  }
  agg.mean_p_loss /= static_cast<double>(n);
  agg.mean_eta /= static_cast<double>(n);
  if (n > 1) {
    double ss_loss = 0.0;
    double ss_eta = 0.0;
    for (const auto& r : records) {
      if (!r.ok) continue;
      ss_loss += (r.p_loss - agg.mean_p_loss) * (r.p_loss - agg.mean_p_loss);
      ss_eta += (r.eta - agg.mean_eta) * (r.eta - agg.mean_eta);
    }
    agg.std_p_loss = std::sqrt(ss_loss / static_cast<double>(n - 1));
    agg.std_eta = std::sqrt(ss_eta / static_cast<double>(n - 1));
  }
  return agg;
}

EnsembleResult ensemble_efficiency(const DisorderSpec& spec, const Rates& rates, Strategy strategy,
                                   const EnsembleOptions& options) {
  spec.validate();
  rates.validate();
  EnsembleResult result{spec, strategy, rates, std::vector<RealizationRecord>(spec.realizations), {}};

  std::optional<Tuning> shared;
  std::string shared_error;
  if (strategy != Strategy::characterized) {
    try {
      shared = strategy == Strategy::fixed_amc ? strategy_ideal_lattice(spec, rates)
                                               : strategy_ensemble_mean(spec, rates, options.threads);
    } catch (const std::exception& e) {
      shared_error = e.what();
    }
  }

  parallel_for(spec.realizations, options.threads, [&](std::size_t i) {
    RealizationRecord& rec = result.records[i];
    rec.index = i;
    rec.seed = realization_seed(spec.master_seed, SeedStream::evaluation, i);
    try {
      const auto model = build_model(sample_positions(spec, i), rates);
      const auto spectrum = mode_spectrum(model);
      rec.kappa_max = spectrum.most_dissipative().kappa;
      rec.omega_res = spectrum.most_dissipative().omega_res;
      Tuning tuning{};
      if (strategy == Strategy::characterized) {
        const auto t = cpa_tuning(spectrum, rates);
        tuning = {t.gamma_eng, t.omega};
      } else if (shared) {
        tuning = *shared;
      } else {
        throw std::runtime_error(shared_error);
      }
      rec.gamma_eng = tuning.gamma_eng;
      rec.omega = tuning.omega;
      const auto m = detection_metrics(model, with_engineered(rates, tuning.gamma_eng), tuning.omega,
                                       options.input_port);
      rec.p_abs = m.p_abs;
      rec.eta = m.eta;
      rec.p_loss = m.p_loss;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.p_abs = rec.eta = rec.p_loss = std::numeric_limits<double>::quiet_NaN();
    }
  });
  result.aggregates = aggregate(result.records);
  return result;
}

std::string ensemble_csv_header() { return "realization,seed,status,p_loss,eta,p_abs,kappa_max,omega_res,gamma_eng,omega"; }

std::string ensemble_csv_row(const RealizationRecord& r) {
  std::string row = std::to_string(r.index) + ',' + std::to_string(r.seed) + ',' + (r.ok ? "ok" : "failed");
  for (double v : {r.p_loss, r.eta, r.p_abs, r.kappa_max, r.omega_res, r.gamma_eng, r.omega}) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

nlohmann::json ensemble_sidecar(const EnsembleResult& result) {
  const auto& s = result.spec;
  const auto& a = result.aggregates;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  auto failed = nlohmann::json::array();
  for (const auto& r : result.records)
    if (!r.ok) failed.push_back({{"realization", r.index}, {"error", r.error}});
  return {{"spec",
           {{"geometry", std::string(to_string(s.geometry))},
            {"lattice", s.lattice},
            {"sigma", s.sigma},
            {"atoms", s.atoms},
            {"master_seed", s.master_seed},
            {"n_realizations", s.realizations}}},
          {"strategy", std::string(to_string(result.strategy))},
          {"rates", {{"gamma_1d", result.rates.gamma_1d}, {"gamma_free", result.rates.gamma_free}}},
          {"aggregates",
           {{"mean_p_loss", num(a.mean_p_loss)},
            {"std_p_loss", num(a.std_p_loss)},
            {"mean_eta", num(a.mean_eta)},
            {"std_eta", num(a.std_eta)},
            {"failures", a.failures}}},
          {"failed_realizations", failed},
          {"code_version", std::string(library_version())}};
}

ScalingFit fit_power_law(std::string label, std::optional<double> spacing, std::vector<std::size_t> atoms,
                         std::vector<double> kappa_max) {
  if (atoms.size() != kappa_max.size()) throw FitError("fit_power_law: size mismatch");
  if (atoms.size() < 4) throw FitError("fit_power_law needs at least four atom counts");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i] == 0 || (i > 0 && atoms[i] <= atoms[i - 1])) {
      throw FitError("fit_power_law: atom counts must be positive and strictly increasing");
    }
    if (!(kappa_max[i] > 0.0) || !std::isfinite(kappa_max[i])) throw FitError("fit_power_law: kappa must be positive");
  }
  const std::size_t n = atoms.size();
  double mx = 0.0;
  double my = 0.0;
  std::vector<double> lx(n);
  std::vector<double> ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(static_cast<double>(atoms[i]));
    ly[i] = std::log(kappa_max[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("fit_power_law: degenerate abscissae");
  ScalingFit fit{std::move(label), spacing, std::move(atoms), std::move(kappa_max), 0.0, 0.0, 0.0};
  fit.alpha = sxy / sxx;
  const double intercept = my - fit.alpha * mx;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + fit.alpha * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::vector<ScalingFit> eigenvalue_scaling(Geometry geometry, std::span<const std::optional<double>> spacings,
                                           std::span<const std::size_t> atoms, double sigma,
                                           const ScalingOptions& options) {
  if (atoms.size() < 4) throw FitError("eigenvalue_scaling needs at least four atom counts");
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (atoms[i] <= atoms[i - 1]) throw FitError("eigenvalue_scaling: atom counts must be strictly increasing");
  }
  const Rates rates{};
  std::vector<ScalingFit> fits;
  for (const auto& spacing : spacings) {
    std::vector<double> kappas;
    for (std::size_t n : atoms) {
      DisorderSpec spec;
      spec.geometry = geometry;
      spec.atoms = n;
      spec.master_seed = options.master_seed;
      if (spacing) {
        spec.lattice = *spacing;
        spec.sigma = sigma;
      } else {
        spec.lattice = options.random_lattice;
        spec.sigma = options.random_sigma;
      }
      spec.realizations = spec.sigma == 0.0 ? 1 : options.realizations;
      std::vector<double> top(spec.realizations);
      parallel_for(spec.realizations, options.threads, [&](std::size_t i) {
        top[i] = mode_spectrum(build_model(sample_positions(spec, i, SeedStream::scaling), rates))
                     .most_dissipative()
                     .kappa;
      });
      kappas.push_back(std::accumulate(top.begin(), top.end(), 0.0) / static_cast<double>(top.size()));
    }
    std::string label = spacing ? format_double(*spacing) : std::string("random");
    fits.push_back(fit_power_law(std::move(label), spacing, {atoms.begin(), atoms.end()}, std::move(kappas)));
  }
  return fits;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs two equal-length series");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace wgdet
