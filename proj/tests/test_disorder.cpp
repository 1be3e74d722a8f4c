#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wgdet/disorder.hpp"
#include "wgdet/errors.hpp"

using namespace wgdet;

namespace {

DisorderSpec make_spec(Geometry g, std::size_t n, double sigma, std::size_t realizations, std::uint64_t seed = 1,
                       double lattice = 1.0) {
  DisorderSpec s;
  s.geometry = g;
  s.atoms = n;
  s.sigma = sigma;
  s.realizations = realizations;
  s.master_seed = seed;
  s.lattice = lattice;
  return s;
}

bool same_records(const EnsembleResult& a, const EnsembleResult& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (ensemble_csv_row(a.records[i]) != ensemble_csv_row(b.records[i])) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("disorder") {
  TEST_CASE("sampling: zero width gives the base lattice") {
    const auto spec = make_spec(Geometry::mirror, 7, 0.0, 3);
    CHECK(sample_positions(spec, 2).positions == AtomArray::mirror_lattice(7).positions);
    const auto inf = make_spec(Geometry::infinite, 4, 0.0, 3, 1, 0.25);
    CHECK(sample_positions(inf, 0).positions == AtomArray::infinite_lattice(4, 0.25).positions);
  }

  TEST_CASE("sampling: pooled offsets have the requested width") {
    const auto spec = make_spec(Geometry::infinite, 100, 0.2, 100, 99);
    const auto base = spec.base_array();
    double sum = 0.0;
    double sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < spec.realizations; ++r) {
      const auto a = sample_positions(spec, r);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double y = a.positions[i] - base.positions[i];
        sum += y;
        sum2 += y * y;
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    const double sd = std::sqrt(sum2 / static_cast<double>(count) - mean * mean);
    CHECK(sd == doctest::Approx(0.2).epsilon(0.02));
    CHECK(std::abs(mean) < 0.01);
  }

  TEST_CASE("sampling: deterministic per (seed, index) and distinct across streams") {
    const auto spec = make_spec(Geometry::mirror, 12, 0.3, 5, 42);
    CHECK(sample_positions(spec, 3).positions == sample_positions(spec, 3).positions);
    CHECK(sample_positions(spec, 3).positions != sample_positions(spec, 4).positions);
    CHECK(sample_positions(spec, 3).positions != sample_positions(spec, 3, SeedStream::calibration).positions);
    auto other = spec;
    other.master_seed = 43;
    CHECK(sample_positions(spec, 3).positions != sample_positions(other, 3).positions);
    CHECK(realization_seed(42, SeedStream::evaluation, 0) != realization_seed(42, SeedStream::scaling, 0));
  }

  TEST_CASE("sampling: mirror positions stay in front of the mirror") {
    const auto spec = make_spec(Geometry::mirror, 30, 2.0, 20, 5);
    for (std::size_t r = 0; r < spec.realizations; ++r)
      for (double x : sample_positions(spec, r).positions) CHECK(x > 0.0);
  }

  TEST_CASE("fixed atomic-mirror strategy") {
    const auto t = strategy_fixed_amc(20, Rates::from_purcell(10.0));
    CHECK(t.gamma_eng == doctest::Approx(19.9).epsilon(1e-14));
    CHECK(t.omega == 0.0);
    CHECK(strategy_fixed_amc(1, Rates::from_purcell(10.0)).gamma_eng == doctest::Approx(0.9).epsilon(1e-14));
    CHECK_THROWS_AS(strategy_fixed_amc(1, Rates::from_purcell(0.5)), InsufficientDecayError);
  }

  TEST_CASE("without disorder every strategy coincides with the fixed tuning") {
    const Rates rates = Rates::from_purcell(10.0);
    const auto spec = make_spec(Geometry::mirror, 20, 0.0, 4);
    const auto fixed = strategy_fixed_amc(20, rates);
    const auto mean = strategy_ensemble_mean(spec, rates);
    CHECK(mean.gamma_eng == fixed.gamma_eng);
    CHECK(mean.omega == fixed.omega);
    const auto charac = strategy_characterized(mirror_drift(spec.base_array()), rates);
    CHECK(charac.gamma_eng == doctest::Approx(fixed.gamma_eng).epsilon(1e-12));
    CHECK(std::abs(charac.omega) < 1e-12);

    for (auto strategy : {Strategy::fixed_amc, Strategy::ensemble_mean, Strategy::characterized}) {
      const auto r = ensemble_efficiency(spec, rates, strategy);
      CHECK(r.aggregates.mean_p_loss == doctest::Approx(0.005).epsilon(1e-10));
      CHECK(r.aggregates.std_p_loss < 1e-12);
      CHECK(r.aggregates.failures == 0);
    }
  }

  TEST_CASE("ideal-lattice tuning for the infinite waveguide is the base-lattice CPA point") {
    const auto spec = make_spec(Geometry::infinite, 8, 0.0, 1, 1, 1.0);
    const auto t = strategy_ideal_lattice(spec, Rates{});
    CHECK(t.gamma_eng == doctest::Approx(16.0).epsilon(1e-10));
  }

  TEST_CASE("ensemble-mean calibration is statistically reproducible") {
    const Rates rates = Rates::from_purcell(10.0);
    auto spec = make_spec(Geometry::mirror, 50, 0.2, 60, 1);
    const auto a = strategy_ensemble_mean(spec, rates);
    spec.master_seed = 2;
    const auto b = strategy_ensemble_mean(spec, rates);
    // Spread of kappa_max over the calibration draws of the first seed.
    spec.master_seed = 1;
    std::vector<double> kappas;
    for (std::size_t i = 0; i < spec.realizations; ++i)
      kappas.push_back(mode_spectrum(mirror_drift(sample_positions(spec, i, SeedStream::calibration)))
                           .most_dissipative()
                           .kappa);
    double mean = 0.0;
    for (double k : kappas) mean += k;
    mean /= static_cast<double>(kappas.size());
    CHECK(a.gamma_eng + rates.gamma_free == doctest::Approx(mean).epsilon(1e-12));
    double var = 0.0;
    for (double k : kappas) var += (k - mean) * (k - mean);
    const double stderr_ = std::sqrt(var / static_cast<double>(kappas.size() - 1) / static_cast<double>(kappas.size()));
    CHECK(std::abs(a.gamma_eng - b.gamma_eng) <= 3.0 * std::sqrt(2.0) * stderr_);
  }

  TEST_CASE("ensemble-mean rate grows with N for fully random arrays") {
    const Rates rates = Rates::from_purcell(10.0);
    double last = 0.0;
    for (std::size_t n : {25u, 50u, 100u}) {
      const auto t = strategy_ensemble_mean(make_spec(Geometry::mirror, n, 1.0, 30, 3), rates);
      CHECK(t.gamma_eng > last);
      last = t.gamma_eng;
    }
  }

  TEST_CASE("characterized tuning puts a zero on every realization") {
    const Rates rates = Rates::from_purcell(10.0);
    const auto spec = make_spec(Geometry::mirror, 30, 0.2, 15, 8);
    for (std::size_t i = 0; i < spec.realizations; ++i) {
      const auto model = mirror_drift(sample_positions(spec, i));
      const auto t = strategy_characterized(model, rates);
      CHECK(min_singular_value(smatrix(model, t.gamma_eng + rates.gamma_free, t.omega).s) < 1e-6);
    }
  }

  TEST_CASE("characterized tuning beats the ensemble mean on random arrays") {
    const Rates rates = Rates::from_purcell(10.0);
    const auto spec = make_spec(Geometry::mirror, 40, 1.0, 30, 4);
    const auto c = ensemble_efficiency(spec, rates, Strategy::characterized);
    const auto m = ensemble_efficiency(spec, rates, Strategy::ensemble_mean);
    CHECK(c.aggregates.mean_p_loss <= m.aggregates.mean_p_loss);
  }

  TEST_CASE("ensemble records are deterministic and thread-count independent") {
    const Rates rates = Rates::from_purcell(10.0);
    const auto spec = make_spec(Geometry::mirror, 25, 0.2, 12, 77);
    for (auto strategy : {Strategy::fixed_amc, Strategy::ensemble_mean, Strategy::characterized}) {
      const auto serial = ensemble_efficiency(spec, rates, strategy, {1, 0});
      const auto again = ensemble_efficiency(spec, rates, strategy, {1, 0});
      const auto parallel = ensemble_efficiency(spec, rates, strategy, {4, 0});
      CHECK(same_records(serial, again));
      CHECK(same_records(serial, parallel));
      CHECK(serial.aggregates.mean_p_loss == parallel.aggregates.mean_p_loss);
      CHECK(serial.records.size() == spec.realizations);
    }
  }

  TEST_CASE("aggregates are recomputable from records and skip failures") {
    std::vector<RealizationRecord> recs(4);
    const double losses[] = {0.1, 0.3, 0.2, 0.0};
    for (std::size_t i = 0; i < 4; ++i) {
      recs[i].ok = i != 3;
      recs[i].p_loss = losses[i];
      recs[i].eta = 1.0 - losses[i];
    }
    const auto a = aggregate(recs);
    CHECK(a.failures == 1);
    CHECK(a.mean_p_loss == doctest::Approx(0.2));
    CHECK(a.std_p_loss == doctest::Approx(0.1));
    CHECK(a.mean_eta == doctest::Approx(0.8));
  }

  TEST_CASE("strategy failures are recorded per realization") {
    // Purcell factor 0.01 makes gamma_free exceed every collective rate.
    const auto spec = make_spec(Geometry::mirror, 3, 0.2, 4, 9);
    for (auto strategy : {Strategy::fixed_amc, Strategy::characterized}) {
      const auto r = ensemble_efficiency(spec, Rates::from_purcell(0.01), strategy);
      CHECK(r.aggregates.failures == 4);
      CHECK_FALSE(r.records[0].ok);
      CHECK_FALSE(r.records[0].error.empty());
      CHECK(ensemble_csv_row(r.records[0]).find(",failed,") != std::string::npos);
    }
  }

  TEST_CASE("CSV and sidecar layout") {
    const auto spec = make_spec(Geometry::mirror, 5, 0.0, 2, 3);
    const auto r = ensemble_efficiency(spec, Rates::from_purcell(10.0), Strategy::fixed_amc);
    CHECK(ensemble_csv_header() == "realization,seed,status,p_loss,eta,p_abs,kappa_max,omega_res,gamma_eng,omega");
    const auto row = ensemble_csv_row(r.records[1]);
    CHECK(row.rfind("1,", 0) == 0);
    CHECK(row.find(",ok,") != std::string::npos);
    const auto side = ensemble_sidecar(r);
    CHECK(side.at("strategy") == "fixed-amc");
    CHECK(side.at("spec").at("atoms") == 5);
    CHECK(side.at("aggregates").at("failures") == 0);
    CHECK(side.contains("code_version"));
  }

  TEST_CASE("power-law fit") {
    SUBCASE("exact power law") {
      const auto f = fit_power_law("x", 1.0, {10, 20, 40, 80}, {30.0, 60.0, 120.0, 240.0});
      CHECK(f.alpha == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(f.residual < 1e-12);
    }
    SUBCASE("errors") {
      CHECK_THROWS_AS(fit_power_law("x", {}, {10}, {1.0}), FitError);
      CHECK_THROWS_AS(fit_power_law("x", {}, {10, 20, 20, 40}, {1.0, 2.0, 3.0, 4.0}), FitError);
      CHECK_THROWS_AS(fit_power_law("x", {}, {10, 20, 30, 40}, {1.0, 0.0, 3.0, 4.0}), FitError);
    }
  }

  TEST_CASE("eigenvalue scaling") {
    const std::vector<std::size_t> atoms{10, 20, 40, 80};
    SUBCASE("atomic-mirror lattice scales linearly") {
      const std::vector<std::optional<double>> spacings{1.0};
      const auto fits = eigenvalue_scaling(Geometry::mirror, spacings, atoms, 0.0);
      REQUIRE(fits.size() == 1);
      CHECK(fits[0].alpha == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(fits[0].label == "1");
    }
    SUBCASE("generic arrays scale alike and slower than the mirror lattice") {
      const std::vector<std::optional<double>> spacings{1.0, 0.25, std::nullopt};
      ScalingOptions options;
      options.realizations = 20;
      const auto fits = eigenvalue_scaling(Geometry::infinite, spacings, atoms, 0.0, options);
      REQUIRE(fits.size() == 3);
      const double amc = fits[0].alpha;
      const double quarter = fits[1].alpha;
      const double random = fits[2].alpha;
      CHECK(amc == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(fits[2].label == "random");
      CHECK(std::abs(quarter - random) < 0.5 * std::abs(amc - random));
    }
    SUBCASE("single atom count is rejected") {
      const std::vector<std::optional<double>> spacings{1.0};
      const std::vector<std::size_t> one{10};
      CHECK_THROWS_AS(eigenvalue_scaling(Geometry::mirror, spacings, one, 0.0), FitError);
    }
  }

  TEST_CASE("spearman rank correlation") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> down{9, 7, 5, 3, 1};
    const std::vector<double> tied{1, 1, 2, 2, 3};
    CHECK(spearman(x, x) == doctest::Approx(1.0));
    CHECK(spearman(x, down) == doctest::Approx(-1.0));
    CHECK(spearman(x, tied) == doctest::Approx(0.9486832980505138));  // Pearson of ranks with ties averaged
    CHECK_THROWS_AS(spearman(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
  }

  TEST_CASE("infinite waveguide at CPA: lattice constant decides one-sided absorption") {
    double last = 0.0;
    for (std::size_t n : {5u, 10u, 20u}) {
      const auto amc = infinite_drift(AtomArray::infinite_lattice(n, 1.0));
      const auto ta = cpa_tuning(amc, Rates{});
      CHECK(std::abs(detection_metrics(amc, Rates{1.0, ta.gamma_eng, 0.0}, ta.omega).p_abs - 0.5) < 1e-9);

      const auto quarter = infinite_drift(AtomArray::infinite_lattice(n, 0.25));
      const auto tq = cpa_tuning(quarter, Rates{});
      const double p = detection_metrics(quarter, Rates{1.0, tq.gamma_eng, 0.0}, tq.omega).p_abs;
      CHECK(p > last);
      last = p;
    }
  }

  TEST_CASE("DisorderSpec validation") {
    auto s = make_spec(Geometry::mirror, 0, 0.1, 1);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = make_spec(Geometry::mirror, 3, -0.1, 1);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = make_spec(Geometry::mirror, 3, 0.1, 0);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    CHECK(strategy_from_string("ensemble-mean") == Strategy::ensemble_mean);
    CHECK_THROWS_AS(strategy_from_string("best"), std::invalid_argument);
  }
}
