#include "wgdet/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <string>

#include "wgdet/chiral.hpp"
#include "wgdet/disorder.hpp"
#include "wgdet/levels.hpp"
#include "wgdet/model.hpp"
#include "wgdet/numerics.hpp"
#include "wgdet/scattering.hpp"

namespace wgdet {

namespace {

class Checker {
 public:
  explicit Checker(std::ostream& out) : out_(out) {}

  // `worst` is the largest observed violation measure; the check passes when it
  // does not exceed `tol`.
  void expect(const std::string& name, double worst, double tol) {
    const bool ok = std::isfinite(worst) && worst <= tol;
    char detail[64];
    std::snprintf(detail, sizeof detail, " (worst %.3g, tol %.3g)", worst, tol);
    out_ << (ok ? "PASS " : "FAIL ") << name << detail << '\n';
    failures_ += !ok;
  }

  void expect(const std::string& name, bool ok) {
    out_ << (ok ? "PASS " : "FAIL ") << name << '\n';
    failures_ += !ok;
  }

  // Runs `body`; an escaping exception counts as a failure of `name`.
  void guarded(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      out_ << "FAIL " << name << " (threw: " << e.what() << ")\n";
      ++failures_;
    }
  }

  std::size_t failures() const { return failures_; }

 private:
  std::ostream& out_;
  std::size_t failures_ = 0;
};

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(rows, cols);
  for (auto& z : m.entries()) z = {g(rng), g(rng)};
  return m;
}

AtomArray random_array(Geometry geometry, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.7);
  AtomArray a;
  a.geometry = geometry;
  double x = u(rng);
  for (std::size_t i = 0; i < n; ++i, x += u(rng)) a.positions.push_back(x);
  return a;
}

DriftModel build(const AtomArray& a) {
  return a.geometry == Geometry::mirror ? mirror_drift(a) : infinite_drift(a);
}

double unitarity_residual(const ComplexMatrix& s) {
  return (s.adjoint() * s - ComplexMatrix::identity(s.rows())).max_abs();
}

void check_numerics(Checker& c, std::mt19937_64& rng) {
  c.guarded("numerics", [&] {
    double solve = 0.0;
    double trace = 0.0;
    double svd = 0.0;
    for (std::size_t n : {1, 2, 5, 17, 40}) {
      const auto a = random_matrix(n, n, rng);
      const auto b = random_matrix(n, 3, rng);
      const auto x = linear_solve(a, b);
      solve = std::max(solve, (a * x - b).max_abs() / (1.0 + b.max_abs()));
      Complex tr = 0.0;
      for (std::size_t i = 0; i < n; ++i) tr += a(i, i);
      Complex sum = 0.0;
      for (auto z : eigenvalues(a)) sum += z;
      trace = std::max(trace, std::abs(tr - sum) / (1.0 + std::abs(tr)));
      double frob = 0.0;
      for (auto z : a.entries()) frob += std::norm(z);
      double sv2 = 0.0;
      for (double s : singular_values(a)) sv2 += s * s;
      svd = std::max(svd, std::abs(frob - sv2) / frob);
    }
    c.expect("numerics: linear_solve residual", solve, 1e-10);
    c.expect("numerics: eigenvalue sum equals trace", trace, 1e-10);
    c.expect("numerics: singular values reproduce the Frobenius norm", svd, 1e-10);

    double ode = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
      const double h = 1e-5;
      const double derivative = (dawson(x + h) - dawson(x - h)) / (2.0 * h);
      ode = std::max(ode, std::abs(derivative - (1.0 - 2.0 * x * dawson(x))));
    }
    c.expect("numerics: Dawson function solves F' = 1 - 2xF", ode, 1e-8);
  });
}

void check_model(Checker& c, std::mt19937_64& rng) {
  c.guarded("model", [&] {
    for (auto g : {Geometry::mirror, Geometry::infinite}) {
      const std::string tag = std::string(to_string(g));
      double sym = 0.0;
      double fdt = 0.0;
      double diag = 0.0;
      for (int trial = 0; trial < 40; ++trial) {
        const auto m = build(random_array(g, 1 + trial % 25, rng));
        sym = std::max(sym, symmetry_residual(m));
        fdt = std::max(fdt, fdt_residual(m));
        if (g == Geometry::infinite)
          for (std::size_t i = 0; i < m.atoms(); ++i) diag = std::max(diag, std::abs(m.drift(i, i) + 1.0));
      }
      c.expect("model[" + tag + "]: drift is complex symmetric", sym, 1e-12);
      c.expect("model[" + tag + "]: fluctuation-dissipation identity", fdt, 1e-12);
      if (g == Geometry::infinite) c.expect("model[infinite]: diagonal equals -gamma_1d", diag, 1e-12);
    }
    double translation = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      auto a = random_array(Geometry::infinite, 8, rng);
      auto shifted = a;
      const double dx = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
      for (auto& x : shifted.positions) x += dx;
      const auto s1 = smatrix(infinite_drift(a), 0.3, 0.2).s;
      const auto s2 = smatrix(infinite_drift(shifted), 0.3, 0.2).s;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
          translation = std::max(translation, std::abs(std::abs(s1(i, j)) - std::abs(s2(i, j))));
    }
    c.expect("model[infinite]: |S| invariant under translation", translation, 1e-10);
  });
}

void check_scattering(Checker& c, std::mt19937_64& rng) {
  c.guarded("scattering", [&] {
    std::uniform_real_distribution<double> w(-3.0, 3.0);
    double lossless = 0.0;
    double contraction = 0.0;
    double kappa = 0.0;
    double p_abs_range = 0.0;
    double eta_identity = 0.0;
    double equal_transmission = 0.0;
    double inverse = 0.0;
    for (auto g : {Geometry::mirror, Geometry::infinite}) {
      for (int trial = 0; trial < 30; ++trial) {
        const auto m = build(random_array(g, 1 + trial % 12, rng));
        const double omega = w(rng);
        lossless = std::max(lossless, unitarity_residual(smatrix(m, 0.0, omega).s));
        const auto s = smatrix(m, 0.5, omega).s;
        contraction = std::max(contraction, max_singular_value(s) - 1.0);
        inverse = std::max(inverse, (s * inverse_smatrix(m, 0.5, omega) - ComplexMatrix::identity(s.rows())).max_abs());
        if (g == Geometry::infinite) equal_transmission = std::max(equal_transmission, std::abs(s(0, 0) - s(1, 1)));
        for (const auto& mode : mode_spectrum(m).modes) kappa = std::max(kappa, -mode.kappa);
        Rates r{1.0, 0.3, 0.2};
        const auto d = detection_metrics(m, r, omega);
        p_abs_range = std::max({p_abs_range, -d.p_abs, d.p_abs - 1.0});
        eta_identity = std::max({eta_identity, std::abs(d.eta - d.p_abs * r.gamma_eng / r.gamma_prime()),
                                 std::abs(d.p_loss - (1.0 - d.eta))});
      }
    }
    c.expect("scattering: unitary without loss", lossless, 1e-10);
    c.expect("scattering: singular values <= 1 with loss", contraction, 1e-10);
    c.expect("scattering: S times its closed-form inverse is identity", inverse, 1e-9);
    c.expect("scattering: infinite-waveguide transmissions are equal", equal_transmission, 1e-10);
    c.expect("scattering: every mode decays (kappa >= 0)", kappa, 1e-10);
    c.expect("scattering: 0 <= p_abs <= 1", p_abs_range, 1e-9);
    c.expect("scattering: eta and p_loss identities", eta_identity, 1e-12);

    double zero = 0.0;
    for (auto g : {Geometry::mirror, Geometry::infinite}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto m = build(random_array(g, 3 + trial, rng));
        const auto t = cpa_tuning(m, Rates::from_purcell(10.0));
        zero = std::max(zero, min_singular_value(smatrix(m, t.gamma_prime, t.omega).s));
      }
    }
    c.expect("scattering: CPA tuning gives a zero singular value", zero, 1e-8);

    const std::size_t n = 20;
    const double analytic = amc_analytic_output(n, 1.0, 7.0, 0.4);
    const auto s = smatrix(mirror_drift(AtomArray::mirror_lattice(n)), 7.0, 0.4).s;
    c.expect("scattering: atomic-mirror closed form matches the matrix model", std::abs(analytic - std::norm(s(0, 0))),
             1e-12);
  });
}

void check_disorder(Checker& c, std::uint64_t seed, std::size_t threads) {
  c.guarded("disorder", [&] {
    DisorderSpec spec{Geometry::mirror, 1.0, 0.2, 12, seed, 24};
    const Rates rates = Rates::from_purcell(10.0);
    bool positive = true;
    for (std::size_t i = 0; i < 200; ++i) {
      const auto a = sample_positions(DisorderSpec{Geometry::mirror, 1.0, 1.0, 10, seed, 200}, i);
      positive = positive && std::all_of(a.positions.begin(), a.positions.end(), [](double x) { return x > 0.0; });
    }
    c.expect("disorder: mirror positions stay positive", positive);

    for (auto strategy : {Strategy::fixed_amc, Strategy::ensemble_mean, Strategy::characterized}) {
      const std::string tag = "disorder[" + std::string(to_string(strategy)) + "]: ";
      const auto serial = ensemble_efficiency(spec, rates, strategy, {1, 0});
      const auto parallel = ensemble_efficiency(spec, rates, strategy, {threads, 0});
      c.expect(tag + "record count equals realizations", serial.records.size() == spec.realizations);
      const auto again = aggregate(serial.records);
      c.expect(tag + "aggregates recomputable from records",
               std::max(std::abs(again.mean_p_loss - serial.aggregates.mean_p_loss),
                        std::abs(again.std_p_loss - serial.aggregates.std_p_loss)),
               0.0);
      bool same = serial.records.size() == parallel.records.size();
      for (std::size_t i = 0; same && i < serial.records.size(); ++i)
        same = ensemble_csv_row(serial.records[i]) == ensemble_csv_row(parallel.records[i]);
      c.expect(tag + "records independent of thread count", same);
    }

    const auto amc = ensemble_efficiency(DisorderSpec{Geometry::mirror, 1.0, 0.0, 16, seed, 3}, rates,
                                         Strategy::fixed_amc, {threads, 0});
    c.expect("disorder: sigma = 0 reproduces the ideal mirror loss", std::abs(amc.aggregates.mean_p_loss - 1.0 / 160.0),
             1e-10);
  });
}

void check_chiral(Checker& c, std::mt19937_64& rng) {
  c.guarded("chiral", [&] {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    double flux = 0.0;
    double chain = 0.0;
    double bounds = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const ChiralRates r{0.1 + u(rng), u(rng), u(rng), 0.01 + u(rng)};
      const auto s = single_atom_scattering(r);
      flux = std::max(flux, std::abs(s.t_plus * s.t_plus + s.r_plus * s.r_plus + s.absorption - 1.0));
      flux = std::max(flux, -s.absorption);
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 9);
      chain = std::max(chain, std::abs(chain_transmission(s.t_plus, n) - std::pow(s.t_plus, 2.0 * static_cast<double>(n))));
      const auto e = chiral_efficiency(r);
      bounds = std::max({bounds, -e.eta_exact, e.eta_exact - 1.0});
    }
    c.expect("chiral: |t|^2 + |r|^2 + absorption = 1", flux, 1e-12);
    c.expect("chiral: chain transmission is |t|^(2N)", chain, 1e-12);
    c.expect("chiral: 0 <= eta_exact <= 1", bounds, 1e-12);
  });
}

void check_levels(Checker& c, std::mt19937_64& rng) {
  c.guarded("levels", [&] {
    std::uniform_real_distribution<double> u(0.0, 5.0);
    double negative = 0.0;
    double law = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      DoubleLambdaParams p{u(rng), u(rng), 5.0 + u(rng), 5.0 + u(rng), 0.1 + u(rng), 0.1 + u(rng), u(rng), u(rng)};
      const auto r = effective_rates(p);
      negative = std::max({negative, -r.gamma_1d, -r.gamma_eng, -r.gamma_dephase});
      const double lorentz = 4.0 * p.delta1 * p.delta1 + (p.gamma_g + p.gamma_1e) * (p.gamma_g + p.gamma_1e);
      law = std::max(law, std::abs(r.gamma_1d * lorentz - p.gamma_g * p.omega1 * p.omega1) / (1.0 + r.gamma_1d * lorentz));
    }
    c.expect("levels: effective rates are non-negative", negative, 0.0);
    c.expect("levels: waveguide rate is the detuned Lorentzian", law, 1e-12);
    double range = 0.0;
    for (std::size_t n = 1; n <= 60; ++n)
      for (std::size_t m = 1; m <= n; ++m) {
        const auto e = nonlinearity_estimate(m, n);
        range = std::max({range, -e.p_success, e.p_success - 1.0, -e.delta_p_abs});
      }
    c.expect("levels: nonlinearity estimates stay in range", range, 0.0);
  });
}

}  // namespace

std::size_t run_selftest(std::ostream& out, std::uint64_t seed, std::size_t threads) {
  Checker c(out);
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  check_numerics(c, rng);
  check_model(c, rng);
  check_scattering(c, rng);
  check_disorder(c, seed, threads);
  check_chiral(c, rng);
  check_levels(c, rng);
  out << (c.failures() == 0 ? "selftest: all checks passed\n"
                            : "selftest: " + std::to_string(c.failures()) + " check(s) failed\n");
  return c.failures();
}

}  // namespace wgdet
