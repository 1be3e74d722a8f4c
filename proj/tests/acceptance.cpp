// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are pinned
// here; `--only N` runs a single criterion, `--wgdet PATH` names the CLI binary
// used by the end-to-end determinism check.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "wgdet/chiral.hpp"
#include "wgdet/disorder.hpp"
#include "wgdet/io.hpp"
#include "wgdet/model.hpp"
#include "wgdet/numerics.hpp"
#include "wgdet/scattering.hpp"

using namespace wgdet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

double max_deviation(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).max_abs(); }

std::string wgdet_binary;

Outcome amc_closed_form() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = 20;
  Rates r = Rates::from_purcell(10.0);
  r.gamma_eng = strategy_fixed_amc(n, r).gamma_eng;
  const double gp = r.gamma_prime();
  const double closed = 1.0 - (1.0 - amc_analytic_output(n, 1.0, gp, 0.0)) * r.gamma_eng / gp;
  const double matrix = detection_metrics(mirror_drift(AtomArray::mirror_lattice(n)), r, 0.0).p_loss;
  const double target = 5.0e-3;
  const double rel = std::max(std::abs(closed - target), std::abs(matrix - target)) / target;
  const double t = seconds_since(start);
  return {rel <= 1e-12 && t < 1.0,
          "p_loss closed form " + format_double(closed) + ", matrix " + format_double(matrix) + ", rel err " + g(rel) +
              " (tol 1e-12), " + g(t) + " s (limit 1 s)"};
}

Outcome infinite_half_matrix() {
  const auto start = std::chrono::steady_clock::now();
  const ComplexMatrix target{{0.5, -0.5}, {-0.5, 0.5}};
  double worst = 0.0;
  double worst_cpa = 0.0;
  std::string sample;
  for (std::size_t n : {2, 10, 40}) {
    const auto model = infinite_drift(AtomArray::infinite_lattice(n, 1.0));
    const auto s = smatrix(model, static_cast<double>(n), 0.0).s;
    worst = std::max(worst, max_deviation(s, target));
    if (n == 10) sample = "S(N=10) = [[" + g(s(0, 0).real()) + ", " + g(s(0, 1).real()) + "], [" + g(s(1, 0).real()) + ", " + g(s(1, 1).real()) + "]]";
    worst_cpa = std::max(worst_cpa, max_deviation(smatrix(model, 2.0 * static_cast<double>(n), 0.0).s, target));
  }
  const double t = seconds_since(start);
  std::cout << "INFO AC02 at gamma' = 2N gamma_1d (the CPA point) the deviation is " << g(worst_cpa) << '\n';
  return {worst <= 1e-10 && t < 1.0,
          "gamma' = N gamma_1d: max |S - 1/2[[1,-1],[-1,1]]| = " + g(worst) + " (tol 1e-10); " + sample + ", " + g(t) +
              " s"};
}

Outcome amc_equivalence() {
  double worst = 0.0;
  for (std::size_t n : {1, 5, 25}) {
    const auto model = mirror_drift(AtomArray::mirror_lattice(n));
    const double span = 5.0 * static_cast<double>(n);
    for (double gp : {0.1, static_cast<double>(n)}) {
      for (double w : linear_grid(-span, span, 1001)) {
        const double matrix = std::norm(smatrix(model, gp, w).s(0, 0));
        worst = std::max(worst, std::abs(matrix - amc_analytic_output(n, 1.0, gp, w)));
      }
    }
  }
  return {worst <= 1e-10, "max ||S|^2 - closed form| = " + g(worst) + " over 1001 points, N in {1,5,25}, gamma' in {0.1, N} (tol 1e-10)"};
}

Outcome cpa_zero_witness() {
  const auto start = std::chrono::steady_clock::now();
  const DisorderSpec spec{Geometry::mirror, 1.0, 0.2, 30, 2024, 100};
  const Rates rates = Rates::from_purcell(10.0);
  double worst = 0.0;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < spec.realizations; ++i) {
    const auto model = mirror_drift(sample_positions(spec, i));
    try {
      const auto t = cpa_tuning(model, rates);
      worst = std::max(worst, min_singular_value(smatrix(model, t.gamma_prime, t.omega).s));
    } catch (const std::exception&) {
      ++failures;
    }
  }
  const double t = seconds_since(start);
  return {failures == 0 && worst < 1e-6 && t < 30.0,
          "worst min singular value " + g(worst) + " over 100 arrays (tol 1e-6), " + std::to_string(failures) +
              " tuning failures, " + g(t) + " s (limit 30 s)"};
}

Outcome identity_suite() {
  std::mt19937_64 rng(5);
  double inverse = 0.0;
  double unitary = 0.0;
  double fdt = 0.0;
  std::size_t models = 0;
  std::uniform_real_distribution<double> w(-4.0, 4.0);
  std::uniform_real_distribution<double> loss(0.05, 3.0);
  for (auto geometry : {Geometry::mirror, Geometry::infinite}) {
    for (std::size_t trial = 0; trial < 120; ++trial, ++models) {
      const auto model = testing::random_model(geometry, 1 + trial % 40, rng);
      const double omega = w(rng);
      const double gp = loss(rng);
      const auto s = smatrix(model, gp, omega).s;
      inverse = std::max(inverse, max_deviation(inverse_smatrix(model, gp, omega) * s, ComplexMatrix::identity(s.rows())));
      const auto s0 = smatrix(model, 0.0, omega).s;
      unitary = std::max(unitary, max_deviation(s0.adjoint() * s0, ComplexMatrix::identity(s0.rows())));
      fdt = std::max(fdt, fdt_residual(model));
    }
  }
  return {inverse <= 1e-8 && unitary <= 1e-10 && fdt <= 1e-12,
          std::to_string(models) + " models: S^-1 S - I " + g(inverse) + " (tol 1e-8), lossless S^dag S - I " +
              g(unitary) + " (tol 1e-10), D + D^dag + L L^dag " + g(fdt) + " (tol 1e-12)"};
}

Outcome amc_bandwidth() {
  double worst = 0.0;
  std::string values;
  for (std::size_t n : {1, 10, 50}) {
    Rates r = Rates::from_purcell(10.0);
    r.gamma_eng = strategy_fixed_amc(n, r).gamma_eng;
    const double span = 5.0 * static_cast<double>(n);
    const auto curve = response_curve(mirror_drift(AtomArray::mirror_lattice(n)), r, linear_grid(-span, span, 4001));
    const double width = bandwidth(curve);
    const double rel = std::abs(width / (2.0 * static_cast<double>(n)) - 1.0);
    worst = std::max(worst, rel);
    values += (values.empty() ? "" : ", ") + std::string("N=") + std::to_string(n) + ": " + g(width);
  }
  return {worst <= 0.01, "FWHM " + values + "; worst relative deviation from 2N " + g(worst) + " (tol 0.01)"};
}

struct Curve {
  std::vector<double> mean;
  std::vector<double> std;
};

Curve ensemble_curve(double sigma, Strategy strategy, const std::vector<std::size_t>& atoms) {
  Curve c;
  for (auto n : atoms) {
    const DisorderSpec spec{Geometry::mirror, 1.0, sigma, n, 0, 150};
    const auto r = ensemble_efficiency(spec, Rates::from_purcell(10.0), strategy, {0, 0});
    c.mean.push_back(r.aggregates.mean_p_loss);
    c.std.push_back(r.aggregates.std_p_loss);
  }
  return c;
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + g(x);
  return out;
}

Outcome disorder_trends() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::size_t> atoms{10, 25, 50, 100, 200};
  std::vector<double> n_values(atoms.begin(), atoms.end());

  const auto a = ensemble_curve(0.01, Strategy::fixed_amc, atoms);
  bool decreasing = true;
  for (std::size_t i = 1; i < a.mean.size(); ++i) decreasing = decreasing && a.mean[i] < a.mean[i - 1];
  const double rho_a = spearman(n_values, a.mean);
  const bool pass_a = decreasing && rho_a <= -0.9;

  const auto b_fixed = ensemble_curve(0.2, Strategy::fixed_amc, atoms);
  const auto b_mean = ensemble_curve(0.2, Strategy::ensemble_mean, atoms);
  const double gain = b_fixed.mean[3] - b_fixed.mean[4];
  const double rho_b = spearman(n_values, b_mean.mean);
  const bool pass_b = gain <= b_fixed.std[4] && rho_b <= -0.9;

  const auto c_char = ensemble_curve(1.0, Strategy::characterized, atoms);
  const auto c_mean = ensemble_curve(1.0, Strategy::ensemble_mean, atoms);
  bool pass_c = true;
  for (std::size_t i = 0; i < atoms.size(); ++i) pass_c = pass_c && c_char.mean[i] <= c_mean.mean[i];

  const double t = seconds_since(start);
  std::cout << "INFO AC07 (a) sigma=0.01 fixed-amc mean p_loss: " << list(a.mean) << '\n'
            << "INFO AC07 (b) sigma=0.2 fixed-amc: " << list(b_fixed.mean) << "; ensemble-mean: " << list(b_mean.mean)
            << '\n'
            << "INFO AC07 (c) sigma=1 characterized: " << list(c_char.mean) << "; ensemble-mean: " << list(c_mean.mean)
            << '\n';
  return {pass_a && pass_b && pass_c && t < 600.0,
          std::string("(a) ") + (pass_a ? "ok" : "violated") + ", Spearman " + g(rho_a) + "; (b) " +
              (pass_b ? "ok" : "violated") + ", fixed-amc gain 100->200 " + g(gain) + " vs std " + g(b_fixed.std[4]) +
              ", ensemble-mean Spearman " + g(rho_b) + "; (c) " + (pass_c ? "ok" : "violated") + "; " + g(t) +
              " s (limit 600 s)"};
}

Outcome infinite_behaviour() {
  const Rates rates = Rates::from_purcell(10.0);
  auto p_abs_at_cpa = [&](std::size_t n, double a) {
    const auto model = infinite_drift(AtomArray::infinite_lattice(n, a));
    Rates r = rates;
    const auto t = cpa_tuning(model, rates);
    r.gamma_eng = t.gamma_eng;
    return detection_metrics(model, r, t.omega).p_abs;
  };
  std::vector<double> quarter;
  double half_dev = 0.0;
  for (std::size_t n : {5, 10, 20, 40}) {
    quarter.push_back(p_abs_at_cpa(n, 0.25));
    half_dev = std::max(half_dev, std::abs(p_abs_at_cpa(n, 1.0) - 0.5));
  }
  bool increasing = true;
  for (std::size_t i = 1; i < quarter.size(); ++i) increasing = increasing && quarter[i] > quarter[i - 1];
  const std::vector<std::optional<double>> spacing{1.0};
  const std::vector<std::size_t> atoms{10, 20, 40, 80, 160};
  const auto fit = eigenvalue_scaling(Geometry::mirror, spacing, atoms, 0.0).front();
  const bool pass = increasing && quarter.back() > 0.99 && quarter.back() <= 1.0 && half_dev <= 1e-9 &&
                    std::abs(fit.alpha - 1.0) <= 0.01;
  return {pass, "a=lambda/4 p_abs " + list(quarter) + " (increasing, > 0.99 at N=40); a=lambda |p_abs - 0.5| " +
                    g(half_dev) + " (tol 1e-9); mirror AMC alpha " + format_double(fit.alpha) + " (1 +- 0.01)"};
}

Outcome chiral_consistency() {
  const std::vector<double> ratios{0.01, 0.02, 0.04, 0.08};
  std::vector<double> lx;
  std::vector<double> ly;
  for (double r : ratios) {
    const auto e = chiral_efficiency({1.0, r, 0.9, 0.1});
    lx.push_back(std::log(r));
    ly.push_back(std::log(std::abs(e.eta_exact - e.eta_first_order)));
  }
  const double slope = least_squares_slope(lx, ly);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  double flux = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = single_atom_scattering({0.05 + u(rng), u(rng), u(rng), 0.01 + u(rng)});
    flux = std::max(flux, std::abs(s.t_plus * s.t_plus + s.r_plus * s.r_plus + s.absorption - 1.0));
  }
  const bool slope_ok = std::abs(slope - 2.0) <= 0.2;
  return {slope_ok && flux <= 1e-12, "log-log slope of |eta_exact - eta_first_order| " + g(slope) +
                                          " (target 2.0 +- 0.2); flux residual " + g(flux) + " (tol 1e-12)"};
}

double dawson_quadrature(double x) {
  if (x == 0.0) return 0.0;
  auto f = [x](double t) { return std::exp((t - x) * (t + x)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, x, 15, 1e-15);
}

Outcome thermal_average() {
  double coupling = 0.0;
  for (double s : {0.1, 0.5, 1.0, 2.0}) {
    coupling = std::max(coupling, std::abs(thermal_offdiagonal(1.0, s) - testing::thermal_pair_quadrature(1.0, s)));
  }
  double daw = 0.0;
  for (double x = -5.0; x <= 5.0 + 1e-12; x += 0.01) daw = std::max(daw, std::abs(dawson(x) - dawson_quadrature(x)));
  return {coupling <= 1e-4 && daw <= 1e-10, "off-diagonal vs 2D Gauss-Hermite " + g(coupling) + " (tol 1e-4); dawson vs quadrature " +
                                                g(daw) + " on [-5, 5] (tol 1e-10)"};
}

Outcome end_to_end_determinism() {
  if (wgdet_binary.empty()) return {false, "no --wgdet binary given"};
  const auto root = std::filesystem::temp_directory_path() / "wgdet_acceptance_determinism";
  std::filesystem::remove_all(root);
  std::vector<std::string> outputs;
  for (const char* run : {"first", "second"}) {
    const auto dir = root / run;
    const std::string cmd = "\"" + wgdet_binary + "\" fig2a --seed 0 --no-plot --out \"" + dir.string() + "\" > \"" +
                            (root.string() + "_" + run + ".log") + "\" 2>&1";
    std::filesystem::create_directories(root);
    const int status = std::system(cmd.c_str());
    if (status != 0) return {false, std::string("wgdet fig2a exited with status ") + std::to_string(status)};
    outputs.push_back(read_text_file(dir / "results.csv"));
  }
  const bool same = outputs[0] == outputs[1];
  return {same && !outputs[0].empty(), "fig2a results.csv: " + std::to_string(outputs[0].size()) + " and " +
                                           std::to_string(outputs[1].size()) + " bytes, " +
                                           (same ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (arg == "--wgdet" && i + 1 < argc) {
      wgdet_binary = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N] [--wgdet PATH]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "atomic-mirror closed form", amc_closed_form},
      {2, "infinite lattice scattering matrix", infinite_half_matrix},
      {3, "closed-form reflection equivalence", amc_equivalence},
      {4, "CPA zero witness", cpa_zero_witness},
      {5, "identity suite", identity_suite},
      {6, "atomic-mirror bandwidth", amc_bandwidth},
      {7, "disorder trends", disorder_trends},
      {8, "infinite-waveguide behaviour", infinite_behaviour},
      {9, "chiral consistency", chiral_consistency},
      {10, "thermal averaging", thermal_average},
      {11, "end-to-end determinism", end_to_end_determinism},
  };

  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    char tag[8];
    std::snprintf(tag, sizeof tag, "AC%02d", c.id);
    std::cout << (o.pass ? "PASS " : "FAIL ") << tag << ' ' << c.name << ": " << o.detail << std::endl;
    failures += !o.pass;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
