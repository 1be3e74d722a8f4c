#include "wgdet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "wgdet/chiral.hpp"
#include "wgdet/io.hpp"
#include "wgdet/parallel.hpp"
#include "wgdet/plot.hpp"
#include "wgdet/scattering.hpp"

namespace wgdet {

using nlohmann::json;

ConfigError::ConfigError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

namespace {

constexpr std::string_view kExperiments[] = {"fig2a",         "fig2b",        "fig2c",         "infinite-scan",
                                             "eigen-scaling", "chiral-sweep", "levels-report", "amc-analytic"};

const std::set<std::string> kTopKeys{"experiment",   "geometry",   "atoms",      "sigmas",  "purcell",
                                     "strategies",   "realizations", "master_seed", "lattice", "spacings",
                                     "modes",        "omega_grid", "gamma_ratios", "gamma_eng", "levels",
                                     "output_dir",   "threads",    "plot"};
const std::set<std::string> kGridKeys{"half_width_factor", "points"};
const std::set<std::string> kLevelsKeys{"omega1", "omega2",   "delta1",    "delta2",  "gamma_g", "gamma_s",
                                        "gamma_1e", "gamma_2e", "threshold", "photons", "atoms"};

bool uses_ensembles(std::string_view e) { return e == "fig2a" || e == "fig2b" || e == "infinite-scan"; }

// Key path of the offending value plus a message; mapped to a line by the parser.
struct Issue {
  std::vector<std::string> path;
  std::string message;
};

std::optional<Issue> check(const RunConfig& c) {
  auto issue = [](std::vector<std::string> path, std::string msg) { return std::optional<Issue>{{std::move(path), std::move(msg)}}; };
  const std::string_view e = c.experiment;
  if (std::find(std::begin(kExperiments), std::end(kExperiments), e) == std::end(kExperiments)) {
    return issue({"experiment"}, "unknown experiment '" + c.experiment + "'");
  }
  const bool needs_atoms = e != "chiral-sweep" && e != "levels-report";
  if (needs_atoms && c.atoms.empty()) return issue({"atoms"}, "atoms must be a non-empty list");
  for (auto n : c.atoms)
    if (n < 1) return issue({"atoms"}, "atom counts must be at least 1");
  if (e == "eigen-scaling") {
    if (c.atoms.size() < 4) return issue({"atoms"}, "eigen-scaling needs at least four atom counts");
    for (std::size_t i = 1; i < c.atoms.size(); ++i)
      if (c.atoms[i] <= c.atoms[i - 1]) return issue({"atoms"}, "atom counts must be strictly increasing");
  }
  const bool needs_sigma = uses_ensembles(e) || e == "fig2c" || e == "eigen-scaling";
  if (needs_sigma && c.sigmas.empty()) return issue({"sigmas"}, "sigmas must be a non-empty list");
  for (double s : c.sigmas)
    if (!std::isfinite(s) || s < 0.0) return issue({"sigmas"}, "sigmas must be finite and non-negative");
  if (!std::isfinite(c.purcell) || !(c.purcell > 0.0)) return issue({"purcell"}, "purcell must be positive");
  if (uses_ensembles(e) && c.strategies.empty()) return issue({"strategies"}, "strategies must be a non-empty list");
  if (c.realizations < 1) return issue({"realizations"}, "realizations must be at least 1");
  if (!std::isfinite(c.lattice) || !(c.lattice > 0.0)) return issue({"lattice"}, "lattice must be positive");
  if ((e == "infinite-scan" || e == "eigen-scaling") && c.spacings.empty()) {
    return issue({"spacings"}, "spacings must be a non-empty list");
  }
  for (const auto& s : c.spacings) {
    if (s && (!std::isfinite(*s) || !(*s > 0.0))) return issue({"spacings"}, "spacings must be positive or null");
    if (!s && e != "eigen-scaling") return issue({"spacings"}, "null (fully random) spacing is only valid for eigen-scaling");
  }
  if (e == "fig2c" && c.modes.empty()) return issue({"modes"}, "modes must be a non-empty list");
  if (c.omega_grid.points < 11) return issue({"omega_grid", "points"}, "omega_grid.points must be at least 11");
  if (!std::isfinite(c.omega_grid.half_width_factor) || !(c.omega_grid.half_width_factor > 0.0)) {
    return issue({"omega_grid", "half_width_factor"}, "omega_grid.half_width_factor must be positive");
  }
  if (e == "chiral-sweep" && c.gamma_ratios.empty()) return issue({"gamma_ratios"}, "gamma_ratios must be a non-empty list");
  for (double r : c.gamma_ratios)
    if (!std::isfinite(r) || r < 0.0) return issue({"gamma_ratios"}, "gamma_ratios must be non-negative");
  if (c.gamma_eng && (!std::isfinite(*c.gamma_eng) || *c.gamma_eng < 0.0)) {
    return issue({"gamma_eng"}, "gamma_eng must be non-negative");
  }
  try {
    c.levels.params.validate();
  } catch (const std::exception& ex) {
    return issue({"levels"}, ex.what());
  }
  if (!std::isfinite(c.levels.threshold) || !(c.levels.threshold > 0.0)) {
    return issue({"levels", "threshold"}, "threshold must be positive");
  }
  if (e == "levels-report") {
    if (c.levels.photons.empty()) return issue({"levels", "photons"}, "photons must be a non-empty list");
    if (c.levels.atoms.empty()) return issue({"levels", "atoms"}, "atoms must be a non-empty list");
  }
  for (auto m : c.levels.photons)
    if (m < 1) return issue({"levels", "photons"}, "photon counts must be at least 1");
  for (auto n : c.levels.atoms)
    if (n < 1) return issue({"levels", "atoms"}, "atom counts must be at least 1");
  if (c.output_dir.empty()) return issue({"output_dir"}, "output_dir must not be empty");
  return std::nullopt;
}

// 1-based line of the key path, searching each key after its parent.
std::size_t line_of(std::string_view text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& key : path) {
    const std::string quoted = "\"" + key + "\"";
    std::size_t found = std::string_view::npos;
    for (std::size_t at = text.find(quoted, pos); at != std::string_view::npos; at = text.find(quoted, at + 1)) {
      std::size_t after = at + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') {
        found = at;
        break;
      }
    }
    if (found == std::string_view::npos) return 0;
    pos = found;
  }
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n')) + 1;
}

class Reader {
 public:
  Reader(std::string source, std::string_view text) : source_(std::move(source)), text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
    std::string dotted;
    for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
    throw ConfigError(source_, line_of(text_, path), "'" + dotted + "': " + message);
  }

  void known_keys(const json& obj, const std::set<std::string>& keys, const std::vector<std::string>& parent) const {
    for (const auto& [k, v] : obj.items()) {
      if (!keys.count(k)) {
        auto path = parent;
        path.push_back(k);
        fail(path, "unknown key");
      }
    }
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const json& v, const std::vector<std::string>& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(path, "expected a non-negative integer");
  }

  std::string string(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  const json& array(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }

  std::vector<std::size_t> counts(const json& v, const std::vector<std::string>& path) const {
    std::vector<std::size_t> out;
    for (const auto& x : array(v, path)) out.push_back(static_cast<std::size_t>(count(x, path)));
    return out;
  }

  std::vector<double> numbers(const json& v, const std::vector<std::string>& path) const {
    std::vector<double> out;
    for (const auto& x : array(v, path)) out.push_back(number(x, path));
    return out;
  }

 private:
  std::string source_;
  std::string_view text_;
};

}  // namespace

std::span<const std::string_view> experiment_names() { return kExperiments; }

RunConfig default_config(std::string_view experiment) {
  RunConfig c;
  c.experiment = std::string(experiment);
  c.output_dir = std::filesystem::path("out") / c.experiment;
  if (experiment == "fig2a") {
    c.atoms = {10, 25, 50, 100, 200};
    c.sigmas = {0.01, 0.08, 0.2};
    c.strategies = {Strategy::fixed_amc};
  } else if (experiment == "fig2b") {
    c.atoms = {10, 25, 50, 100, 200};
    c.sigmas = {0.2, 1.0};
    c.strategies = {Strategy::fixed_amc, Strategy::ensemble_mean, Strategy::characterized};
  } else if (experiment == "fig2c") {
    c.atoms = {10, 25, 50, 100};
    c.sigmas = {0.2};
    c.modes = {0, 1, 2, 3};
  } else if (experiment == "infinite-scan") {
    c.geometry = Geometry::infinite;
    c.atoms = {5, 10, 20, 40};
    c.sigmas = {0.0, 0.05};
    c.spacings = {1.0, 0.25};
    c.strategies = {Strategy::characterized};
  } else if (experiment == "eigen-scaling") {
    c.geometry = Geometry::infinite;
    c.atoms = {10, 20, 40, 80, 160};
    c.sigmas = {0.0};
    c.spacings = {1.0, 0.25, 0.1, std::nullopt};
  } else if (experiment == "chiral-sweep") {
    c.gamma_ratios = {0.01, 0.02, 0.04, 0.08};
  } else if (experiment == "levels-report") {
  } else if (experiment == "amc-analytic") {
    c.atoms = {20};
  } else {
    throw ConfigError("<defaults>", 0, "unknown experiment '" + std::string(experiment) + "'");
  }
  return c;
}

void validate_config(const RunConfig& config) {
  if (auto issue = check(config)) {
    std::string dotted;
    for (const auto& k : issue->path) dotted += (dotted.empty() ? "" : ".") + k;
    throw ConfigError("<config>", 0, "'" + dotted + "': " + issue->message);
  }
}

RunConfig parse_config(std::string_view text, std::string_view source_name, std::optional<std::string_view> experiment) {
  const std::string source(source_name);
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte > 0 ? byte - 1 : 0), '\n')) + 1;
    throw ConfigError(source, line, std::string("malformed JSON: ") + e.what());
  }
  const Reader r(source, text);
  if (!doc.is_object()) throw ConfigError(source, 1, "configuration must be a JSON object");
  r.known_keys(doc, kTopKeys, {});

  std::string name;
  if (doc.contains("experiment")) name = r.string(doc["experiment"], {"experiment"});
  if (experiment) {
    if (!name.empty() && name != *experiment) {
      r.fail({"experiment"}, "config is for '" + name + "' but the command runs '" + std::string(*experiment) + "'");
    }
    name = std::string(*experiment);
  }
  if (name.empty()) throw ConfigError(source, 1, "'experiment': required key is missing");
  if (std::find(std::begin(kExperiments), std::end(kExperiments), name) == std::end(kExperiments)) {
    r.fail({"experiment"}, "unknown experiment '" + name + "'");
  }
  RunConfig c = default_config(name);

  if (doc.contains("geometry")) {
    try {
      c.geometry = geometry_from_string(r.string(doc["geometry"], {"geometry"}));
    } catch (const std::invalid_argument& e) {
      r.fail({"geometry"}, e.what());
    }
  }
  if (doc.contains("atoms")) c.atoms = r.counts(doc["atoms"], {"atoms"});
  if (doc.contains("sigmas")) c.sigmas = r.numbers(doc["sigmas"], {"sigmas"});
  if (doc.contains("purcell")) c.purcell = r.number(doc["purcell"], {"purcell"});
  if (doc.contains("strategies")) {
    c.strategies.clear();
    for (const auto& s : r.array(doc["strategies"], {"strategies"})) {
      try {
        c.strategies.push_back(strategy_from_string(r.string(s, {"strategies"})));
      } catch (const std::invalid_argument& e) {
        r.fail({"strategies"}, e.what());
      }
    }
  }
  if (doc.contains("realizations")) c.realizations = static_cast<std::size_t>(r.count(doc["realizations"], {"realizations"}));
  if (doc.contains("master_seed")) c.master_seed = r.count(doc["master_seed"], {"master_seed"});
  if (doc.contains("lattice")) c.lattice = r.number(doc["lattice"], {"lattice"});
  if (doc.contains("spacings")) {
    c.spacings.clear();
    for (const auto& s : r.array(doc["spacings"], {"spacings"})) {
      if (s.is_null()) {
        c.spacings.push_back(std::nullopt);
      } else {
        c.spacings.push_back(r.number(s, {"spacings"}));
      }
    }
  }
  if (doc.contains("modes")) c.modes = r.counts(doc["modes"], {"modes"});
  if (doc.contains("omega_grid")) {
    const auto& g = doc["omega_grid"];
    if (!g.is_object()) r.fail({"omega_grid"}, "expected an object");
    r.known_keys(g, kGridKeys, {"omega_grid"});
    if (g.contains("points")) c.omega_grid.points = static_cast<std::size_t>(r.count(g["points"], {"omega_grid", "points"}));
    if (g.contains("half_width_factor")) {
      c.omega_grid.half_width_factor = r.number(g["half_width_factor"], {"omega_grid", "half_width_factor"});
    }
  }
  if (doc.contains("gamma_ratios")) c.gamma_ratios = r.numbers(doc["gamma_ratios"], {"gamma_ratios"});
  if (doc.contains("gamma_eng")) {
    c.gamma_eng = doc["gamma_eng"].is_null() ? std::nullopt : std::optional<double>(r.number(doc["gamma_eng"], {"gamma_eng"}));
  }
  if (doc.contains("levels")) {
    const auto& l = doc["levels"];
    if (!l.is_object()) r.fail({"levels"}, "expected an object");
    r.known_keys(l, kLevelsKeys, {"levels"});
    auto& p = c.levels.params;
    const std::pair<const char*, double*> fields[] = {{"omega1", &p.omega1},     {"omega2", &p.omega2},
                                                       {"delta1", &p.delta1},     {"delta2", &p.delta2},
                                                       {"gamma_g", &p.gamma_g},   {"gamma_s", &p.gamma_s},
                                                       {"gamma_1e", &p.gamma_1e}, {"gamma_2e", &p.gamma_2e},
                                                       {"threshold", &c.levels.threshold}};
    for (const auto& [key, target] : fields)
      if (l.contains(key)) *target = r.number(l[key], {"levels", key});
    if (l.contains("photons")) c.levels.photons = r.counts(l["photons"], {"levels", "photons"});
    if (l.contains("atoms")) c.levels.atoms = r.counts(l["atoms"], {"levels", "atoms"});
  }
  if (doc.contains("output_dir")) c.output_dir = r.string(doc["output_dir"], {"output_dir"});
  if (doc.contains("threads")) c.threads = static_cast<std::size_t>(r.count(doc["threads"], {"threads"}));
  if (doc.contains("plot")) {
    if (!doc["plot"].is_boolean()) r.fail({"plot"}, "expected true or false");
    c.plot = doc["plot"].get<bool>();
  }

  if (auto issue = check(c)) r.fail(issue->path, issue->message);
  return c;
}

json config_to_json(const RunConfig& c) {
  json spacings = json::array();
  for (const auto& s : c.spacings) spacings.push_back(s ? json(*s) : json(nullptr));
  json strategies = json::array();
  for (auto s : c.strategies) strategies.push_back(std::string(to_string(s)));
  const auto& p = c.levels.params;
  return {{"experiment", c.experiment},
          {"geometry", std::string(to_string(c.geometry))},
          {"atoms", c.atoms},
          {"sigmas", c.sigmas},
          {"purcell", c.purcell},
          {"strategies", strategies},
          {"realizations", c.realizations},
          {"master_seed", c.master_seed},
          {"lattice", c.lattice},
          {"spacings", spacings},
          {"modes", c.modes},
          {"omega_grid", {{"half_width_factor", c.omega_grid.half_width_factor}, {"points", c.omega_grid.points}}},
          {"gamma_ratios", c.gamma_ratios},
          {"gamma_eng", c.gamma_eng ? json(*c.gamma_eng) : json(nullptr)},
          {"levels",
           {{"omega1", p.omega1},
            {"omega2", p.omega2},
            {"delta1", p.delta1},
            {"delta2", p.delta2},
            {"gamma_g", p.gamma_g},
            {"gamma_s", p.gamma_s},
            {"gamma_1e", p.gamma_1e},
            {"gamma_2e", p.gamma_2e},
            {"threshold", c.levels.threshold},
            {"photons", c.levels.photons},
            {"atoms", c.levels.atoms}}},
          {"output_dir", c.output_dir.generic_string()},
          {"threads", c.threads},
          {"plot", c.plot}};
}

namespace {

struct Stats {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

Stats stats(const std::vector<double>& values) {
  Stats s;
  double sum = 0.0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++s.count;
    }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  s.std = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

std::string csv_join(std::initializer_list<std::string> fields) {
  std::string row;
  for (const auto& f : fields) {
    if (!row.empty()) row += ',';
    row += f;
  }
  return row + '\n';
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string sigma_label(double sigma) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sigma=%g", sigma);
  return buf;
}

// Output sink shared by the experiment runners.
struct Outputs {
  std::filesystem::path dir;
  RunSummary summary;
  json extra = json::object();
  std::optional<PlotSpec> plot;

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir / name, content);
    summary.files.push_back(dir / name);
  }
};

void band_from(PlotSeries& s, const Stats& st) {
  s.y.push_back(st.mean);
  s.lower.push_back(st.mean - st.std);
  s.upper.push_back(st.mean + st.std);
}

void run_ensembles(const RunConfig& c, Outputs& out, std::ostream& log) {
  const Rates rates = Rates::from_purcell(c.purcell);
  const bool scan = c.experiment == "infinite-scan";
  const std::vector<std::optional<double>> lattices = scan ? c.spacings : std::vector<std::optional<double>>{c.lattice};

  std::string results = scan ? "spacing," : "";
  results += "sigma,strategy,atoms," + ensemble_csv_header() + '\n';
  std::string summary = scan ? "spacing," : "";
  summary += "sigma,strategy,atoms,mean_p_loss,std_p_loss,mean_eta,std_eta,mean_p_abs,std_p_abs,failures\n";
  json sidecars = json::array();
  PlotSpec plot{scan ? "Absorption at CPA, right-moving input" : "Photon loss on resonance", "atoms N",
                scan ? "p_abs" : "p_loss = 1 - eta", true, !scan, {}};

  for (const auto& lattice : lattices) {
    for (double sigma : c.sigmas) {
      for (auto strategy : c.strategies) {
        PlotSeries series;
        series.label = (scan ? "a=" + format_double(*lattice) + " " : std::string()) + sigma_label(sigma) + " " +
                       std::string(to_string(strategy));
        for (auto n : c.atoms) {
          DisorderSpec spec{c.geometry, *lattice, sigma, n, c.master_seed, c.realizations};
          const auto result = ensemble_efficiency(spec, rates, strategy, {c.threads, 0});
          const std::string prefix = (scan ? num(*lattice) + "," : std::string()) + num(sigma) + "," +
                                     std::string(to_string(strategy)) + "," + num(n) + ",";
          std::vector<double> p_abs;
          for (const auto& rec : result.records) {
            results += prefix + ensemble_csv_row(rec) + '\n';
            p_abs.push_back(rec.p_abs);
          }
          const auto& a = result.aggregates;
          const auto abs_stats = stats(p_abs);
          summary += prefix + num(a.mean_p_loss) + "," + num(a.std_p_loss) + "," + num(a.mean_eta) + "," +
                     num(a.std_eta) + "," + num(abs_stats.mean) + "," + num(abs_stats.std) + "," + num(a.failures) + '\n';
          out.summary.failed_realizations += a.failures;
          auto side = ensemble_sidecar(result);
          sidecars.push_back(side);
          series.x.push_back(static_cast<double>(n));
          band_from(series, scan ? abs_stats : Stats{a.mean_p_loss, a.std_p_loss, 0});
          log << c.experiment << ' ' << series.label << " N=" << n << ": mean p_loss " << num(a.mean_p_loss)
              << " (std " << num(a.std_p_loss) << ", " << a.failures << " failed)\n";
        }
        plot.series.push_back(std::move(series));
      }
    }
  }
  out.write("results.csv", results);
  out.write("summary.csv", summary);
  out.extra["ensembles"] = sidecars;
  out.plot = std::move(plot);
}

struct ModeRecord {
  bool ok = false;
  bool bracketed = false;
  double p_loss = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double omega_res = std::numeric_limits<double>::quiet_NaN();
  double bandwidth = std::numeric_limits<double>::quiet_NaN();
};

void run_mode_sweep(const RunConfig& c, Outputs& out, std::ostream& log) {
  const Rates rates = Rates::from_purcell(c.purcell);
  std::string results = "sigma,atoms,mode,realization,seed,status,p_loss,eta,kappa,omega_res,bandwidth\n";
  std::string summary = "sigma,atoms,mode,mean_p_loss,std_p_loss,mean_bandwidth,std_bandwidth,failures,unbracketed\n";
  PlotSpec plot{"Loss when tuning to the k-th most dissipative mode", "atoms N", "p_loss = 1 - eta", true, true, {}};
  std::map<std::pair<double, std::size_t>, PlotSeries> series;

  for (double sigma : c.sigmas) {
    for (auto n : c.atoms) {
      DisorderSpec spec{c.geometry, c.lattice, sigma, n, c.master_seed, c.realizations};
      std::vector<std::vector<ModeRecord>> recs(c.realizations, std::vector<ModeRecord>(c.modes.size()));
      parallel_for(c.realizations, c.threads, [&](std::size_t i) {
        const auto array = sample_positions(spec, i);
        const auto model = c.geometry == Geometry::mirror ? mirror_drift(array) : infinite_drift(array);
        const auto spectrum = mode_spectrum(model);
        for (std::size_t k = 0; k < c.modes.size(); ++k) {
          ModeRecord& r = recs[i][k];
          try {
            const auto t = cpa_tuning(spectrum, rates, c.modes[k]);
            Rates tuned = rates;
            tuned.gamma_eng = t.gamma_eng;
            const auto m = detection_metrics(model, tuned, t.omega);
            r.ok = true;
            r.p_loss = m.p_loss;
            r.eta = m.eta;
            r.kappa = t.gamma_prime;
            r.omega_res = t.omega;
            const double half = c.omega_grid.half_width_factor * t.gamma_prime;
            const auto grid = linear_grid(t.omega - half, t.omega + half, c.omega_grid.points);
            try {
              r.bandwidth = bandwidth(response_curve(model, tuned, grid));
              r.bracketed = true;
            } catch (const std::invalid_argument&) {
            }
          } catch (const std::exception&) {
            r.ok = false;
          }
        }
      });
      for (std::size_t k = 0; k < c.modes.size(); ++k) {
        std::vector<double> losses;
        std::vector<double> widths;
        std::size_t failures = 0;
        std::size_t unbracketed = 0;
        for (std::size_t i = 0; i < c.realizations; ++i) {
          const auto& r = recs[i][k];
          const std::string status = !r.ok ? "failed" : (r.bracketed ? "ok" : "unbracketed");
          failures += !r.ok;
          unbracketed += r.ok && !r.bracketed;
          losses.push_back(r.p_loss);
          widths.push_back(r.bandwidth);
          results += csv_join({num(sigma), num(n), num(c.modes[k]), num(i),
                               std::to_string(realization_seed(c.master_seed, SeedStream::evaluation, i)), status,
                               num(r.p_loss), num(r.eta), num(r.kappa), num(r.omega_res), num(r.bandwidth)});
        }
        const auto ls = stats(losses);
        const auto ws = stats(widths);
        summary += csv_join({num(sigma), num(n), num(c.modes[k]), num(ls.mean), num(ls.std), num(ws.mean), num(ws.std),
                             num(failures), num(unbracketed)});
        out.summary.failed_realizations += failures;
        auto& s = series[{sigma, c.modes[k]}];
        s.label = sigma_label(sigma) + " mode " + std::to_string(c.modes[k]);
        s.x.push_back(static_cast<double>(n));
        band_from(s, ls);
        log << "fig2c " << s.label << " N=" << n << ": mean p_loss " << num(ls.mean) << ", mean bandwidth "
            << num(ws.mean) << '\n';
      }
    }
  }
  for (auto& [key, s] : series) plot.series.push_back(std::move(s));
  out.write("results.csv", results);
  out.write("summary.csv", summary);
  out.plot = std::move(plot);
}

void run_scaling(const RunConfig& c, Outputs& out, std::ostream& log) {
  ScalingOptions options;
  options.realizations = c.realizations;
  options.master_seed = c.master_seed;
  options.threads = c.threads;
  std::string results = "label,sigma,atoms,kappa_max\n";
  std::string summary = "label,sigma,alpha,prefactor,residual\n";
  PlotSpec plot{"Largest collective decay rate", "atoms N", "kappa_max / gamma_1d", true, true, {}};
  for (double sigma : c.sigmas) {
    const auto fits = eigenvalue_scaling(c.geometry, c.spacings, c.atoms, sigma, options);
    for (const auto& f : fits) {
      PlotSeries s{(f.spacing ? "a=" + f.label : f.label) + " " + sigma_label(sigma), {}, {}, {}, {}};
      for (std::size_t i = 0; i < f.atoms.size(); ++i) {
        results += csv_join({f.label, num(sigma), num(f.atoms[i]), num(f.kappa_max[i])});
        s.x.push_back(static_cast<double>(f.atoms[i]));
        s.y.push_back(f.kappa_max[i]);
      }
      summary += csv_join({f.label, num(sigma), num(f.alpha), num(f.prefactor), num(f.residual)});
      log << "eigen-scaling " << s.label << ": alpha " << num(f.alpha) << '\n';
      plot.series.push_back(std::move(s));
    }
  }
  out.write("results.csv", results);
  out.write("summary.csv", summary);
  out.plot = std::move(plot);
}

void run_chiral(const RunConfig& c, Outputs& out, std::ostream& log) {
  const double gamma_free = 1.0 / c.purcell;
  const double gamma_eng = c.gamma_eng.value_or(std::max(0.0, 1.0 - gamma_free));
  std::string results = "gamma_ratio,eta_exact,eta_first_order,abs_difference,absorption,reflection\n";
  PlotSeries gap{"|eta_exact - eta_first_order|", {}, {}, {}, {}};
  std::vector<double> lx;
  std::vector<double> ly;
  for (double ratio : c.gamma_ratios) {
    const ChiralRates r{1.0, ratio, gamma_eng, gamma_free};
    const auto e = chiral_efficiency(r);
    const auto s = single_atom_scattering(r);
    const double diff = std::abs(e.eta_exact - e.eta_first_order);
    results += csv_join({num(ratio), num(e.eta_exact), num(e.eta_first_order), num(diff), num(s.absorption),
                         num(s.r_plus * s.r_plus)});
    gap.x.push_back(ratio);
    gap.y.push_back(diff);
    if (ratio > 0.0 && diff > 0.0) {
      lx.push_back(std::log(ratio));
      ly.push_back(std::log(diff));
    }
  }
  std::string summary = "quantity,value\n";
  summary += "gamma_eng," + num(gamma_eng) + "\ngamma_free," + num(gamma_free) + '\n';
  if (lx.size() >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx > 0.0) {
      summary += "loglog_slope," + num(sxy / sxx) + '\n';
      log << "chiral-sweep: log-log slope of the efficiency gap " << num(sxy / sxx) << '\n';
    }
  }
  out.write("results.csv", results);
  out.write("summary.csv", summary);
  out.plot = PlotSpec{"Exact vs first-order chiral efficiency", "gamma_- / gamma_+", "absolute difference", true, true,
                      {std::move(gap)}};
}

void run_levels(const RunConfig& c, Outputs& out, std::ostream& log) {
  const auto rates = effective_rates(c.levels.params);
  const auto report = validity_flags(c.levels.params, c.levels.threshold);
  std::string results =
      "gamma_1d_eff,gamma_eng_eff,gamma_dephase,parasitic_ratio,collective_ratio,threshold,parasitic_ok,collective_ok\n";
  results += csv_join({num(rates.gamma_1d), num(rates.gamma_eng), num(rates.gamma_dephase), num(report.parasitic_ratio),
                       num(report.collective_ratio), num(report.threshold), report.parasitic_ok ? "true" : "false",
                       report.collective_ok ? "true" : "false"});
  std::string table = "photons,atoms,delta_p_abs,p_success,perturbative\n";
  for (auto n : c.levels.atoms) {
    for (auto m : c.levels.photons) {
      if (m > n) continue;
      const auto e = nonlinearity_estimate(m, n);
      table += csv_join({num(m), num(n), num(e.delta_p_abs), num(e.p_success), e.perturbative ? "true" : "false"});
    }
  }
  log << "levels-report: gamma_1d_eff " << num(rates.gamma_1d) << ", gamma_eng_eff " << num(rates.gamma_eng)
      << (report.ok() ? ", regime ok\n" : ", regime check FAILED\n");
  out.write("results.csv", results);
  out.write("nonlinearity.csv", table);
}

void run_amc(const RunConfig& c, Outputs& out, std::ostream& log) {
  const Rates base = Rates::from_purcell(c.purcell);
  std::string results = "atoms,purcell,gamma_eng,p_loss,p_loss_matrix,bandwidth\n";
  PlotSeries s{"closed form", {}, {}, {}, {}};
  for (auto n : c.atoms) {
    const auto t = strategy_fixed_amc(n, base);
    Rates r = base;
    r.gamma_eng = t.gamma_eng;
    const double gp = r.gamma_prime();
    const double p_abs = 1.0 - amc_analytic_output(n, r.gamma_1d, gp, 0.0);
    const double p_loss = 1.0 - p_abs * r.gamma_eng / gp;
    const double p_loss_matrix = detection_metrics(mirror_drift(AtomArray::mirror_lattice(n)), r, 0.0).p_loss;
    const double width = 2.0 * static_cast<double>(n) * r.gamma_1d;
    results += csv_join({num(n), num(c.purcell), num(r.gamma_eng), num(p_loss), num(p_loss_matrix), num(width)});
    s.x.push_back(static_cast<double>(n));
    s.y.push_back(p_loss);
    log << "amc-analytic N=" << n << ": p_loss " << num(p_loss) << '\n';
  }
  out.write("results.csv", results);
  out.plot = PlotSpec{"Ideal atomic mirror at CPA", "atoms N", "p_loss", true, true, {std::move(s)}};
}

}  // namespace

RunSummary run_experiment(const RunConfig& config, std::ostream& log) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  Outputs out;
  out.dir = config.output_dir;
  std::filesystem::create_directories(out.dir);

  const std::string& e = config.experiment;
  if (uses_ensembles(e)) {
    run_ensembles(config, out, log);
  } else if (e == "fig2c") {
    run_mode_sweep(config, out, log);
  } else if (e == "eigen-scaling") {
    run_scaling(config, out, log);
  } else if (e == "chiral-sweep") {
    run_chiral(config, out, log);
  } else if (e == "levels-report") {
    run_levels(config, out, log);
  } else {
    run_amc(config, out, log);
  }

  if (config.plot && out.plot) out.write("plot.svg", render_svg(*out.plot));
  out.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json meta = {{"config", config_to_json(config)},
               {"master_seed", config.master_seed},
               {"code_version", std::string(library_version())},
               {"threads", resolve_threads(config.threads)},
               {"wall_seconds", out.summary.wall_seconds},
               {"failed_realizations", out.summary.failed_realizations}};
  json files = json::array();
  for (const auto& f : out.summary.files) files.push_back(f.filename().generic_string());
  files.push_back("meta.json");
  meta["files"] = files;
  for (auto& [k, v] : out.extra.items()) meta[k] = v;
  out.write("meta.json", meta.dump(2) + '\n');
  return out.summary;
}

}  // namespace wgdet
