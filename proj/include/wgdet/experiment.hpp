#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wgdet/disorder.hpp"
#include "wgdet/levels.hpp"
#include "wgdet/model.hpp"

namespace wgdet {

/// Detuning grid for bandwidth scans, centred on each mode's resonance with
/// half-width `half_width_factor * kappa`.
struct OmegaGridSpec {
  double half_width_factor = 10.0;
  std::size_t points = 161;
};

struct LevelsSpec {
  DoubleLambdaParams params{1.0, 4.0, 20.0, 5.0, 1.0, 1.0, 0.01, 0.05};
  double threshold = 0.1;
  std::vector<std::size_t> photons{1, 2, 3, 5};
  std::vector<std::size_t> atoms{10, 20, 50};
};

/// Fully resolved experiment description. Built from per-experiment defaults
/// overlaid with a JSON document (see docs/run_config.schema.json).
struct RunConfig {
  std::string experiment;
  Geometry geometry = Geometry::mirror;
  std::vector<std::size_t> atoms;
  std::vector<double> sigmas;
  double purcell = 10.0;
  std::vector<Strategy> strategies;
  std::size_t realizations = 150;
  std::uint64_t master_seed = 0;
  double lattice = 1.0;
  std::vector<std::optional<double>> spacings;  ///< nullopt: fully random array
  std::vector<std::size_t> modes;
  OmegaGridSpec omega_grid;
  std::vector<double> gamma_ratios;
  std::optional<double> gamma_eng;  ///< chiral sweep; default gamma_+ - gamma_free
  LevelsSpec levels;
  std::filesystem::path output_dir;
  std::size_t threads = 0;
  bool plot = true;
};

/// Invalid configuration. `line()` is the 1-based line of the offending key in
/// the source text, 0 when no single line applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

std::span<const std::string_view> experiment_names();

/// Defaults for one experiment; throws ConfigError for an unknown name.
RunConfig default_config(std::string_view experiment);

/// Parses and validates `text`. When `experiment` is given it selects the
/// defaults and must agree with an "experiment" key in the document.
RunConfig parse_config(std::string_view text, std::string_view source_name,
                       std::optional<std::string_view> experiment = std::nullopt);

/// Semantic checks shared by parsing and command-line overrides.
void validate_config(const RunConfig& config);

nlohmann::json config_to_json(const RunConfig& config);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::size_t failed_realizations = 0;
  double wall_seconds = 0.0;
};

/// Runs the experiment and writes results.csv, summary.csv, meta.json and,
/// unless disabled, plot.svg into config.output_dir. results.csv depends only
/// on the configuration, never on thread count or timing.
RunSummary run_experiment(const RunConfig& config, std::ostream& log);

}  // namespace wgdet
