#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wgdet/experiment.hpp"
#include "wgdet/io.hpp"
#include "wgdet/selftest.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kFailureExit = 1;

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool no_plot = false;
};

void add_run_flags(CLI::App& sub, Overrides& o, bool config_required) {
  auto* config = sub.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  if (config_required) config->required();
  sub.add_option("--out", o.out, "output directory (overrides output_dir)");
  sub.add_option("--seed", o.seed, "master seed (overrides master_seed)");
  sub.add_option("--threads", o.threads, "worker cap, 0 = hardware concurrency");
  sub.add_flag("--no-plot", o.no_plot, "skip plot.svg");
}

int run(const std::optional<std::string>& experiment, const Overrides& o) {
  wgdet::RunConfig config;
  try {
    if (!o.config_path.empty()) {
      config = wgdet::parse_config(wgdet::read_text_file(o.config_path), o.config_path,
                                   experiment ? std::optional<std::string_view>(*experiment) : std::nullopt);
    } else {
      config = wgdet::default_config(*experiment);
    }
    if (!o.out.empty()) config.output_dir = o.out;
    if (o.seed) config.master_seed = *o.seed;
    if (o.threads) config.threads = *o.threads;
    if (o.no_plot) config.plot = false;
    wgdet::validate_config(config);
  } catch (const wgdet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  }

  try {
    const auto summary = wgdet::run_experiment(config, std::cerr);
    for (const auto& f : summary.files) std::cout << f.generic_string() << '\n';
    std::cerr << config.experiment << ": done in " << wgdet::format_double(summary.wall_seconds) << " s";
    if (summary.failed_realizations > 0) std::cerr << ", " << summary.failed_realizations << " failed realizations";
    std::cerr << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailureExit;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon detection with disordered atom arrays coupled to a waveguide"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wgdet::library_version()));

  Overrides overrides;
  int status = 0;

  auto* generic = app.add_subcommand("run", "run the experiment named in the config file");
  add_run_flags(*generic, overrides, true);
  generic->callback([&] { status = run(std::nullopt, overrides); });

  for (auto name : wgdet::experiment_names()) {
    auto* sub = app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
    add_run_flags(*sub, overrides, false);
    sub->callback([&, name] { status = run(std::string(name), overrides); });
  }

  std::uint64_t selftest_seed = 0;
  std::size_t selftest_threads = 0;
  auto* selftest = app.add_subcommand("selftest", "check library invariants on randomized inputs");
  selftest->add_option("--seed", selftest_seed, "seed for the randomized inputs");
  selftest->add_option("--threads", selftest_threads, "worker cap for the ensemble checks");
  selftest->callback([&] {
    try {
      status = wgdet::run_selftest(std::cout, selftest_seed, selftest_threads) == 0 ? 0 : kFailureExit;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      status = kFailureExit;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }
  return status;
}
