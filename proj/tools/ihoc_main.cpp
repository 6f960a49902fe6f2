#include "ihoc/cli.hpp"
#include "ihoc/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv) {
  CLI::App app{"Discrete infinite-horizon optimal control: solve, verify, continue"};
  std::string config;
  std::string out, schedule, mode;
  double tol = 0.0;
  std::uint64_t seed = 0;
  app.add_option("--config", config, "JSON configuration file")->required();
  auto *out_opt = app.add_option("--out", out, "output directory");
  auto *sched_opt = app.add_option("--schedule", schedule, "horizons, e.g. 5,10,20,40");
  auto *tol_opt = app.add_option("--tol", tol, "certificate tolerance");
  auto *seed_opt = app.add_option("--seed", seed, "seed for sampled checks");
  auto *mode_opt = app.add_option("--mode", mode, "equation | inequation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ihoc::kExitConfigError;
  }

  ihoc::CliOverrides overrides;
  try {
    if (*out_opt)
      overrides.out = out;
    if (*sched_opt)
      overrides.schedule = ihoc::parse_schedule(schedule);
    if (*tol_opt)
      overrides.tol = tol;
    if (*seed_opt)
      overrides.seed = seed;
    if (*mode_opt)
      overrides.mode = ihoc::mode_from_string(mode);
  } catch (const ihoc::ConfigError &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return ihoc::kExitConfigError;
  }
  return ihoc::run_from_file(config, overrides, std::cerr);
}
