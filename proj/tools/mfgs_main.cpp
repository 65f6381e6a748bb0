#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mfgs/config.hpp"
#include "mfgs/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Social-optimum solver for finite-state mean field games"};
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "Path to the JSON run configuration")
      ->required();
  app.add_option("--out", out_dir, "Directory for result artifacts");
  auto* seed_opt =
      app.add_option("--seed", seed_override, "Overrides the config seed");
  app.add_flag("--quiet", quiet, "Suppress progress output");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read config file " << config_path << "\n";
    return mfgs::cli::kExitConfigError;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  try {
    mfgs::cli::RunConfig cfg = mfgs::cli::parse_config(buffer.str());
    if (seed_opt->count() > 0)
      mfgs::cli::apply_seed_override(cfg, seed_override);
    return mfgs::cli::run(cfg, out_dir, quiet);
  } catch (const mfgs::InvalidInputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mfgs::cli::kExitConfigError;
  }
}
