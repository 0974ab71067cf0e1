// Command-line runner: run, oracle, compare and sweep over TOML experiment configs.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mha/errors.hpp"
#include "mha/harness.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr const char* kOutRootEnv = "MHA_OUT_ROOT";

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<std::string> out;
};

// --out wins; otherwise the config's output_dir, placed under $MHA_OUT_ROOT
// when it is relative and the variable is set.
fs::path output_dir(const mha::ExperimentConfig& config, const Overrides& overrides) {
  if (overrides.out) return *overrides.out;
  if (const char* root = std::getenv(kOutRootEnv); root != nullptr && config.output_dir.is_relative()) {
    return fs::path(root) / config.output_dir;
  }
  return config.output_dir;
}

mha::ExperimentConfig load(const std::string& path, const Overrides& overrides) {
  mha::ExperimentConfig config = mha::load_config(path);
  if (overrides.seed) {
    config.seed = *overrides.seed;
    config.process.seed = *overrides.seed;
  }
  if (overrides.horizon) config.horizon = *overrides.horizon;
  config.validate();
  return config;
}

template <typename F>
int guarded(F&& body) {
  try {
    body();
    return kExitOk;
  } catch (const mha::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

int cmd_run(const std::string& path, const Overrides& overrides) {
  return guarded([&] {
    const auto config = load(path, overrides);
    const auto files = mha::run_experiment(config, output_dir(config, overrides));
    std::cout << mha::format_summary(files.summary);
    std::cout << "trace=" << files.trace.string() << "\n";
  });
}

int cmd_oracle(const std::string& path, const Overrides& overrides) {
  return guarded([&] {
    const auto config = load(path, overrides);
    const auto oracle = mha::compute_oracle(config);
    if (!oracle) throw mha::ConfigError("process kind has no closed-form conditional law");
    const std::string text = mha::format_optimum(*oracle);
    const fs::path dir = output_dir(config, overrides);
    fs::create_directories(dir);
    std::ofstream(dir / "oracle.txt", std::ios::binary) << text;
    std::cout << text;
  });
}

int cmd_compare(const std::string& path, const std::vector<std::string>& strategies,
                const Overrides& overrides) {
  return guarded([&] {
    const auto config = load(path, overrides);
    const auto table = mha::compare_strategies(config, strategies);
    const std::string text = mha::format_comparison(table);
    const fs::path dir = output_dir(config, overrides);
    fs::create_directories(dir);
    std::ofstream(dir / "comparison.csv", std::ios::binary) << text;
    std::cout << text;
  });
}

int cmd_sweep(const std::string& directory, const Overrides& overrides) {
  std::vector<fs::path> configs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".toml") configs.push_back(entry.path());
  }
  if (ec) {
    std::cerr << "config error: cannot list " << directory << ": " << ec.message() << "\n";
    return kExitConfig;
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "config error: no .toml configs in " << directory << "\n";
    return kExitConfig;
  }

  std::vector<std::future<int>> jobs;
  for (const fs::path& path : configs) {
    jobs.push_back(std::async(std::launch::async, [path, overrides] {
      return guarded([&] {
        Overrides per_run = overrides;
        const auto config = load(path.string(), {overrides.seed, overrides.horizon, std::nullopt});
        if (overrides.out) per_run.out = (fs::path(*overrides.out) / path.stem()).string();
        mha::run_experiment(config, output_dir(config, per_run));
      });
    }));
  }
  int worst = kExitOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const int code = jobs[i].get();
    std::cout << configs[i].filename().string() << " exit=" << code << "\n";
    worst = std::max(worst, code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax histogram-based aggregation experiments"};
  app.require_subcommand(1);

  Overrides overrides;
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::string out;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Override the process seed");
    sub->add_option("--horizon", horizon, "Override the horizon N")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output directory");
  };

  std::string config_path;
  std::string sweep_dir;
  std::vector<std::string> strategies{"mha"};

  auto* run = app.add_subcommand("run", "Run the aggregate strategy and write trace/summary files");
  run->add_option("config", config_path, "Experiment config (TOML)")->required();
  add_common(run);

  auto* oracle = app.add_subcommand("oracle", "Compute the constrained optimal value");
  oracle->add_option("config", config_path, "Experiment config (TOML)")->required();
  add_common(oracle);

  auto* compare = app.add_subcommand("compare", "Compare the aggregate with single experts");
  compare->add_option("config", config_path, "Experiment config (TOML)")->required();
  compare->add_option("--strategies", strategies,
                      "mha, grid:k:h, const_max, const_zero (comma separated)")
      ->delimiter(',');
  add_common(compare);

  auto* sweep = app.add_subcommand("sweep", "Run every .toml config in a directory in parallel");
  sweep->add_option("config-dir", sweep_dir, "Directory of configs")->required();
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  for (CLI::App* sub : {run, oracle, compare, sweep}) {
    if (sub->count("--seed") > 0) overrides.seed = seed;
    if (sub->count("--horizon") > 0) overrides.horizon = horizon;
    if (sub->count("--out") > 0) overrides.out = out;
  }

  if (*run) return cmd_run(config_path, overrides);
  if (*oracle) return cmd_oracle(config_path, overrides);
  if (*compare) return cmd_compare(config_path, strategies, overrides);
  return cmd_sweep(sweep_dir, overrides);
}
