#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mha/core_model.hpp"
#include "mha/processes.hpp"
#include "mha/saddle_solver.hpp"

namespace mha {

/// Everything one run needs. Parsed from a TOML file:
///
///   name = "iid-ridge"                      # optional, defaults to file stem
///   [geometry]
///   d = 1                                   # observation dimension
///   D = 1.0                                 # cube half-width
///   decision_set = "box"                    # "box" or "simplex"
///   lower = [-1.0]                          # box only
///   upper = [1.0]                           # box only
///   m = 3                                   # simplex only
///   lambda_max = 10.0
///   [loss]
///   main = "quadratic_tracking"
///   constraint = "ridge_constraint"
///   gamma = 0.25
///   [process]
///   kind = "iid"                            # "iid", "markov" or "ar1"
///   support = [[0.6], [1.0]]                # iid
///   probabilities = [0.5, 0.5]              # iid
///   states = [[-0.6], [0.6]]                # markov
///   transition = [[0.9, 0.1], [0.1, 0.9]]   # markov
///   phi = 0.5                               # ar1
///   sigma = 0.3                             # ar1
///   [experiment]
///   horizon = 10000
///   K = 5
///   H = 5
///   seed = 1
///   tol = 1e-6
///   max_iters = 10000
///   output_dir = "out/iid-ridge"
struct ExperimentConfig {
  std::string name;
  ProblemGeometry geometry;
  std::string main_loss{};
  std::string constraint_loss{};
  double gamma = 0.0;
  ProcessSpec process{};
  std::size_t horizon = 1;
  int max_k = 5;
  int max_h = 5;
  SolverOptions solver{};
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  // Programmatic runs may replace the named losses; never set by parse_config.
  std::optional<LossSpec> custom_loss{};

  LossSpec loss_spec() const;
  // Resolves names, checks N >= 1 and the process invariants.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& toml_text, const std::string& default_name = "run");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace mha
