#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mha/config.hpp"
#include "mha/oracle.hpp"

namespace mha {

inline constexpr const char* kTraceFormat = "mha-trace v1";

/// One CSV row of the per-round trace.
struct RoundTrace {
  std::size_t n = 0;
  std::vector<double> y;
  double lambda = 0.0;
  double main_loss = 0.0;
  double constraint_loss = 0.0;
  double lagrangian = 0.0;
  double avg_main = 0.0;
  double avg_constraint = 0.0;
  double avg_lagrangian = 0.0;
  double best_expert_avg_lagrangian = 0.0;  // min_e (1/n) sum_i l(y_e^i, lambda_i, x_i)
  double weight_entropy = 0.0;              // decision-side mixture
};

std::vector<std::string> trace_columns(int m);
std::string format_trace_header(int m);
std::string format_trace_row(const RoundTrace& row);

/// Final averages of one strategy over the shared observation sequence.
/// For experts the averages are of the expert's own play (y_e, lambda_e);
/// the scaled gaps compare the aggregate against that expert:
///   scaled_gap_decision = sqrt(N) (mean l(y_i, lambda_i) - mean l(y_e^i, lambda_i))
///   scaled_gap_dual     = sqrt(N) (mean l(y_i, lambda_e^i) - mean l(y_i, lambda_i))
struct StrategyRecord {
  std::string label;
  double avg_main = 0.0;
  double avg_constraint = 0.0;
  double avg_lagrangian = 0.0;
  double avg_lambda = 0.0;
  double scaled_gap_decision = 0.0;
  double scaled_gap_dual = 0.0;
};

struct RunSummary {
  std::string name;
  std::size_t rounds = 0;
  double gamma = 0.0;
  double avg_main = 0.0;
  double avg_constraint = 0.0;
  double avg_lagrangian = 0.0;
  double avg_lambda = 0.0;
  std::string best_decision_expert;
  double best_expert_avg_lagrangian = 0.0;
  double scaled_regret_decision = 0.0;  // sqrt(N) (mean l - min_e mean l(y_e, lambda_i))
  double scaled_regret_dual = 0.0;      // sqrt(N) (max_e mean l(y_i, lambda_e) - mean l)
  std::size_t expert_failures = 0;
  std::optional<FeasibleOptimum> oracle;  // absent when the law has no closed form
  std::vector<StrategyRecord> experts;

  StrategyRecord aggregate_record() const;
};

using RoundCallback = std::function<void(const RoundTrace&)>;

/// Oracle for the configured process, or nothing for ar1.
std::optional<FeasibleOptimum> compute_oracle(const ExperimentConfig& config);

/// Runs the online loop for config.horizon rounds without touching the
/// filesystem. `on_round` sees every trace row as it is produced.
RunSummary simulate(const ExperimentConfig& config, const RoundCallback& on_round = {},
                    bool with_oracle = true);

std::string format_summary(const RunSummary& summary);

struct RunFiles {
  std::filesystem::path trace;
  std::filesystem::path summary_file;
  std::filesystem::path oracle_file;
  RunSummary summary;
};

/// Writes trace.csv, summary.txt and (when computable) oracle.txt into
/// out_dir. On failure the trace ends with a "# ABORTED" marker line and the
/// exception propagates.
RunFiles run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct ComparisonTable {
  std::size_t rounds = 0;
  double gamma = 0.0;
  std::optional<FeasibleOptimum> oracle;
  std::vector<StrategyRecord> rows;
};

/// Strategies are "mha", "grid:k:h", "const_max" or "const_zero"; experts must
/// belong to the configured pool. All strategies see the same sequence.
ComparisonTable compare_strategies(const ExperimentConfig& config,
                                   const std::vector<std::string>& strategies);

std::string format_comparison(const ComparisonTable& table);

}  // namespace mha
