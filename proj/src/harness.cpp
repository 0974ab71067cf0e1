#include "mha/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mha/aggregator.hpp"
#include "mha/errors.hpp"

namespace mha {

namespace {

std::string num(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

struct OwnPlay {
  double main = 0.0;
  double constraint = 0.0;
  double lagrangian = 0.0;
  double lambda = 0.0;
};

}  // namespace

std::vector<std::string> trace_columns(int m) {
  std::vector<std::string> columns{"n"};
  for (int i = 0; i < m; ++i) columns.push_back("y" + std::to_string(i + 1));
  for (const char* name : {"lambda", "u", "c", "l", "avg_u", "avg_c", "avg_l",
                           "best_expert_avg_l", "weight_entropy"}) {
    columns.emplace_back(name);
  }
  return columns;
}

std::string format_trace_header(int m) {
  std::string out = std::string("# ") + kTraceFormat + "\n";
  const auto columns = trace_columns(m);
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  return out + "\n";
}

std::string format_trace_row(const RoundTrace& row) {
  std::string out = std::to_string(row.n);
  for (double v : row.y) out += "," + num(v);
  for (double v : {row.lambda, row.main_loss, row.constraint_loss, row.lagrangian, row.avg_main,
                   row.avg_constraint, row.avg_lagrangian, row.best_expert_avg_lagrangian,
                   row.weight_entropy}) {
    out += "," + num(v);
  }
  return out + "\n";
}

StrategyRecord RunSummary::aggregate_record() const {
  return StrategyRecord{"mha", avg_main, avg_constraint, avg_lagrangian, avg_lambda, 0.0, 0.0};
}

std::optional<FeasibleOptimum> compute_oracle(const ExperimentConfig& config) {
  if (config.process.kind == ProcessSpec::Kind::ar1) return std::nullopt;
  const LossSpec spec = config.loss_spec();
  return solve_feasible_optimum(stationary_law(config.process), spec, config.geometry);
}

RunSummary simulate(const ExperimentConfig& config, const RoundCallback& on_round,
                    bool with_oracle) {
  config.validate();
  RunSummary summary;
  summary.name = config.name;
  summary.gamma = config.loss_spec().gamma;
  if (with_oracle) summary.oracle = compute_oracle(config);

  MinimaxAggregator mha(config.geometry, config.loss_spec(), truncated_grid(config.max_k, config.max_h),
                        config.solver);
  ProcessGenerator process(config.process);
  const LossSpec& spec = mha.spec();
  const std::size_t experts = mha.experts().size();
  std::vector<OwnPlay> own(experts);

  double sum_main = 0.0;
  double sum_constraint = 0.0;
  double sum_lagrangian = 0.0;
  double sum_lambda = 0.0;
  for (std::size_t n = 1; n <= config.horizon; ++n) {
    const Prediction played = mha.prediction();
    const std::vector<Prediction> expert_predictions = mha.expert_predictions();
    const Observation x = process.next();
    const RoundLosses losses = mha.reveal(x);

    for (std::size_t e = 0; e < experts; ++e) {
      const Prediction& p = expert_predictions[e];
      const double u = main_loss(spec, p.y.y, x);
      const double c = constraint_loss(spec, p.y.y, x);
      own[e].main += u;
      own[e].constraint += c;
      own[e].lagrangian += u + p.lambda.lambda * (c - spec.gamma);
      own[e].lambda += p.lambda.lambda;
    }
    sum_main += losses.main;
    sum_constraint += losses.constraint;
    sum_lagrangian += losses.lagrangian;
    sum_lambda += played.lambda.lambda;

    if (on_round) {
      const double count = static_cast<double>(n);
      double best = std::numeric_limits<double>::infinity();
      for (const ExpertState& expert : mha.experts()) best = std::min(best, expert.cumulative_y_loss());
      on_round(RoundTrace{n, played.y.y, played.lambda.lambda, losses.main, losses.constraint,
                          losses.lagrangian, sum_main / count, sum_constraint / count,
                          sum_lagrangian / count, best / count,
                          mha.decision_weights().entropy()});
    }
  }

  const double count = static_cast<double>(config.horizon);
  const double root = std::sqrt(count);
  summary.rounds = config.horizon;
  summary.avg_main = sum_main / count;
  summary.avg_constraint = sum_constraint / count;
  summary.avg_lagrangian = sum_lagrangian / count;
  summary.avg_lambda = sum_lambda / count;
  summary.expert_failures = mha.expert_failures();

  double best_decision = std::numeric_limits<double>::infinity();
  double best_dual = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < experts; ++e) {
    const ExpertState& expert = mha.experts()[e];
    const double decision_avg = expert.cumulative_y_loss() / count;
    const double dual_avg = expert.cumulative_lambda_loss() / count;
    if (decision_avg < best_decision) {
      best_decision = decision_avg;
      summary.best_decision_expert = expert.id().label();
    }
    best_dual = std::max(best_dual, dual_avg);
    summary.experts.push_back(StrategyRecord{
        expert.id().label(), own[e].main / count, own[e].constraint / count,
        own[e].lagrangian / count, own[e].lambda / count,
        root * (summary.avg_lagrangian - decision_avg), root * (dual_avg - summary.avg_lagrangian)});
  }
  summary.best_expert_avg_lagrangian = best_decision;
  summary.scaled_regret_decision = root * (summary.avg_lagrangian - best_decision);
  summary.scaled_regret_dual = root * (best_dual - summary.avg_lagrangian);
  return summary;
}

std::string format_summary(const RunSummary& s) {
  std::ostringstream out;
  out << "name=" << s.name << "\n";
  out << "rounds=" << s.rounds << "\n";
  out << "gamma=" << num(s.gamma) << "\n";
  out << "avg_u=" << num(s.avg_main) << "\n";
  out << "avg_c=" << num(s.avg_constraint) << "\n";
  out << "avg_l=" << num(s.avg_lagrangian) << "\n";
  out << "avg_lambda=" << num(s.avg_lambda) << "\n";
  out << "c_excess=" << num(s.avg_constraint - s.gamma) << "\n";
  out << "best_decision_expert=" << s.best_decision_expert << "\n";
  out << "best_expert_avg_l=" << num(s.best_expert_avg_lagrangian) << "\n";
  out << "scaled_regret_decision=" << num(s.scaled_regret_decision) << "\n";
  out << "scaled_regret_dual=" << num(s.scaled_regret_dual) << "\n";
  out << "expert_failures=" << s.expert_failures << "\n";
  if (!s.oracle) {
    out << "oracle=unavailable\n";
  } else if (!s.oracle->feasible) {
    out << "oracle=infeasible\n";
  } else {
    out << "oracle_value=" << num(s.oracle->value) << "\n";
    out << "oracle_lambda=" << num(s.oracle->lambda_star) << "\n";
    out << "gap_u=" << num(s.avg_main - s.oracle->value) << "\n";
  }
  return out.str();
}

RunFiles run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunFiles files;
  files.trace = out_dir / "trace.csv";
  files.summary_file = out_dir / "summary.txt";
  files.oracle_file = out_dir / "oracle.txt";

  std::ofstream trace(files.trace, std::ios::binary | std::ios::trunc);
  if (!trace) throw ConfigError("cannot write " + files.trace.string());
  trace << format_trace_header(config.geometry.m());
  std::size_t last_round = 0;
  try {
    files.summary = simulate(config, [&](const RoundTrace& row) {
      trace << format_trace_row(row);
      last_round = row.n;
    });
  } catch (const std::exception& e) {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    trace << "# ABORTED after round " << last_round << ": " << message << "\n";
    throw;
  }
  trace.close();

  std::ofstream summary(files.summary_file, std::ios::binary | std::ios::trunc);
  summary << format_summary(files.summary);
  if (files.summary.oracle) {
    std::ofstream oracle(files.oracle_file, std::ios::binary | std::ios::trunc);
    oracle << format_optimum(*files.summary.oracle);
  } else {
    files.oracle_file.clear();
  }
  return files;
}

ComparisonTable compare_strategies(const ExperimentConfig& config,
                                   const std::vector<std::string>& strategies) {
  if (strategies.empty()) throw ConfigError("compare needs at least one strategy");
  const auto pool = truncated_grid(config.max_k, config.max_h);
  for (const std::string& label : strategies) {
    if (label == "mha") continue;
    const ExpertId id = ExpertId::parse(label);
    if (std::find(pool.begin(), pool.end(), id) == pool.end()) {
      throw ConfigError("strategy " + label + " is outside the configured K x H expert grid");
    }
  }
  const RunSummary summary = simulate(config);
  ComparisonTable table;
  table.rounds = summary.rounds;
  table.gamma = summary.gamma;
  table.oracle = summary.oracle;
  for (const std::string& label : strategies) {
    if (label == "mha") {
      table.rows.push_back(summary.aggregate_record());
      continue;
    }
    const std::string canonical = ExpertId::parse(label).label();
    for (const StrategyRecord& record : summary.experts) {
      if (record.label == canonical) table.rows.push_back(record);
    }
  }
  return table;
}

std::string format_comparison(const ComparisonTable& table) {
  std::ostringstream out;
  out << "# rounds=" << table.rounds << " gamma=" << num(table.gamma);
  if (table.oracle && table.oracle->feasible) out << " oracle_value=" << num(table.oracle->value);
  out << "\nstrategy,avg_u,avg_c,avg_l,avg_lambda,c_excess,scaled_gap_decision,scaled_gap_dual\n";
  for (const StrategyRecord& r : table.rows) {
    out << r.label << "," << num(r.avg_main) << "," << num(r.avg_constraint) << ","
        << num(r.avg_lagrangian) << "," << num(r.avg_lambda) << ","
        << num(r.avg_constraint - table.gamma) << "," << num(r.scaled_gap_decision) << ","
        << num(r.scaled_gap_dual) << "\n";
  }
  return out.str();
}

}  // namespace mha
