#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mha/core_model.hpp"
#include "mha/partition.hpp"
#include "mha/saddle_solver.hpp"

namespace mha {

struct ExpertId {
  enum class Kind { grid, const_max, const_zero };

  Kind kind = Kind::grid;
  int k = 0;
  int h = 0;

  static ExpertId grid(int k, int h) { return {Kind::grid, k, h}; }
  static ExpertId constant_max() { return {Kind::const_max, 0, 0}; }
  static ExpertId constant_zero() { return {Kind::const_zero, 0, 0}; }

  auto operator<=>(const ExpertId&) const = default;
  bool operator==(const ExpertId&) const = default;

  // "grid:k:h", "const_max" or "const_zero".
  std::string label() const;
  static ExpertId parse(const std::string& label);
};

/// Observations seen so far together with their quantized ids at every
/// partition level in use. Shared read-only by all experts within a round.
class History {
 public:
  History(PartitionFamily family, int max_level);

  void append(const Observation& x);

  std::size_t size() const { return observations_.size(); }
  const PartitionFamily& family() const { return family_; }
  int max_level() const { return static_cast<int>(ids_.size()); }
  std::span<const Observation> observations() const { return observations_; }
  std::span<const CellId> ids(int h) const;

 private:
  PartitionFamily family_;
  std::vector<Observation> observations_;
  std::vector<std::vector<CellId>> ids_;  // ids_[h - 1]
};

/// One expert of the truncated grid or one of the two constant experts.
class ExpertState {
 public:
  ExpertState(ExpertId id, const ProblemGeometry& geometry);

  const ExpertId& id() const { return id_; }
  const Prediction& last_prediction() const { return last_; }
  double cumulative_y_loss() const { return cumulative_y_; }
  double cumulative_lambda_loss() const { return cumulative_lambda_; }
  std::size_t failures() const { return failures_; }
  const ContextIndex* context_index() const { return index_ ? &*index_ : nullptr; }

  // Must be called after every History::append.
  void observe(const History& history);

  void set_prediction(Prediction p) { last_ = std::move(p); }
  void record_failure() { ++failures_; }
  void add_losses(double y_loss, double lambda_loss);

  // Last solution per context, used as a warm start.
  std::optional<Decision> warm_start(const ContextString& w) const;
  void remember(const ContextString& w, const Decision& y) { warm_[w] = y; }

 private:
  ExpertId id_;
  std::optional<ContextIndex> index_;
  std::map<ContextString, Decision> warm_;
  Prediction last_;
  double cumulative_y_ = 0.0;
  double cumulative_lambda_ = 0.0;
  std::size_t failures_ = 0;
};

/// Prediction of `state` for round n, where history holds x_1..x_{n-1}.
/// Grid experts play the regularized empirical saddle point over the rounds
/// whose preceding k-window matches the current one, with rho = 1/n + 1/h + 1/k;
/// on an empty match they play default_prediction. A failing solve keeps the
/// expert's previous prediction and counts the failure.
Prediction expert_predict(ExpertState& state, const History& history, std::size_t n,
                          const ProblemGeometry& geometry, const LossSpec& spec,
                          const SolverOptions& options = {});

/// Adds l(y_e, lambda_n, x_n) and l(y_n, lambda_e, x_n): the expert's decision
/// against the aggregate dual and the expert's dual against the aggregate decision.
void update_cumulative(ExpertState& state, double own_y_loss, double own_lambda_loss);

/// Grid experts (k, h) for 1 <= k <= K, 1 <= h <= H, then const_max, const_zero;
/// sorted by ExpertId.
std::vector<ExpertId> truncated_grid(int max_k, int max_h);

/// Prior weights: 2^-(k+h) for grid experts, 1/8 for each constant expert,
/// normalized to sum to one.
std::vector<double> prior_weights(std::span<const ExpertId> ids);

}  // namespace mha
