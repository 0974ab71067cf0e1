#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mha/core_model.hpp"
#include "mha/experts.hpp"

namespace mha {

/// Mixture probabilities over the expert pool.
struct WeightVector {
  std::vector<double> p;

  double entropy() const;
};

/// Which way the exponential weights lean: the decision side rewards low
/// cumulative loss, the dual side rewards high cumulative loss.
enum class WeightSide { decision, dual };

/// alpha_e exp(-/+ L_e / sqrt(n)), normalized. Computed in log space with a
/// log-sum-exp shift so large horizons neither overflow nor underflow.
WeightVector update_weights(std::span<const double> cumulative_losses,
                            std::span<const double> alphas, std::size_t n, WeightSide side);

/// Convex combinations sum_e p^y_e y_e and sum_e p^lambda_e lambda_e.
Prediction aggregate(std::span<const Prediction> predictions, const WeightVector& decision_weights,
                     const WeightVector& dual_weights);

/// Losses suffered by the aggregate in one round.
struct RoundLosses {
  double main = 0.0;
  double constraint = 0.0;
  double lagrangian = 0.0;
};

/// The online loop: two weak aggregating algorithms run side by side over a
/// shared expert pool, one minimizing over decisions and one maximizing over
/// the dual, both scored with the instantaneous Lagrangian.
class MinimaxAggregator {
 public:
  MinimaxAggregator(ProblemGeometry geometry, LossSpec spec, std::vector<ExpertId> experts,
                    SolverOptions options = {});

  // Prediction for the current round (1-based round() ).
  const Prediction& prediction() const { return current_; }
  std::size_t round() const { return history_.size() + 1; }

  // Reveals x_n, charges the aggregate and every expert, updates the weights
  // and prepares the predictions for round n + 1.
  RoundLosses reveal(const Observation& x);

  const ProblemGeometry& geometry() const { return geometry_; }
  const LossSpec& spec() const { return spec_; }
  const History& history() const { return history_; }
  const std::vector<ExpertState>& experts() const { return experts_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const WeightVector& decision_weights() const { return decision_weights_; }
  const WeightVector& dual_weights() const { return dual_weights_; }
  // Per-expert predictions for the current round, in expert order.
  const std::vector<Prediction>& expert_predictions() const { return expert_predictions_; }
  std::size_t expert_failures() const;

 private:
  void predict_experts();

  ProblemGeometry geometry_;
  LossSpec spec_;
  SolverOptions options_;
  std::vector<ExpertState> experts_;
  std::vector<double> alphas_;
  History history_;
  WeightVector decision_weights_;
  WeightVector dual_weights_;
  std::vector<Prediction> expert_predictions_;
  Prediction current_;
};

}  // namespace mha
