#include "mha/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mha/errors.hpp"

namespace mha {

double WeightVector::entropy() const {
  double h = 0.0;
  for (double q : p) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

WeightVector update_weights(std::span<const double> cumulative_losses,
                            std::span<const double> alphas, std::size_t n, WeightSide side) {
  if (n < 1) throw ConfigError("weight update needs n >= 1");
  if (cumulative_losses.size() != alphas.size() || alphas.empty()) {
    throw ConfigError("weight update needs one prior weight per expert");
  }
  const double rate = 1.0 / std::sqrt(static_cast<double>(n));
  const double sign = side == WeightSide::decision ? -1.0 : 1.0;
  std::vector<double> logits(alphas.size());
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < alphas.size(); ++e) {
    if (!(alphas[e] > 0.0)) throw ConfigError("prior weights must be strictly positive");
    logits[e] = std::log(alphas[e]) + sign * rate * cumulative_losses[e];
    shift = std::max(shift, logits[e]);
  }
  double total = 0.0;
  for (double& logit : logits) {
    logit = std::exp(logit - shift);
    total += logit;
  }
  for (double& w : logits) w /= total;
  return WeightVector{std::move(logits)};
}

Prediction aggregate(std::span<const Prediction> predictions, const WeightVector& decision_weights,
                     const WeightVector& dual_weights) {
  if (predictions.empty() || predictions.size() != decision_weights.p.size() ||
      predictions.size() != dual_weights.p.size()) {
    throw ConfigError("aggregate needs one weight per expert prediction");
  }
  const std::size_t m = predictions.front().y.y.size();
  Prediction out{Decision{std::vector<double>(m, 0.0)}, DualVar{0.0}};
  for (std::size_t e = 0; e < predictions.size(); ++e) {
    for (std::size_t i = 0; i < m; ++i) out.y.y[i] += decision_weights.p[e] * predictions[e].y.y[i];
    out.lambda.lambda += dual_weights.p[e] * predictions[e].lambda.lambda;
  }
  return out;
}

MinimaxAggregator::MinimaxAggregator(ProblemGeometry geometry, LossSpec spec,
                                     std::vector<ExpertId> experts, SolverOptions options)
    : geometry_(std::move(geometry)),
      spec_(std::move(spec)),
      options_(options),
      history_(PartitionFamily(geometry_.d(), geometry_.half_width()),
               [&experts] {
                 int deepest = 1;
                 for (const ExpertId& id : experts) deepest = std::max(deepest, id.h);
                 return deepest;
               }()) {
  std::sort(experts.begin(), experts.end());
  if (std::adjacent_find(experts.begin(), experts.end()) != experts.end()) {
    throw ConfigError("duplicate expert in pool");
  }
  for (const ExpertId& id : experts) experts_.emplace_back(id, geometry_);
  alphas_ = prior_weights(experts);
  decision_weights_ = WeightVector{alphas_};
  dual_weights_ = WeightVector{alphas_};
  predict_experts();
  current_ = aggregate(expert_predictions_, decision_weights_, dual_weights_);
}

void MinimaxAggregator::predict_experts() {
  const std::size_t n = round();
  expert_predictions_.clear();
  expert_predictions_.reserve(experts_.size());
  for (ExpertState& expert : experts_) {
    expert_predictions_.push_back(expert_predict(expert, history_, n, geometry_, spec_, options_));
  }
}

RoundLosses MinimaxAggregator::reveal(const Observation& x) {
  geometry_.check_observation(x);
  const std::size_t n = round();

  RoundLosses losses;
  losses.main = main_loss(spec_, current_.y.y, x);
  losses.constraint = constraint_loss(spec_, current_.y.y, x);
  losses.lagrangian = losses.main + current_.lambda.lambda * (losses.constraint - spec_.gamma);

  std::vector<double> y_losses(experts_.size());
  std::vector<double> lambda_losses(experts_.size());
  for (std::size_t e = 0; e < experts_.size(); ++e) {
    const Prediction& own = expert_predictions_[e];
    update_cumulative(experts_[e], lagrangian(own.y, current_.lambda, x, spec_),
                      lagrangian(current_.y, own.lambda, x, spec_));
    y_losses[e] = experts_[e].cumulative_y_loss();
    lambda_losses[e] = experts_[e].cumulative_lambda_loss();
  }
  decision_weights_ = update_weights(y_losses, alphas_, n, WeightSide::decision);
  dual_weights_ = update_weights(lambda_losses, alphas_, n, WeightSide::dual);

  history_.append(x);
  for (ExpertState& expert : experts_) expert.observe(history_);
  predict_experts();
  current_ = aggregate(expert_predictions_, decision_weights_, dual_weights_);
  return losses;
}

std::size_t MinimaxAggregator::expert_failures() const {
  std::size_t total = 0;
  for (const ExpertState& expert : experts_) total += expert.failures();
  return total;
}

}  // namespace mha
