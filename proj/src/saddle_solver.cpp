#include "mha/saddle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <boost/math/tools/roots.hpp>

#include "mha/errors.hpp"

namespace mha {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

}  // namespace

EmpiricalObjective::EmpiricalObjective(std::vector<Observation> sample, const LossSpec& spec,
                                       double rho)
    : points_(std::move(sample)), spec_(&spec), rho_(rho) {
  if (!points_.empty()) weights_.assign(points_.size(), 1.0 / static_cast<double>(points_.size()));
  validate();
}

EmpiricalObjective::EmpiricalObjective(const std::map<Observation, std::size_t>& counts,
                                       const LossSpec& spec, double rho)
    : spec_(&spec), rho_(rho) {
  std::size_t total = 0;
  for (const auto& [x, count] : counts) total += count;
  points_.reserve(counts.size());
  weights_.reserve(counts.size());
  for (const auto& [x, count] : counts) {
    if (count == 0) continue;
    points_.push_back(x);
    weights_.push_back(static_cast<double>(count) / static_cast<double>(total));
  }
  validate();
}

void EmpiricalObjective::validate() const {
  if (points_.empty()) throw ConfigError("empirical objective needs a nonempty sample");
  if (!(rho_ >= 0.0) || !std::isfinite(rho_)) {
    throw ConfigError("regularization weight must be finite and nonnegative");
  }
}

double EmpiricalObjective::mean_main(std::span<const double> y) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) sum += weights_[i] * main_loss(*spec_, y, points_[i]);
  return sum;
}

double EmpiricalObjective::mean_constraint(std::span<const double> y) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    sum += weights_[i] * constraint_loss(*spec_, y, points_[i]);
  }
  return sum;
}

void EmpiricalObjective::add_mean_main_gradient(std::span<const double> y, double scale,
                                                std::span<double> out) const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    add_main_gradient(*spec_, y, points_[i], scale * weights_[i], out);
  }
}

void EmpiricalObjective::add_mean_constraint_gradient(std::span<const double> y, double scale,
                                                      std::span<double> out) const {
  if (scale == 0.0) return;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    add_constraint_gradient(*spec_, y, points_[i], scale * weights_[i], out);
  }
}

namespace {

double lambda_for_slack(double slack, double rho, double lambda_max) {
  if (rho > 0.0) return std::clamp(slack / (2.0 * rho), 0.0, lambda_max);
  return slack > 0.0 ? lambda_max : 0.0;
}

}  // namespace

DualVar inner_lambda(const Decision& y, const EmpiricalObjective& obj,
                     const ProblemGeometry& geometry) {
  const double slack = obj.mean_constraint(y.y) - obj.spec().gamma;
  return DualVar{lambda_for_slack(slack, obj.rho(), geometry.lambda_max())};
}

double envelope_objective(const Decision& y, const EmpiricalObjective& obj,
                          const ProblemGeometry& geometry) {
  const double slack = obj.mean_constraint(y.y) - obj.spec().gamma;
  const double lambda = lambda_for_slack(slack, obj.rho(), geometry.lambda_max());
  return obj.mean_main(y.y) + obj.rho() * squared_norm(y.y) + lambda * slack -
         obj.rho() * lambda * lambda;
}

std::vector<double> envelope_gradient(const Decision& y, const EmpiricalObjective& obj,
                                      const ProblemGeometry& geometry) {
  const double lambda = inner_lambda(y, obj, geometry).lambda;
  std::vector<double> grad(y.y.size(), 0.0);
  obj.add_mean_main_gradient(y.y, 1.0, grad);
  obj.add_mean_constraint_gradient(y.y, lambda, grad);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += 2.0 * obj.rho() * y.y[i];
  return grad;
}

LagrangianMinimum minimize_lagrangian(const EmpiricalObjective& obj,
                                      const ProblemGeometry& geometry, double lambda,
                                      const SolverOptions& options,
                                      std::optional<Decision> start) {
  const DecisionSet& set = geometry.decision_set();
  const double gamma = obj.spec().gamma;
  const double rho = obj.rho();
  auto objective = [&](std::span<const double> y) {
    double value = obj.mean_main(y) + rho * squared_norm(y);
    if (lambda != 0.0) value += lambda * (obj.mean_constraint(y) - gamma);
    return value;
  };

  LagrangianMinimum result;
  result.y = start ? Decision{set.project(start->y)} : default_prediction(geometry).y;
  std::vector<double>& y = result.y.y;
  const std::size_t m = y.size();
  double value = objective(y);
  std::vector<double> grad(m);
  std::vector<double> candidate(m);
  std::vector<double> trial(m);

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    obj.add_mean_main_gradient(y, 1.0, grad);
    obj.add_mean_constraint_gradient(y, lambda, grad);
    for (std::size_t i = 0; i < m; ++i) grad[i] += 2.0 * rho * y[i];

    double step = 1.0;
    double candidate_value = value;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, step *= 0.5) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = y[i] - step * grad[i];
      candidate = set.project(trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < m; ++i) decrease += grad[i] * (candidate[i] - y[i]);
      candidate_value = objective(candidate);
      if (candidate_value <= value + kArmijo * decrease) break;
    }
    result.iterations = iter;
    result.last_step = distance(candidate, y);
    if (candidate_value <= value) {
      y.swap(candidate);
      value = candidate_value;
    }
    if (result.last_step <= options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SaddlePoint solve_saddle(const EmpiricalObjective& obj, const ProblemGeometry& geometry,
                         const SolverOptions& options, std::optional<Decision> start) {
  // lambda is scalar, so the saddle point is found on the dual side: the
  // concave dual psi(lambda) = min_y L_rho(y, lambda) has derivative
  // cbar(y(lambda)) - gamma - 2 rho lambda, non-increasing in lambda.
  const double gamma = obj.spec().gamma;
  const double rho = obj.rho();
  const double lambda_max = geometry.lambda_max();

  SaddlePoint out;
  int total_iterations = 0;
  bool all_converged = true;
  Decision warm = start ? Decision{geometry.decision_set().project(start->y)}
                        : default_prediction(geometry).y;
  LagrangianMinimum last;

  auto solve_at = [&](double lambda) {
    last = minimize_lagrangian(obj, geometry, lambda, options, warm);
    total_iterations += last.iterations;
    all_converged = all_converged && last.converged;
    warm = last.y;
    return obj.mean_constraint(last.y.y) - gamma - 2.0 * rho * lambda;
  };

  double lambda_star = 0.0;
  bool root_converged = true;
  const double at_zero = solve_at(0.0);
  if (at_zero > 0.0) {
    const Decision y_zero = last.y;
    const double at_max = solve_at(lambda_max);
    if (at_max >= 0.0) {
      lambda_star = lambda_max;
    } else {
      warm = y_zero;
      const double width = 1e-12 * (1.0 + lambda_max);
      std::uintmax_t max_evals = 200;
      auto tolerance = [width](double a, double b) { return std::abs(b - a) <= width; };
      const auto [lo, hi] = boost::math::tools::toms748_solve(
          [&](double lambda) { return solve_at(lambda); }, 0.0, lambda_max, at_zero, at_max,
          tolerance, max_evals);
      lambda_star = 0.5 * (lo + hi);
      root_converged = max_evals < 200;
    }
    if (lambda_star != lambda_max) solve_at(lambda_star);
  }

  out.y_star = last.y;
  out.lambda_star = DualVar{lambda_star};
  const double slack = obj.mean_constraint(out.y_star.y) - gamma;
  out.value = obj.mean_main(out.y_star.y) + rho * squared_norm(out.y_star.y) +
              lambda_star * slack - rho * lambda_star * lambda_star;
  out.iterations = total_iterations;
  out.residual = last.last_step;
  out.success = all_converged && root_converged;
  if (!std::isfinite(out.value)) throw LossError("saddle objective is not finite");
  return out;
}

Prediction default_prediction(const ProblemGeometry& geometry) {
  std::vector<double> origin(geometry.m(), 0.0);
  return Prediction{Decision{geometry.decision_set().project(origin)}, DualVar{0.0}};
}

}  // namespace mha
