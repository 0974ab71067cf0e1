#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mha/core_model.hpp"

namespace mha {

/// Empirical average of the regularized Lagrangian over a (weighted) sample:
///   (1/|B|) sum_{x in B} l(y, lambda, x) + rho (|y|^2 - lambda^2).
/// The regularizer does not depend on x, so it is added outside the mean.
class EmpiricalObjective {
 public:
  EmpiricalObjective(std::vector<Observation> sample, const LossSpec& spec, double rho);
  // Sample given as distinct points with multiplicities.
  EmpiricalObjective(const std::map<Observation, std::size_t>& counts, const LossSpec& spec,
                     double rho);

  const std::vector<Observation>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const LossSpec& spec() const { return *spec_; }
  double rho() const { return rho_; }

  double mean_main(std::span<const double> y) const;
  double mean_constraint(std::span<const double> y) const;
  void add_mean_main_gradient(std::span<const double> y, double scale, std::span<double> out) const;
  void add_mean_constraint_gradient(std::span<const double> y, double scale,
                                    std::span<double> out) const;

 private:
  void validate() const;

  std::vector<Observation> points_;
  std::vector<double> weights_;  // sum to 1
  const LossSpec* spec_;
  double rho_;
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iters = 10'000;
};

struct SaddlePoint {
  Decision y_star;
  DualVar lambda_star;
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool success = false;
};

/// Exact maximizer of lambda (cbar(y) - gamma) - rho lambda^2 over [0, lambda_max].
/// With rho = 0 the maximizer is an endpoint; ties (cbar = gamma) go to 0.
DualVar inner_lambda(const Decision& y, const EmpiricalObjective& obj,
                     const ProblemGeometry& geometry);

/// g(y) = ubar(y) + rho |y|^2 + max_lambda [lambda (cbar(y) - gamma) - rho lambda^2].
double envelope_objective(const Decision& y, const EmpiricalObjective& obj,
                          const ProblemGeometry& geometry);

/// grad g(y) = grad ubar(y) + 2 rho y + lambda*(y) grad cbar(y).
std::vector<double> envelope_gradient(const Decision& y, const EmpiricalObjective& obj,
                                      const ProblemGeometry& geometry);

struct LagrangianMinimum {
  Decision y;
  int iterations = 0;
  double last_step = 0.0;
  bool converged = false;
};

/// Projected gradient descent on ubar(y) + rho |y|^2 + lambda (cbar(y) - gamma)
/// for a fixed lambda. Backtracking halves the step from 1.0 until the Armijo
/// condition (constant 1e-4) holds; stops once an accepted step is <= tol.
LagrangianMinimum minimize_lagrangian(const EmpiricalObjective& obj,
                                      const ProblemGeometry& geometry, double lambda,
                                      const SolverOptions& options,
                                      std::optional<Decision> start = std::nullopt);

/// Saddle point of the empirical regularized Lagrangian. Unique when rho > 0;
/// rho = 0 is accepted on a best-effort basis.
SaddlePoint solve_saddle(const EmpiricalObjective& obj, const ProblemGeometry& geometry,
                         const SolverOptions& options = {},
                         std::optional<Decision> start = std::nullopt);

/// (projection of the origin onto Y, 0).
Prediction default_prediction(const ProblemGeometry& geometry);

}  // namespace mha
