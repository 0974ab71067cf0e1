#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mha/core_model.hpp"
#include "mha/processes.hpp"

namespace mha {

/// Constrained optimum for one conditioning state.
struct StateOptimum {
  double weight = 1.0;           // stationary probability of the state
  Decision y;
  double lambda = 0.0;
  double main_mean = 0.0;        // E[u(y, X)]
  double constraint_mean = 0.0;  // E[c(y, X)]
  // (lambda, E[c(y_lambda)]) for every dual probe, in probe order.
  std::vector<std::pair<double, double>> bisection_trace;
  double grid_value = 0.0;       // brute-force cross-check (m <= 2), else NaN
};

/// Gamma-feasible optimal value V* = sum_s weight_s * E_s[u(y*_s, X)].
struct FeasibleOptimum {
  bool feasible = false;
  std::string reason;            // why feasible is false
  double value = 0.0;
  double lambda_star = 0.0;      // largest per-state dual
  std::vector<StateOptimum> states;
};

struct OracleOptions {
  double inner_tol = 1e-8;
  double constraint_tol = 1e-6;
  double cross_check_tol = 1e-3;
  bool cross_check = true;
};

/// Solves min E[u(y, X)] s.t. E[c(y, X)] <= gamma for each conditioning state
/// by bisection on the dual: for a fixed lambda, y_lambda minimizes
/// E[u] + lambda E[c] by projected gradient, and E[c(y_lambda)] is
/// non-increasing in lambda. A state with no y satisfying E[c] < gamma, or
/// whose constraint is still violated at lambda_max, makes the result
/// infeasible. When m <= 2 a refined grid search over Y re-solves each state
/// and a value mismatch above cross_check_tol throws NumericError.
FeasibleOptimum solve_feasible_optimum(const ConditionalLaw& law, const LossSpec& spec,
                                       const ProblemGeometry& geometry,
                                       const OracleOptions& options = {});

/// |lambda_s (E_s[c(y_s)] - gamma)| <= 1e-6 for every state.
bool check_complementary_slackness(const FeasibleOptimum& result, const ConditionalLaw& law,
                                   const LossSpec& spec);

/// key=value rendering used for oracle files.
std::string format_optimum(const FeasibleOptimum& result);

}  // namespace mha
