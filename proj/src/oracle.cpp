#include "mha/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mha/errors.hpp"
#include "mha/saddle_solver.hpp"

namespace mha {

namespace {

constexpr int kGridPoints = 201;

double expectation(const ConditionalLaw::State& state, const LossSpec& spec,
                   std::span<const double> y, bool constraint) {
  double sum = 0.0;
  for (std::size_t i = 0; i < state.support.size(); ++i) {
    if (state.probabilities[i] == 0.0) continue;
    const double value = constraint ? constraint_loss(spec, y, state.support[i])
                                    : main_loss(spec, y, state.support[i]);
    sum += state.probabilities[i] * value;
  }
  return sum;
}

// Minimizes E[u] + lambda E[c] (or E[c] alone) over Y for one state.
class StateProblem {
 public:
  StateProblem(const ConditionalLaw::State& state, const LossSpec& spec,
               const ProblemGeometry& geometry, double tol)
      : state_(state), spec_(spec), geometry_(geometry), tol_(tol) {}

  Decision minimize(double lambda, const Decision& start) const {
    Decision y = start;
    double value = objective(y.y, lambda);
    std::vector<double> grad(y.y.size());
    std::vector<double> trial(y.y.size());
    for (int iter = 0; iter < 100'000; ++iter) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < state_.support.size(); ++i) {
        const double p = state_.probabilities[i];
        if (p == 0.0) continue;
        add_main_gradient(spec_, y.y, state_.support[i], p, grad);
        if (lambda != 0.0) add_constraint_gradient(spec_, y.y, state_.support[i], p * lambda, grad);
      }
      double step = 1.0;
      std::vector<double> candidate;
      double candidate_value = value;
      for (int halving = 0; halving <= 60; ++halving, step *= 0.5) {
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = y.y[i] - step * grad[i];
        candidate = geometry_.decision_set().project(trial);
        double decrease = 0.0;
        for (std::size_t i = 0; i < trial.size(); ++i) decrease += grad[i] * (candidate[i] - y.y[i]);
        candidate_value = objective(candidate, lambda);
        if (candidate_value <= value + 1e-4 * decrease) break;
      }
      const double moved = distance(candidate, y.y);
      if (candidate_value <= value) {
        y.y = std::move(candidate);
        value = candidate_value;
      }
      if (moved <= tol_) break;
    }
    return y;
  }

  // Minimizes E[c] alone (lambda -> infinity direction).
  Decision minimize_constraint(const Decision& start) const {
    LossSpec only_constraint = spec_;
    only_constraint.main = [](std::span<const double>, std::span<const double>) { return 0.0; };
    only_constraint.main_grad = [](std::span<const double>, std::span<const double>,
                                   std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); };
    StateProblem inner(state_, only_constraint, geometry_, tol_);
    return inner.minimize(1.0, start);
  }

  double objective(std::span<const double> y, double lambda) const {
    double value = expectation(state_, spec_, y, false);
    if (lambda != 0.0) value += lambda * expectation(state_, spec_, y, true);
    return value;
  }

 private:
  const ConditionalLaw::State& state_;
  const LossSpec& spec_;
  const ProblemGeometry& geometry_;
  double tol_;
};

// Best feasible main-loss value on a coarse grid over Y's bounding box
// (points mapped into Y by projection), refined once around the best point.
double grid_search(const ConditionalLaw::State& state, const LossSpec& spec,
                   const ProblemGeometry& geometry) {
  const DecisionSet& set = geometry.decision_set();
  const int m = geometry.m();
  std::vector<double> lower = set.lower();
  std::vector<double> upper = set.upper();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_point;

  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> step(m);
    for (int i = 0; i < m; ++i) step[i] = (upper[i] - lower[i]) / (kGridPoints - 1);
    std::vector<int> counter(m, 0);
    std::vector<double> point(m);
    while (true) {
      for (int i = 0; i < m; ++i) point[i] = lower[i] + step[i] * counter[i];
      const auto y = set.project(point);
      if (expectation(state, spec, y, true) <= spec.gamma) {
        const double value = expectation(state, spec, y, false);
        if (value < best) {
          best = value;
          best_point = y;
        }
      }
      int axis = 0;
      while (axis < m && ++counter[axis] == kGridPoints) counter[axis++] = 0;
      if (axis == m) break;
    }
    if (best_point.empty()) break;
    for (int i = 0; i < m; ++i) {
      const double half = 2.0 * step[i];
      lower[i] = std::max(set.lower()[i], best_point[i] - half);
      upper[i] = std::min(set.upper()[i], best_point[i] + half);
    }
  }
  return best;
}

}  // namespace

FeasibleOptimum solve_feasible_optimum(const ConditionalLaw& law, const LossSpec& spec,
                                       const ProblemGeometry& geometry,
                                       const OracleOptions& options) {
  if (law.states.empty()) throw ConfigError("oracle needs at least one conditioning state");
  FeasibleOptimum result;
  result.feasible = true;
  const double lambda_max = geometry.lambda_max();
  const Decision origin = default_prediction(geometry).y;

  for (std::size_t s = 0; s < law.states.size(); ++s) {
    const auto& state = law.states[s];
    if (state.support.size() != state.probabilities.size() || state.support.empty()) {
      throw ConfigError("conditional law has mismatched support and probabilities");
    }
    StateProblem problem(state, spec, geometry, options.inner_tol);
    StateOptimum optimum;
    optimum.weight = state.weight;
    optimum.grid_value = std::numeric_limits<double>::quiet_NaN();

    const Decision most_feasible = problem.minimize_constraint(origin);
    if (!(expectation(state, spec, most_feasible.y, true) < spec.gamma)) {
      result.feasible = false;
      result.reason = "state " + std::to_string(s) + ": no decision has E[c] < gamma";
      return result;
    }

    auto probe = [&](double lambda, const Decision& start) {
      Decision y = problem.minimize(lambda, start);
      const double c = expectation(state, spec, y.y, true);
      optimum.bisection_trace.emplace_back(lambda, c);
      return std::pair{y, c};
    };

    auto [y_low, c_low] = probe(0.0, origin);
    if (c_low <= spec.gamma) {
      optimum.y = y_low;
      optimum.lambda = 0.0;
    } else {
      auto [y_high, c_high] = probe(lambda_max, y_low);
      if (c_high > spec.gamma + options.constraint_tol) {
        result.feasible = false;
        result.reason = "state " + std::to_string(s) + ": constraint still violated at lambda_max";
        return result;
      }
      double lo = 0.0;
      double hi = lambda_max;
      Decision y_best = y_high;
      double lambda_best = lambda_max;
      while (hi - lo > 1e-14 * (1.0 + lambda_max)) {
        const double mid = 0.5 * (lo + hi);
        auto [y_mid, c_mid] = probe(mid, y_best);
        if (c_mid > spec.gamma) {
          lo = mid;
        } else {
          hi = mid;
          y_best = y_mid;
          lambda_best = mid;
        }
        if (std::max(1.0, mid) * std::abs(c_mid - spec.gamma) <= options.constraint_tol) {
          y_best = y_mid;
          lambda_best = mid;
          break;
        }
      }
      optimum.y = y_best;
      optimum.lambda = lambda_best;
    }
    optimum.main_mean = expectation(state, spec, optimum.y.y, false);
    optimum.constraint_mean = expectation(state, spec, optimum.y.y, true);

    if (options.cross_check && geometry.m() <= 2) {
      optimum.grid_value = grid_search(state, spec, geometry);
      if (std::abs(optimum.grid_value - optimum.main_mean) > options.cross_check_tol) {
        throw NumericError("oracle cross-check failed in state " + std::to_string(s) +
                           ": dual bisection " + std::to_string(optimum.main_mean) +
                           " vs grid " + std::to_string(optimum.grid_value));
      }
    }
    result.value += optimum.weight * optimum.main_mean;
    result.lambda_star = std::max(result.lambda_star, optimum.lambda);
    result.states.push_back(std::move(optimum));
  }
  return result;
}

bool check_complementary_slackness(const FeasibleOptimum& result, const ConditionalLaw& law,
                                   const LossSpec& spec) {
  if (!result.feasible || result.states.size() != law.states.size()) return false;
  for (std::size_t s = 0; s < law.states.size(); ++s) {
    const StateOptimum& optimum = result.states[s];
    const double slack = expectation(law.states[s], spec, optimum.y.y, true) - spec.gamma;
    if (std::abs(optimum.lambda * slack) > 1e-6) return false;
  }
  return true;
}

std::string format_optimum(const FeasibleOptimum& result) {
  std::ostringstream out;
  out.precision(17);
  out << "feasible=" << (result.feasible ? "true" : "false") << "\n";
  if (!result.feasible) {
    out << "reason=" << result.reason << "\n";
    return out.str();
  }
  out << "value=" << result.value << "\n";
  out << "lambda_star=" << result.lambda_star << "\n";
  out << "states=" << result.states.size() << "\n";
  for (std::size_t s = 0; s < result.states.size(); ++s) {
    const StateOptimum& st = result.states[s];
    const std::string prefix = "state." + std::to_string(s) + ".";
    out << prefix << "weight=" << st.weight << "\n";
    out << prefix << "y=";
    for (std::size_t i = 0; i < st.y.y.size(); ++i) out << (i ? "," : "") << st.y.y[i];
    out << "\n";
    out << prefix << "lambda=" << st.lambda << "\n";
    out << prefix << "main_mean=" << st.main_mean << "\n";
    out << prefix << "constraint_mean=" << st.constraint_mean << "\n";
    out << prefix << "grid_value=" << st.grid_value << "\n";
  }
  return out.str();
}

}  // namespace mha
