#pragma once

// Helpers shared by the unit tests: small geometries, hand-written losses
// and brute-force grid oracles that never call into the solvers under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "mha/core_model.hpp"

namespace mha::testing {

inline ProblemGeometry interval(double lo, double hi, double lambda_max = 10.0, double D = 1.0) {
  return ProblemGeometry(1, D, DecisionSet::box({lo}, {hi}), lambda_max);
}

inline Observation obs(double x) { return Observation{{x}}; }

// u = (y - x)^2 summed over coordinates, c = |y|^2.
inline LossSpec tracking_ridge(double gamma) {
  LossSpec spec;
  spec.name = "tracking_ridge";
  spec.main = [](std::span<const double> y, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - x[i]) * (y[i] - x[i]);
    return s;
  };
  spec.constraint = [](std::span<const double> y, std::span<const double>) {
    return squared_norm(y);
  };
  spec.gamma = gamma;
  return spec;
}

// u = (y - target)^2, c = y, both ignoring x (one-dimensional).
inline LossSpec pull_linear(double target, double gamma) {
  LossSpec spec;
  spec.name = "pull_linear";
  spec.main = [target](std::span<const double> y, std::span<const double>) {
    return (y[0] - target) * (y[0] - target);
  };
  spec.constraint = [](std::span<const double> y, std::span<const double>) { return y[0]; };
  spec.gamma = gamma;
  return spec;
}

struct GridSaddle {
  double y = 0.0;
  double lambda = 0.0;
  double value = 0.0;
};

// min over a y-grid of max over a lambda-grid of
//   mean_u(y) + lambda (mean_c(y) - gamma) + rho (y^2 - lambda^2)
// for a one-dimensional weighted sample. Steps of 1e-3 by default.
inline GridSaddle grid_saddle_1d(const LossSpec& spec, const std::vector<double>& xs,
                                 const std::vector<double>& probs, double rho, double y_lo,
                                 double y_hi, double lambda_max, double step = 1e-3) {
  GridSaddle best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  const auto y_count = static_cast<long>(std::llround((y_hi - y_lo) / step));
  const auto l_count = static_cast<long>(std::llround(lambda_max / step));
  for (long i = 0; i <= y_count; ++i) {
    const double y = y_lo + step * static_cast<double>(i);
    const std::vector<double> yv{y};
    double mu = 0.0;
    double mc = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
      const std::vector<double> xv{xs[s]};
      mu += probs[s] * spec.main(yv, xv);
      mc += probs[s] * spec.constraint(yv, xv);
    }
    double inner = -std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (long j = 0; j <= l_count; ++j) {
      const double lam = step * static_cast<double>(j);
      const double v = mu + lam * (mc - spec.gamma) + rho * (y * y - lam * lam);
      if (v > inner) {
        inner = v;
        arg = lam;
      }
    }
    if (inner < best.value) best = {y, arg, inner};
  }
  return best;
}

// Dual side of the same grid problem: argmax over lambda of min over y.
inline double grid_dual_1d(const LossSpec& spec, const std::vector<double>& xs,
                           const std::vector<double>& probs, double rho, double y_lo, double y_hi,
                           double lambda_max, double step = 1e-3) {
  const auto y_count = static_cast<long>(std::llround((y_hi - y_lo) / step));
  const auto l_count = static_cast<long>(std::llround(lambda_max / step));
  std::vector<double> mu(static_cast<std::size_t>(y_count + 1));
  std::vector<double> mc(mu.size());
  for (long i = 0; i <= y_count; ++i) {
    const std::vector<double> yv{y_lo + step * static_cast<double>(i)};
    for (std::size_t s = 0; s < xs.size(); ++s) {
      const std::vector<double> xv{xs[s]};
      mu[i] += probs[s] * spec.main(yv, xv);
      mc[i] += probs[s] * spec.constraint(yv, xv);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (long j = 0; j <= l_count; ++j) {
    const double lam = step * static_cast<double>(j);
    double inner = std::numeric_limits<double>::infinity();
    for (long i = 0; i <= y_count; ++i) {
      const double y = y_lo + step * static_cast<double>(i);
      inner = std::min(inner, mu[i] + lam * (mc[i] - spec.gamma) + rho * (y * y - lam * lam));
    }
    if (inner > best) {
      best = inner;
      arg = lam;
    }
  }
  return arg;
}

inline std::vector<double> random_probabilities(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& q : p) total += (q = u(rng));
  for (double& q : p) q /= total;
  return p;
}

}  // namespace mha::testing
