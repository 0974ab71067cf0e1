#include "mha/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mha/errors.hpp"

namespace mha {

DecisionSet DecisionSet::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw ConfigError("box decision set needs equal-length, nonempty bounds");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i]) {
      throw ConfigError("box decision set bounds must be finite with lower <= upper");
    }
  }
  return DecisionSet(Kind::box, std::move(lower), std::move(upper));
}

DecisionSet DecisionSet::simplex(int m) {
  if (m < 1) throw ConfigError("simplex dimension must be positive");
  return DecisionSet(Kind::simplex, std::vector<double>(m, 0.0), std::vector<double>(m, 1.0));
}

std::vector<double> DecisionSet::project(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != dimension()) {
    throw ConfigError("projection input has wrong dimension");
  }
  std::vector<double> out(v.begin(), v.end());
  switch (kind_) {
    case Kind::box:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i], lower_[i], upper_[i]);
      return out;
    case Kind::simplex: {
      // Sort-and-threshold projection onto {y >= 0, sum y = 1}.
      std::vector<double> sorted(out);
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      double cumulative = 0.0;
      double theta = 0.0;
      for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumulative += sorted[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) theta = candidate;
      }
      for (double& value : out) value = std::max(value - theta, 0.0);
      return out;
    }
  }
  throw ConfigError("unsupported decision set kind");
}

bool DecisionSet::contains(std::span<const double> v, double tol) const {
  if (static_cast<int>(v.size()) != dimension()) return false;
  return distance(v, project(v)) <= tol;
}

ProblemGeometry::ProblemGeometry(int d, double half_width, DecisionSet decision_set,
                                 double lambda_max)
    : d_(d), half_width_(half_width), decision_set_(std::move(decision_set)),
      lambda_max_(lambda_max) {
  if (d_ < 1) throw ConfigError("observation dimension d must be positive");
  if (!(half_width_ > 0.0) || !std::isfinite(half_width_)) {
    throw ConfigError("observation half-width D must be positive");
  }
  if (!(lambda_max_ > 0.0) || !std::isfinite(lambda_max_)) {
    throw ConfigError("lambda_max must be positive");
  }
}

bool ProblemGeometry::in_cube(const Observation& x) const {
  if (static_cast<int>(x.coords.size()) != d_) return false;
  return std::all_of(x.coords.begin(), x.coords.end(), [this](double c) {
    return c >= -half_width_ && c <= half_width_;
  });
}

void ProblemGeometry::check_observation(const Observation& x) const {
  if (static_cast<int>(x.coords.size()) != d_) {
    throw RangeError("observation has " + std::to_string(x.coords.size()) +
                     " coordinates, expected " + std::to_string(d_));
  }
  if (!in_cube(x)) throw RangeError("observation outside the cube [-D, D]^d");
}

namespace {

double checked(double value, const LossSpec& spec, const char* which) {
  if (!std::isfinite(value)) {
    throw LossError("loss '" + spec.name + "' returned a non-finite " + which + " value");
  }
  return value;
}

void accumulate_gradient(const LossFn& f, const GradFn& grad, const LossSpec& spec,
                         std::span<const double> y, const Observation& x, double scale,
                         std::span<double> out) {
  std::vector<double> g(y.size(), 0.0);
  if (grad) {
    grad(y, x.coords, g);
  } else {
    finite_difference_gradient(f, y, x.coords, g);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw LossError("loss '" + spec.name + "' produced a non-finite gradient");
    }
    out[i] += scale * g[i];
  }
}

}  // namespace

double main_loss(const LossSpec& spec, std::span<const double> y, const Observation& x) {
  return checked(spec.main(y, x.coords), spec, "main-loss");
}

double constraint_loss(const LossSpec& spec, std::span<const double> y, const Observation& x) {
  return checked(spec.constraint(y, x.coords), spec, "constraint-loss");
}

void add_main_gradient(const LossSpec& spec, std::span<const double> y, const Observation& x,
                       double scale, std::span<double> out) {
  accumulate_gradient(spec.main, spec.main_grad, spec, y, x, scale, out);
}

void add_constraint_gradient(const LossSpec& spec, std::span<const double> y,
                             const Observation& x, double scale, std::span<double> out) {
  accumulate_gradient(spec.constraint, spec.constraint_grad, spec, y, x, scale, out);
}

void finite_difference_gradient(const LossFn& f, std::span<const double> y,
                                std::span<const double> x, std::span<double> grad) {
  const double step = 1e-6 * (1.0 + std::sqrt(squared_norm(y)));
  std::vector<double> probe(y.begin(), y.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double plus = f(probe, x);
    probe[i] = saved - step;
    const double minus = f(probe, x);
    probe[i] = saved;
    grad[i] = (plus - minus) / (2.0 * step);
  }
}

double lagrangian(const Decision& y, DualVar lam, const Observation& x, const LossSpec& spec) {
  return main_loss(spec, y.y, x) + lam.lambda * (constraint_loss(spec, y.y, x) - spec.gamma);
}

double regularized_lagrangian(const Decision& y, DualVar lam, const Observation& x,
                              const LossSpec& spec, double rho) {
  return lagrangian(y, lam, x, spec) + rho * (squared_norm(y.y) - lam.lambda * lam.lambda);
}

Decision project_decision(std::span<const double> v, const ProblemGeometry& geometry) {
  for (double value : v) {
    if (!std::isfinite(value)) throw NumericError("cannot project a non-finite vector");
  }
  return Decision{geometry.decision_set().project(v)};
}

double squared_norm(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

}  // namespace mha
