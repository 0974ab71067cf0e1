#pragma once

#include <compare>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mha {

inline constexpr double kFeasibilityTol = 1e-9;

/// A point of the observation cube [-D, D]^d.
struct Observation {
  std::vector<double> coords;

  auto operator<=>(const Observation&) const = default;
  bool operator==(const Observation&) const = default;
};

/// A point of the decision set Y.
struct Decision {
  std::vector<double> y;

  bool operator==(const Decision&) const = default;
};

/// Scalar dual variable in [0, lambda_max].
struct DualVar {
  double lambda = 0.0;

  bool operator==(const DualVar&) const = default;
};

/// A (decision, dual) pair as played by an expert or by the aggregate.
struct Prediction {
  Decision y;
  DualVar lambda;
};

/// Convex compact decision set. Boxes and the probability simplex are
/// supported; both admit an exact Euclidean projection.
class DecisionSet {
 public:
  enum class Kind { box, simplex };

  static DecisionSet box(std::vector<double> lower, std::vector<double> upper);
  static DecisionSet simplex(int m);

  Kind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(lower_.size()); }
  // Bounding box; for the simplex this is [0, 1]^m.
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  std::vector<double> project(std::span<const double> v) const;
  bool contains(std::span<const double> v, double tol = kFeasibilityTol) const;

 private:
  DecisionSet(Kind kind, std::vector<double> lower, std::vector<double> upper)
      : kind_(kind), lower_(std::move(lower)), upper_(std::move(upper)) {}

  Kind kind_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Observation cube, decision set and dual interval [0, lambda_max].
class ProblemGeometry {
 public:
  ProblemGeometry(int d, double half_width, DecisionSet decision_set, double lambda_max);

  int d() const { return d_; }
  double half_width() const { return half_width_; }
  int m() const { return decision_set_.dimension(); }
  const DecisionSet& decision_set() const { return decision_set_; }
  double lambda_max() const { return lambda_max_; }

  bool in_cube(const Observation& x) const;
  // Throws RangeError when x has the wrong length or leaves the cube.
  void check_observation(const Observation& x) const;

 private:
  int d_;
  double half_width_;
  DecisionSet decision_set_;
  double lambda_max_;
};

using LossFn = std::function<double(std::span<const double> y, std::span<const double> x)>;
// Writes the gradient with respect to y into grad (length m).
using GradFn = std::function<void(std::span<const double> y, std::span<const double> x,
                                  std::span<double> grad)>;

/// Main loss u, constraint loss c and threshold gamma. Both losses must be
/// finite on Y x X and convex in y; that is asserted by the caller, not
/// checked here. Missing gradients fall back to central differences.
struct LossSpec {
  std::string name;
  LossFn main;
  LossFn constraint;
  GradFn main_grad;
  GradFn constraint_grad;
  double gamma = 0.0;
  bool convex_in_y = true;
  bool continuous = true;
};

double main_loss(const LossSpec& spec, std::span<const double> y, const Observation& x);
double constraint_loss(const LossSpec& spec, std::span<const double> y, const Observation& x);

// Accumulates scale * gradient into out.
void add_main_gradient(const LossSpec& spec, std::span<const double> y, const Observation& x,
                       double scale, std::span<double> out);
void add_constraint_gradient(const LossSpec& spec, std::span<const double> y,
                             const Observation& x, double scale, std::span<double> out);

// Central differences with step 1e-6 * (1 + |y|).
void finite_difference_gradient(const LossFn& f, std::span<const double> y,
                                std::span<const double> x, std::span<double> grad);

/// u(y,x) + lambda * (c(y,x) - gamma).
double lagrangian(const Decision& y, DualVar lam, const Observation& x, const LossSpec& spec);

/// lagrangian + rho * (|y|^2 - lambda^2).
double regularized_lagrangian(const Decision& y, DualVar lam, const Observation& x,
                              const LossSpec& spec, double rho);

Decision project_decision(std::span<const double> v, const ProblemGeometry& geometry);

double squared_norm(std::span<const double> v);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace mha
