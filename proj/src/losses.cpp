#include "mha/losses.hpp"

#include <cmath>

#include "mha/errors.hpp"

namespace mha {

namespace {

void require_matching_dims(const std::string& name, const ProblemGeometry& geometry) {
  if (geometry.m() != geometry.d()) {
    throw ConfigError("loss '" + name + "' needs decision dimension m equal to observation dimension d");
  }
}

}  // namespace

std::vector<std::string> builtin_loss_names() {
  return {"quadratic_tracking", "ridge_constraint", "linear_cost", "variance_proxy"};
}

NamedLoss builtin_loss(const std::string& name, const ProblemGeometry& geometry) {
  if (name == "quadratic_tracking") {
    require_matching_dims(name, geometry);
    return {[](std::span<const double> y, std::span<const double> x) {
              double sum = 0.0;
              for (std::size_t i = 0; i < y.size(); ++i) sum += (y[i] - x[i]) * (y[i] - x[i]);
              return sum;
            },
            [](std::span<const double> y, std::span<const double> x, std::span<double> g) {
              for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * (y[i] - x[i]);
            }};
  }
  if (name == "ridge_constraint") {
    return {[](std::span<const double> y, std::span<const double>) { return squared_norm(y); },
            [](std::span<const double> y, std::span<const double>, std::span<double> g) {
              for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * y[i];
            }};
  }
  if (name == "linear_cost") {
    require_matching_dims(name, geometry);
    return {[](std::span<const double> y, std::span<const double> x) {
              double sum = 0.0;
              for (std::size_t i = 0; i < y.size(); ++i) sum += y[i] * x[i];
              return sum;
            },
            [](std::span<const double>, std::span<const double> x, std::span<double> g) {
              for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i];
            }};
  }
  if (name == "variance_proxy") {
    auto scale = [](std::span<const double> x) {
      return squared_norm(x) / static_cast<double>(x.size());
    };
    return {[scale](std::span<const double> y, std::span<const double> x) {
              return squared_norm(y) * scale(x);
            },
            [scale](std::span<const double> y, std::span<const double> x, std::span<double> g) {
              const double s = scale(x);
              for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * y[i] * s;
            }};
  }
  throw ConfigError("unknown loss '" + name + "'");
}

LossSpec make_loss_spec(const std::string& main_name, const std::string& constraint_name,
                        double gamma, const ProblemGeometry& geometry) {
  if (!std::isfinite(gamma)) throw ConfigError("gamma must be finite");
  NamedLoss main = builtin_loss(main_name, geometry);
  NamedLoss constraint = builtin_loss(constraint_name, geometry);
  LossSpec spec;
  spec.name = main_name + "/" + constraint_name;
  spec.main = std::move(main.value);
  spec.main_grad = std::move(main.gradient);
  spec.constraint = std::move(constraint.value);
  spec.constraint_grad = std::move(constraint.gradient);
  spec.gamma = gamma;
  return spec;
}

}  // namespace mha
