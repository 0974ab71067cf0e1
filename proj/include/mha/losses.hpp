#pragma once

#include <string>
#include <vector>

#include "mha/core_model.hpp"

namespace mha {

// Built-in losses, all convex in y:
//   quadratic_tracking  |y - x|^2            (needs m == d)
//   ridge_constraint    |y|^2
//   linear_cost         <y, x>               (needs m == d)
//   variance_proxy      |y|^2 * mean_i x_i^2
struct NamedLoss {
  LossFn value;
  GradFn gradient;
};

NamedLoss builtin_loss(const std::string& name, const ProblemGeometry& geometry);
std::vector<std::string> builtin_loss_names();

LossSpec make_loss_spec(const std::string& main_name, const std::string& constraint_name,
                        double gamma, const ProblemGeometry& geometry);

}  // namespace mha
