#include "mha/experts.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "mha/errors.hpp"

namespace mha {

std::string ExpertId::label() const {
  switch (kind) {
    case Kind::grid:
      return "grid:" + std::to_string(k) + ":" + std::to_string(h);
    case Kind::const_max:
      return "const_max";
    case Kind::const_zero:
      return "const_zero";
  }
  return "unknown";
}

ExpertId ExpertId::parse(const std::string& label) {
  if (label == "const_max") return constant_max();
  if (label == "const_zero") return constant_zero();
  if (label.rfind("grid:", 0) == 0) {
    const auto colon = label.find(':', 5);
    if (colon != std::string::npos) {
      try {
        std::size_t used_k = 0;
        std::size_t used_h = 0;
        const std::string k_text = label.substr(5, colon - 5);
        const std::string h_text = label.substr(colon + 1);
        const int k = std::stoi(k_text, &used_k);
        const int h = std::stoi(h_text, &used_h);
        if (used_k == k_text.size() && used_h == h_text.size() && k >= 1 && h >= 1) {
          return grid(k, h);
        }
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("unknown expert label '" + label + "'");
}

History::History(PartitionFamily family, int max_level) : family_(std::move(family)) {
  if (max_level < 1 || max_level > family_.max_level()) {
    throw ConfigError("history partition depth out of range");
  }
  ids_.resize(static_cast<std::size_t>(max_level));
}

void History::append(const Observation& x) {
  std::vector<CellId> quantized;
  quantized.reserve(ids_.size());
  for (int h = 1; h <= max_level(); ++h) quantized.push_back(family_.quantize(x, h));
  observations_.push_back(x);
  for (std::size_t level = 0; level < ids_.size(); ++level) ids_[level].push_back(quantized[level]);
}

std::span<const CellId> History::ids(int h) const {
  if (h < 1 || h > max_level()) throw ConfigError("history has no ids at that level");
  return ids_[static_cast<std::size_t>(h - 1)];
}

ExpertState::ExpertState(ExpertId id, const ProblemGeometry& geometry)
    : id_(id), last_(default_prediction(geometry)) {
  switch (id_.kind) {
    case ExpertId::Kind::grid:
      if (id_.k < 1 || id_.h < 1) throw ConfigError("grid expert indices must be positive");
      index_.emplace(id_.k);
      break;
    case ExpertId::Kind::const_max:
      last_.lambda = DualVar{geometry.lambda_max()};
      break;
    case ExpertId::Kind::const_zero:
      break;
  }
}

void ExpertState::observe(const History& history) {
  if (!index_) return;
  index_->append(history.ids(id_.h), history.observations().back());
}

void ExpertState::add_losses(double y_loss, double lambda_loss) {
  if (!std::isfinite(y_loss) || !std::isfinite(lambda_loss)) {
    throw LossError("expert " + id_.label() + " received a non-finite loss");
  }
  cumulative_y_ += y_loss;
  cumulative_lambda_ += lambda_loss;
}

std::optional<Decision> ExpertState::warm_start(const ContextString& w) const {
  auto it = warm_.find(w);
  if (it == warm_.end()) return std::nullopt;
  return it->second;
}

Prediction expert_predict(ExpertState& state, const History& history, std::size_t n,
                          const ProblemGeometry& geometry, const LossSpec& spec,
                          const SolverOptions& options) {
  const ExpertId& id = state.id();
  if (id.kind != ExpertId::Kind::grid) return state.last_prediction();
  if (history.size() + 1 != n) throw ConfigError("expert_predict needs x_1..x_{n-1}");

  Prediction out = default_prediction(geometry);
  const auto w = window_from_ids(history.ids(id.h), n, id.k);
  const ContextBucket* bucket = w ? state.context_index()->find(*w) : nullptr;
  if (bucket != nullptr && !bucket->indices.empty()) {
    const double rho = 1.0 / static_cast<double>(n) + 1.0 / id.h + 1.0 / id.k;
    try {
      const EmpiricalObjective objective(bucket->counts, spec, rho);
      const SaddlePoint saddle = solve_saddle(objective, geometry, options, state.warm_start(*w));
      out = Prediction{saddle.y_star, saddle.lambda_star};
      state.remember(*w, saddle.y_star);
    } catch (const std::exception& e) {
      state.record_failure();
      std::cerr << "expert " << id.label() << " failed at round " << n << ": " << e.what()
                << "; keeping its previous prediction\n";
      return state.last_prediction();
    }
  }
  state.set_prediction(out);
  return out;
}

void update_cumulative(ExpertState& state, double own_y_loss, double own_lambda_loss) {
  state.add_losses(own_y_loss, own_lambda_loss);
}

std::vector<ExpertId> truncated_grid(int max_k, int max_h) {
  if (max_k < 1 || max_h < 1) throw ConfigError("expert truncation K, H must be positive");
  std::vector<ExpertId> ids;
  for (int k = 1; k <= max_k; ++k) {
    for (int h = 1; h <= max_h; ++h) ids.push_back(ExpertId::grid(k, h));
  }
  ids.push_back(ExpertId::constant_max());
  ids.push_back(ExpertId::constant_zero());
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<double> prior_weights(std::span<const ExpertId> ids) {
  std::vector<double> alphas;
  alphas.reserve(ids.size());
  for (const ExpertId& id : ids) {
    alphas.push_back(id.kind == ExpertId::Kind::grid ? std::ldexp(1.0, -(id.k + id.h)) : 0.125);
  }
  double total = 0.0;
  for (double a : alphas) total += a;
  if (!(total > 0.0)) throw ConfigError("prior weights need at least one expert");
  for (double& a : alphas) a /= total;
  return alphas;
}

}  // namespace mha
