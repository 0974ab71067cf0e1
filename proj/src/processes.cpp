#include "mha/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mha/errors.hpp"

namespace mha {

double PortableRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double PortableRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t PortableRng::categorical(const std::vector<double>& probabilities) {
  const double u = uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // Rounding left u above the last partial sum: take the last positive entry.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + " is empty");
  double total = 0.0;
  for (double q : p) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw ConfigError(std::string(what) + " has a negative or non-finite entry");
    }
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError(std::string(what) + " does not sum to 1");
}

void check_points(const std::vector<Observation>& points, const ProblemGeometry& geometry,
                  const char* what) {
  for (const Observation& x : points) {
    if (!geometry.in_cube(x)) {
      throw ConfigError(std::string(what) + " point lies outside the observation cube");
    }
  }
}

using Matrix = std::vector<std::vector<double>>;

Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t s = a.size();
  Matrix out(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t k = 0; k < s; ++k) {
      if (a[i][k] == 0.0) continue;
      for (std::size_t j = 0; j < s; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

void check_square_stochastic(const Matrix& transition) {
  if (transition.empty()) throw ConfigError("markov chain needs at least one state");
  for (const auto& row : transition) {
    if (row.size() != transition.size()) throw ConfigError("transition matrix must be square");
    check_distribution(row, "transition row");
  }
}

}  // namespace

bool is_primitive(const Matrix& transition) {
  check_square_stochastic(transition);
  const std::size_t s = transition.size();
  // Only the zero pattern matters; track it as 0/1 to avoid underflow.
  Matrix pattern(s, std::vector<double>(s, 0.0));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) pattern[i][j] = transition[i][j] > 0.0 ? 1.0 : 0.0;
  }
  Matrix power = pattern;
  for (std::size_t t = 1; t <= s * s; ++t) {
    bool positive = true;
    for (const auto& row : power) {
      positive = positive && std::all_of(row.begin(), row.end(), [](double v) { return v > 0.0; });
    }
    if (positive) return true;
    power = multiply(power, pattern);
    for (auto& row : power) {
      for (double& v : row) v = v > 0.0 ? 1.0 : 0.0;
    }
  }
  return false;
}

std::vector<double> stationary_distribution(const Matrix& transition) {
  if (!is_primitive(transition)) {
    throw ConfigError("markov chain must be irreducible and aperiodic");
  }
  const std::size_t s = transition.size();
  std::vector<double> pi(s, 1.0 / static_cast<double>(s));
  std::vector<double> next(s);
  for (int iter = 0; iter < 1'000'000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) next[j] += pi[i] * transition[i][j];
    }
    double total = 0.0;
    for (double v : next) total += v;
    double residual = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      next[j] /= total;
      residual += std::abs(next[j] - pi[j]);
    }
    pi.swap(next);
    if (residual <= 1e-12) return pi;
  }
  throw NumericError("power iteration for the stationary law did not converge");
}

void ProcessSpec::validate(const ProblemGeometry& geometry) const {
  switch (kind) {
    case Kind::iid:
      if (iid.support.size() != iid.probabilities.size()) {
        throw ConfigError("iid support and probabilities differ in length");
      }
      check_distribution(iid.probabilities, "iid probabilities");
      check_points(iid.support, geometry, "iid support");
      return;
    case Kind::markov:
      if (markov.states.size() != markov.transition.size()) {
        throw ConfigError("markov states and transition matrix differ in size");
      }
      check_points(markov.states, geometry, "markov state");
      if (!is_primitive(markov.transition)) {
        throw ConfigError("markov chain must be irreducible and aperiodic");
      }
      return;
    case Kind::ar1:
      if (!(std::abs(ar1.phi) < 1.0)) throw ConfigError("ar1 coefficient must satisfy |phi| < 1");
      if (!(ar1.sigma >= 0.0) || !std::isfinite(ar1.sigma)) {
        throw ConfigError("ar1 noise scale must be nonnegative");
      }
      if (ar1.d != geometry.d() || ar1.half_width != geometry.half_width()) {
        throw ConfigError("ar1 clip box must match the observation cube");
      }
      return;
  }
  throw ConfigError("unknown process kind");
}

namespace {
constexpr int kAr1BurnIn = 10'000;
}

ProcessGenerator::ProcessGenerator(const ProcessSpec& spec) : spec_(spec), rng_(spec.seed) {
  switch (spec_.kind) {
    case ProcessSpec::Kind::iid:
      if (spec_.iid.support.empty() || spec_.iid.support.size() != spec_.iid.probabilities.size()) {
        throw ConfigError("iid process needs matching support and probabilities");
      }
      break;
    case ProcessSpec::Kind::markov:
      if (spec_.markov.states.size() != spec_.markov.transition.size()) {
        throw ConfigError("markov states and transition matrix differ in size");
      }
      stationary_ = stationary_distribution(spec_.markov.transition);
      state_ = rng_.categorical(stationary_);
      break;
    case ProcessSpec::Kind::ar1:
      if (!(std::abs(spec_.ar1.phi) < 1.0) || spec_.ar1.d < 1) {
        throw ConfigError("invalid ar1 process");
      }
      ar_state_.assign(static_cast<std::size_t>(spec_.ar1.d), 0.0);
      for (int i = 0; i < kAr1BurnIn; ++i) next();
      break;
  }
}

Observation ProcessGenerator::next() {
  switch (spec_.kind) {
    case ProcessSpec::Kind::iid:
      return spec_.iid.support[rng_.categorical(spec_.iid.probabilities)];
    case ProcessSpec::Kind::markov: {
      Observation out = spec_.markov.states[state_];
      state_ = rng_.categorical(spec_.markov.transition[state_]);
      return out;
    }
    case ProcessSpec::Kind::ar1: {
      const double bound = spec_.ar1.half_width;
      for (double& v : ar_state_) {
        v = std::clamp(spec_.ar1.phi * v + spec_.ar1.sigma * rng_.normal(), -bound, bound);
      }
      return Observation{ar_state_};
    }
  }
  throw ConfigError("unknown process kind");
}

std::vector<Observation> generate(const ProcessSpec& spec, std::size_t n) {
  if (n < 1) throw ConfigError("generate needs n >= 1");
  ProcessGenerator generator(spec);
  std::vector<Observation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generator.next());
  return out;
}

ConditionalLaw stationary_law(const ProcessSpec& spec) {
  ConditionalLaw law;
  switch (spec.kind) {
    case ProcessSpec::Kind::iid:
      check_distribution(spec.iid.probabilities, "iid probabilities");
      law.states.push_back({1.0, spec.iid.support, spec.iid.probabilities});
      return law;
    case ProcessSpec::Kind::markov: {
      const auto pi = stationary_distribution(spec.markov.transition);
      for (std::size_t s = 0; s < pi.size(); ++s) {
        law.states.push_back({pi[s], spec.markov.states, spec.markov.transition[s]});
      }
      return law;
    }
    case ProcessSpec::Kind::ar1:
      throw ConfigError("ar1 processes have no closed-form conditional law");
  }
  throw ConfigError("unknown process kind");
}

}  // namespace mha
