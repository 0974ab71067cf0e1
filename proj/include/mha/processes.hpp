#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mha/core_model.hpp"

namespace mha {

/// Portable randomness: std::mt19937_64 (its output sequence is fixed by the
/// C++ standard) seeded with the 64-bit seed directly. Uniforms take the top
/// 53 bits; normals use the Box-Muller cosine branch. No std distribution
/// objects are involved, so traces are identical across standard libraries.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  double uniform();   // [0, 1)
  double normal();    // N(0, 1)
  // Index drawn from `probabilities` by inverse CDF.
  std::size_t categorical(const std::vector<double>& probabilities);

 private:
  std::mt19937_64 engine_;
};

struct IidSpec {
  std::vector<Observation> support;
  std::vector<double> probabilities;
};

struct MarkovSpec {
  std::vector<Observation> states;
  std::vector<std::vector<double>> transition;  // row-stochastic
};

struct Ar1Spec {
  double phi = 0.0;
  double sigma = 0.0;
  int d = 1;
  double half_width = 1.0;  // clip box [-D, D]^d
};

struct ProcessSpec {
  enum class Kind { iid, markov, ar1 };

  Kind kind = Kind::iid;
  IidSpec iid;
  MarkovSpec markov;
  Ar1Spec ar1;
  std::uint64_t seed = 0;

  // Throws ConfigError on any violated invariant (probabilities, stochastic
  // rows, irreducibility and aperiodicity, |phi| < 1, points inside the cube).
  void validate(const ProblemGeometry& geometry) const;
};

/// Distribution of the next observation given each conditioning state,
/// with the stationary weight of that state. An iid law has one state.
struct ConditionalLaw {
  struct State {
    double weight = 1.0;
    std::vector<Observation> support;
    std::vector<double> probabilities;
  };
  std::vector<State> states;
};

/// Streaming generator; deterministic for a given spec (including its seed).
class ProcessGenerator {
 public:
  explicit ProcessGenerator(const ProcessSpec& spec);

  Observation next();

 private:
  ProcessSpec spec_;
  PortableRng rng_;
  std::size_t state_ = 0;
  std::vector<double> ar_state_;
  std::vector<double> stationary_;
};

std::vector<Observation> generate(const ProcessSpec& spec, std::size_t n);

/// Stationary distribution of a Markov transition matrix by power iteration
/// (residual |pi P - pi|_1 <= 1e-12). Throws ConfigError when the chain is
/// reducible or periodic.
std::vector<double> stationary_distribution(const std::vector<std::vector<double>>& transition);

/// True when some power P^t with t <= S^2 has all entries positive.
bool is_primitive(const std::vector<std::vector<double>>& transition);

/// iid: the marginal itself; markov: one conditional row per previous state,
/// weighted by the stationary law. ar1 has no closed-form law (ConfigError).
ConditionalLaw stationary_law(const ProcessSpec& spec);

}  // namespace mha
