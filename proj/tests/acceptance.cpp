// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "mha/aggregator.hpp"
#include "mha/harness.hpp"
#include "mha/oracle.hpp"
#include "mha/saddle_solver.hpp"
#include "test_support.hpp"

using namespace mha;
using mha::testing::interval;
using mha::testing::obs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

// u = (y - x)^2 with either c = y^2 or c = y - x.
LossSpec random_spec(int trial, double gamma) {
  LossSpec spec = mha::testing::tracking_ridge(gamma);
  if (trial % 2 == 1) {
    spec.name = "tracking_linear";
    spec.constraint = [](std::span<const double> y, std::span<const double> x) { return y[0] - x[0]; };
  }
  return spec;
}

// 1. Dual-bisection oracle against an exhaustive (y, lambda) grid.
Outcome oracle_correctness() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> support_size(1, 5);
  const double lambda_max = 10.0;
  const auto geometry = interval(-1, 1, lambda_max);
  double worst_value = 0.0;
  double worst_cs = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int points = support_size(rng);
    std::vector<double> xs(points);
    for (double& x : xs) x = -1.0 + 2.0 * u(rng);
    const auto probs = mha::testing::random_probabilities(rng, points);
    // Linear budgets are drawn as y <= t with t in [-0.8, 0.3], i.e.
    // gamma = t - E[x], so every instance is feasible.
    double mean = 0.0;
    for (int i = 0; i < points; ++i) mean += probs[i] * xs[i];
    const double gamma = trial % 2 == 0 ? 0.02 + 0.28 * u(rng) : -0.8 + 1.1 * u(rng) - mean;
    const LossSpec spec = random_spec(trial, gamma);

    ConditionalLaw law;
    ConditionalLaw::State state;
    for (double x : xs) state.support.push_back(obs(x));
    state.probabilities = probs;
    law.states.push_back(state);
    const FeasibleOptimum result = solve_feasible_optimum(law, spec, geometry);
    if (!result.feasible) return {false, fmt("trial %d reported infeasible: %s", trial, result.reason.c_str())};

    const auto grid = mha::testing::grid_saddle_1d(spec, xs, probs, 0.0, -1.0, 1.0, lambda_max);
    worst_value = std::max(worst_value, std::abs(grid.value - result.value));
    const auto& s = result.states[0];
    worst_cs = std::max(worst_cs, std::abs(s.lambda * (s.constraint_mean - gamma)));
    if (!check_complementary_slackness(result, law, spec)) worst_cs = std::max(worst_cs, 1.0);
  }
  return {worst_value <= 5e-3 && worst_cs <= 1e-6,
          fmt("max |V* - grid| = %.3g (<= 5e-3), max CS residual = %.3g (<= 1e-6)", worst_value, worst_cs)};
}

// 2. Saddle solver against a grid, and the envelope gradient against finite
// differences.
Outcome saddle_correctness() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(1, 8);
  const double lambda_max = 5.0;
  const auto geometry = interval(-1, 1, lambda_max);
  double worst_y = 0.0;
  double worst_lambda = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = trial % 2 == 0 ? 0.02 + 0.3 * u(rng) : -0.2 + 0.4 * u(rng);
    const LossSpec spec = random_spec(trial, gamma);
    const int n = size(rng);
    std::vector<double> xs;
    std::vector<Observation> sample;
    for (int i = 0; i < n; ++i) {
      xs.push_back(-1.0 + 2.0 * u(rng));
      sample.push_back(obs(xs.back()));
    }
    const std::vector<double> probs(xs.size(), 1.0 / n);
    const double rho = 0.05 + 0.95 * u(rng);
    const SaddlePoint s = solve_saddle(EmpiricalObjective(sample, spec, rho), geometry);
    if (!s.success) return {false, fmt("trial %d: solver did not converge", trial)};
    const auto grid = mha::testing::grid_saddle_1d(spec, xs, probs, rho, -1.0, 1.0, lambda_max);
    const double grid_lambda = mha::testing::grid_dual_1d(spec, xs, probs, rho, -1.0, 1.0, lambda_max);
    worst_y = std::max(worst_y, std::abs(s.y_star.y[0] - grid.y));
    worst_lambda = std::max(worst_lambda, std::abs(s.lambda_star.lambda - grid_lambda));
  }

  double worst_fd = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double gamma = trial % 2 == 0 ? 0.02 + 0.3 * u(rng) : -0.2 + 0.4 * u(rng);
    const LossSpec spec = random_spec(trial, gamma);
    std::vector<Observation> sample;
    for (int i = 0; i < 4; ++i) sample.push_back(obs(-1.0 + 2.0 * u(rng)));
    const EmpiricalObjective obj(sample, spec, 0.05 + 0.95 * u(rng));
    const Decision y{{-0.9 + 1.8 * u(rng)}};
    const double analytic = envelope_gradient(y, obj, geometry)[0];
    const double h = 1e-6 * (1.0 + std::abs(y.y[0]));
    const double numeric = (envelope_objective(Decision{{y.y[0] + h}}, obj, geometry) -
                            envelope_objective(Decision{{y.y[0] - h}}, obj, geometry)) /
                           (2.0 * h);
    worst_fd = std::max(worst_fd, std::abs(numeric - analytic) / std::max(std::abs(analytic), 1e-2));
  }
  return {worst_y <= 5e-3 && worst_lambda <= 5e-3 && worst_fd <= 1e-4,
          fmt("max |dy| = %.3g, max |dlambda| = %.3g (<= 5e-3), envelope FD rel err = %.3g (<= 1e-4)", worst_y,
              worst_lambda, worst_fd)};
}

// 3. Exponential-weights regret on an adversarial stream. Observations are
// x = (a, b) with l(y, lambda, x) = y a + lambda b (u = y a, c = b, gamma = 0),
// so the decision and dual games decouple. Three experts play (-1, 0), (0, 1)
// and (1, 2); the adversary sets a = sign(y_n) and b = -sign(lambda_n - 1),
// i.e. always against the aggregate's current lean.
Outcome waa_regret() {
  LossSpec spec;
  spec.name = "bilinear";
  spec.main = [](std::span<const double> y, std::span<const double> x) { return y[0] * x[0]; };
  spec.constraint = [](std::span<const double>, std::span<const double> x) { return x[1]; };
  spec.gamma = 0.0;
  const std::vector<Prediction> experts{{Decision{{-1.0}}, DualVar{0.0}},
                                        {Decision{{0.0}}, DualVar{1.0}},
                                        {Decision{{1.0}}, DualVar{2.0}}};
  const std::vector<double> alphas(3, 1.0 / 3.0);
  std::vector<double> cum_y(3, 0.0);
  std::vector<double> cum_lambda(3, 0.0);
  WeightVector wy{alphas};
  WeightVector wl{alphas};
  double aggregate_total = 0.0;

  const std::vector<std::size_t> checkpoints{100, 200, 500, 1000, 2000, 5000, 10000, 20000, 50000, 100000};
  std::vector<double> gap_y;
  std::vector<double> gap_lambda;
  std::size_t next = 0;
  for (std::size_t n = 1; n <= checkpoints.back(); ++n) {
    const Prediction p = aggregate(experts, wy, wl);
    const Observation x{{p.y.y[0] >= 0.0 ? 1.0 : -1.0, p.lambda.lambda > 1.0 ? -1.0 : 1.0}};
    aggregate_total += lagrangian(p.y, p.lambda, x, spec);
    for (std::size_t e = 0; e < experts.size(); ++e) {
      cum_y[e] += lagrangian(experts[e].y, p.lambda, x, spec);
      cum_lambda[e] += lagrangian(p.y, experts[e].lambda, x, spec);
    }
    wy = update_weights(cum_y, alphas, n, WeightSide::decision);
    wl = update_weights(cum_lambda, alphas, n, WeightSide::dual);
    if (n == checkpoints[next]) {
      const double scale = 1.0 / std::sqrt(double(n));
      const double best_y = *std::min_element(cum_y.begin(), cum_y.end());
      const double best_lambda = *std::max_element(cum_lambda.begin(), cum_lambda.end());
      gap_y.push_back(scale * (aggregate_total - best_y));
      gap_lambda.push_back(scale * (best_lambda - aggregate_total));
      ++next;
    }
  }
  const std::size_t at_1000 = 3;
  const double max_y = *std::max_element(gap_y.begin(), gap_y.end());
  const double max_lambda = *std::max_element(gap_lambda.begin(), gap_lambda.end());
  std::ostringstream detail;
  detail << fmt("decision sqrt(N) gap max %.3f vs 3 x %.3f; dual max %.3f vs 3 x %.3f; N=1e5: %.3f / %.3f", max_y,
                gap_y[at_1000], max_lambda, gap_lambda[at_1000], gap_y.back(), gap_lambda.back());
  return {gap_y[at_1000] > 0.0 && gap_lambda[at_1000] > 0.0 && max_y < 3.0 * gap_y[at_1000] &&
              max_lambda < 3.0 * gap_lambda[at_1000],
          detail.str()};
}

ExperimentConfig acceptance_config(const char* file, std::size_t horizon) {
  ExperimentConfig config = load_config(std::filesystem::path(MHA_CONFIG_DIR) / file);
  config.horizon = horizon;
  config.validate();
  return config;
}

// Shared by criteria 4 and 5: the tight-budget iid run with K = H = 3.
const RunSummary& iid_run() {
  static const RunSummary summary = [] {
    ExperimentConfig config = acceptance_config("iid_ridge.toml", 50000);
    config.max_k = 3;
    config.max_h = 3;
    return simulate(config);
  }();
  return summary;
}

// 4. The c-average of the aggregate meets the budget on an instance whose
// unconstrained optimum violates it.
Outcome gamma_bounded() {
  const RunSummary& s = iid_run();
  if (!s.oracle || !s.oracle->feasible) return {false, "oracle unavailable or infeasible"};
  const double lambda_star = s.oracle->lambda_star;
  return {s.avg_constraint <= s.gamma + 0.02 && lambda_star > 0.0,
          fmt("N=%zu avg c = %.5f <= gamma + 0.02 = %.5f; oracle lambda* = %.4f > 0", s.rounds, s.avg_constraint,
              s.gamma + 0.02, lambda_star)};
}

// 5. Same run: the u-average reaches V*, and no budget-respecting strategy
// beats V* by more than 0.02.
Outcome gamma_universal() {
  const RunSummary& s = iid_run();
  if (!s.oracle || !s.oracle->feasible) return {false, "oracle unavailable or infeasible"};
  const double v_star = s.oracle->value;
  std::vector<StrategyRecord> strategies = s.experts;
  strategies.push_back(s.aggregate_record());
  std::size_t bounded = 0;
  double lowest = std::numeric_limits<double>::infinity();
  std::string lowest_label = "none";
  for (const auto& r : strategies) {
    if (r.avg_constraint > s.gamma + 0.02) continue;
    ++bounded;
    if (r.avg_main < lowest) {
      lowest = r.avg_main;
      lowest_label = r.label;
    }
  }
  const bool close = std::abs(s.avg_main - v_star) <= 0.05;
  const bool no_beater = lowest >= v_star - 0.02;
  return {close && no_beater,
          fmt("avg u = %.5f vs V* = %.5f (|gap| %.5f <= 0.05); %zu gamma-bounded strategies, lowest avg u %.5f (%s) "
              ">= V* - 0.02",
              s.avg_main, v_star, std::abs(s.avg_main - v_star), bounded, lowest, lowest_label.c_str())};
}

// 6. Two-state Markov chain with distinct per-state optima, K = H = 5.
Outcome markov_adaptation() {
  const ExperimentConfig config = acceptance_config("markov_tracking.toml", 50000);
  if (config.max_k < 2 || config.max_h < 2) return {false, "config must use K, H >= 2"};
  const std::vector<Observation> xs = generate(config.process, config.horizon);
  const LossSpec spec = config.loss_spec();
  std::size_t mismatched = 0;
  const RunSummary s = simulate(config, [&](const RoundTrace& row) {
    if (row.n <= 1000 && std::abs(spec.main(row.y, xs[row.n - 1].coords) - row.main_loss) > 1e-12) ++mismatched;
  });
  if (mismatched > 0) return {false, "replayed observation sequence does not match the run"};
  if (!s.oracle || !s.oracle->feasible) return {false, "oracle unavailable or infeasible"};

  // Best constant decision in hindsight on the same sequence, over a 1e-3 grid
  // of Y restricted to the budget.
  const auto& set = config.geometry.decision_set();
  double best_constant = std::numeric_limits<double>::infinity();
  double best_y = 0.0;
  const double lo = set.lower()[0];
  const double hi = set.upper()[0];
  for (long i = 0; i <= std::lround((hi - lo) / 1e-3); ++i) {
    const std::vector<double> y{lo + 1e-3 * double(i)};
    double u = 0.0;
    double c = 0.0;
    for (const auto& x : xs) {
      u += spec.main(y, x.coords);
      c += spec.constraint(y, x.coords);
    }
    u /= double(xs.size());
    c /= double(xs.size());
    if (c <= spec.gamma && u < best_constant) {
      best_constant = u;
      best_y = y[0];
    }
  }
  const double v_star = s.oracle->value;
  return {std::abs(s.avg_main - v_star) <= 0.05 && s.avg_main <= best_constant - 0.02,
          fmt("avg u = %.5f vs conditional V* = %.5f (|gap| %.5f <= 0.05); best constant y = %.3f has avg u %.5f "
              "(margin %.5f >= 0.02)",
              s.avg_main, v_star, std::abs(s.avg_main - v_star), best_y, best_constant, best_constant - s.avg_main)};
}

// 7. Structural invariant suites, each run from its unit-test binary and timed.
Outcome invariant_suites() {
  struct Suite {
    const char* name;
    const char* binary;
    const char* filter;
  };
  const std::vector<Suite> suites{
      {"partition nesting", MHA_TEST_PARTITION, "*nested*"},
      {"incremental index", MHA_TEST_PARTITION, "*incremental*"},
      {"weight normalization", MHA_TEST_AGGREGATOR, "*log-space*"},
      {"mixture feasibility", MHA_TEST_AGGREGATOR, "*mixtures*"},
      {"trace self-consistency", MHA_TEST_HARNESS, "*recomputable*"},
      {"determinism (traces)", MHA_TEST_HARNESS, "*byte-identical*"},
      {"determinism (processes)", MHA_TEST_PROCESSES, "*reproducible*"},
  };
  bool ok = true;
  std::ostringstream detail;
  for (const auto& suite : suites) {
    const std::string command = std::string("\"") + suite.binary + "\" --no-version --test-case=\"" + suite.filter +
                                "\" 2>&1";
    const auto start = std::chrono::steady_clock::now();
    std::string output;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) return {false, std::string("cannot launch ") + suite.binary};
    std::array<char, 4096> chunk{};
    while (std::fgets(chunk.data(), chunk.size(), pipe.get()) != nullptr) output += chunk.data();
    const int status = pclose(pipe.release());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::smatch counts;
    const bool ran = std::regex_search(output, counts, std::regex(R"(test cases:\s*(\d+)\s*\|\s*(\d+) passed)")) &&
                     counts[1] != "0" && counts[1] == counts[2];
    const bool pass = status == 0 && ran && seconds < 30.0;
    ok = ok && pass;
    detail << suite.name << (pass ? " ok" : " FAILED") << fmt(" %.2fs", seconds) << "; ";
  }
  return {ok, detail.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "oracle correctness", oracle_correctness},
      {2, "saddle solver correctness", saddle_correctness},
      {3, "exponential-weights regret", waa_regret},
      {4, "gamma-boundedness", gamma_bounded},
      {5, "gamma-universality", gamma_universal},
      {6, "markov adaptation", markov_adaptation},
      {7, "structural invariants", invariant_suites},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << outcome.detail
              << fmt(" [%.1fs]", seconds) << std::endl;
  }
  return all ? 0 : 1;
}
