#include <cmath>
#include <random>

#include "doctest.h"
#include "mha/errors.hpp"
#include "mha/partition.hpp"
#include "test_support.hpp"

using namespace mha;
using mha::testing::obs;

TEST_CASE("quantize places points in half-open dyadic cells") {
  const PartitionFamily line(1, 1.0);
  CHECK(line.quantize(obs(0.1), 1) == 1);
  CHECK(line.quantize(obs(-1.0), 1) == 0);
  CHECK(line.quantize(obs(1.0), 1) == 1);
  CHECK(line.quantize(obs(0.0), 1) == 1);  // edge goes to the upper cell
  CHECK(line.quantize(obs(-0.5), 2) == 1);

  const PartitionFamily square(2, 1.0);
  // Per-axis indices (0, 3) of the 4 x 4 grid.
  CHECK(square.axis_indices(Observation{{-0.9, 0.9}}, 2) == std::vector<std::uint64_t>{0, 3});
  CHECK(square.quantize(Observation{{-0.9, 0.9}}, 2) == 3);
  CHECK(square.quantize(Observation{{0.9, -0.9}}, 2) == 12);
  CHECK(square.cell_count(2) == 16);

  CHECK_THROWS_AS(line.quantize(obs(1.5), 1), RangeError);
  CHECK_THROWS_AS(line.quantize(obs(std::nan("")), 1), RangeError);
  CHECK_THROWS_AS(line.quantize(obs(0.0), 0), ConfigError);
}

TEST_CASE("partitions are nested and their diameter shrinks") {
  std::mt19937_64 rng(5);
  for (int d : {1, 2, 3}) {
    const double D = 2.5;
    const PartitionFamily family(d, D);
    std::uniform_real_distribution<double> u(-D, D);
    for (int trial = 0; trial < 10'000; ++trial) {
      Observation x;
      for (int i = 0; i < d; ++i) x.coords.push_back(u(rng));
      for (int h = 1; h < 6; ++h) {
        REQUIRE(family.parent(family.quantize(x, h + 1), h + 1) == family.quantize(x, h));
      }
    }
    for (int h = 1; h <= 6; ++h) {
      CHECK(family.max_cell_diameter(h) == doctest::Approx(2 * D * std::sqrt(double(d)) / std::pow(2.0, h)));
      CHECK(family.max_cell_diameter(h + 1) < family.max_cell_diameter(h));
    }
  }
}

TEST_CASE("quantize_window reads the k observations before round n") {
  const PartitionFamily line(1, 1.0);
  const std::vector<Observation> history{obs(0.3), obs(-0.5), obs(0.5)};

  const auto one = quantize_window(line, history, 4, 1, 1);
  REQUIRE(one);
  CHECK(one->ids == std::vector<CellId>{1});

  const auto two = quantize_window(line, std::vector{obs(-0.5), obs(0.5)}, 3, 2, 1);
  REQUIRE(two);
  CHECK(two->ids == std::vector<CellId>{0, 1});

  CHECK_FALSE(quantize_window(line, std::vector{obs(0.1), obs(0.2)}, 3, 3, 1));
}

TEST_CASE("match_set examples by direct scan") {
  const PartitionFamily line(1, 1.0);
  const std::vector<Observation> history{obs(0.5), obs(-0.5), obs(0.5), obs(-0.5)};
  CHECK(match_set(line, history, 5, 1, 1, ContextString{{1}}) == std::vector<std::size_t>{2, 4});
  CHECK(match_set(line, history, 5, 1, 1, ContextString{{0}}) == std::vector<std::size_t>{3});
  CHECK(match_set(line, history, 2, 1, 1, ContextString{{1}}).empty());
  CHECK(match_set(line, history, 4, 3, 1, ContextString{{1, 0, 1}}).empty());
}

TEST_CASE("incremental context index equals the direct scan") {
  std::mt19937_64 rng(6);
  for (int d : {1, 2}) {
    const PartitionFamily family(d, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> length(1, 500);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<Observation> history;
      const int n_obs = length(rng);
      for (int i = 0; i < n_obs; ++i) {
        Observation x;
        for (int a = 0; a < d; ++a) x.coords.push_back(u(rng));
        history.push_back(x);
      }
      for (int h = 1; h <= 3; ++h) {
        std::vector<CellId> ids;
        for (int k = 1; k <= 3; ++k) {
          ContextIndex index(k);
          ids.clear();
          for (std::size_t i = 0; i < history.size(); ++i) {
            ids.push_back(family.quantize(history[i], h));
            index.append(ids, history[i]);
            const std::size_t n = i + 2;  // next round
            const auto w = quantize_window(family, history, n, k, h);
            if (!w) continue;
            REQUIRE(index.match(*w, n) == match_set(family, history, n, k, h, *w));
          }
        }
      }
    }
  }
}

TEST_CASE("context index buckets count observations") {
  ContextIndex index(1);
  std::vector<CellId> ids;
  const PartitionFamily line(1, 1.0);
  for (double v : {0.5, -0.5, 0.5, -0.5, 0.5}) {
    ids.push_back(line.quantize(obs(v), 1));
    index.append(ids, obs(v));
  }
  const ContextBucket* after_upper = index.find(ContextString{{1}});
  REQUIRE(after_upper != nullptr);
  CHECK(after_upper->indices == std::vector<std::size_t>{2, 4});
  CHECK(after_upper->counts.at(obs(-0.5)) == 2);
  CHECK(index.find(ContextString{{7}}) == nullptr);

  std::vector<CellId> skipped{1, 0, 1};
  CHECK_THROWS_AS(ContextIndex(1).append(skipped, obs(0.5)), ConfigError);
}

TEST_CASE("context strings have a canonical little-endian encoding") {
  const ContextString w{{1, 0x0102030405060708ull}};
  const std::string bytes = w.bytes();
  REQUIRE(bytes.size() == 16);
  CHECK(bytes[0] == 1);
  for (int i = 1; i < 8; ++i) CHECK(bytes[i] == 0);
  CHECK(bytes[8] == 0x08);
  CHECK(bytes[15] == 0x01);
  CHECK(ContextHash{}(w) == ContextHash{}(ContextString{{1, 0x0102030405060708ull}}));
  CHECK(ContextHash{}(w) != ContextHash{}(ContextString{{0x0102030405060708ull, 1}}));
}
