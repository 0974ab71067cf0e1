#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mha/core_model.hpp"

namespace mha {

using CellId = std::uint64_t;

/// Nested dyadic partitions of [-D, D]^d. At level h every axis is split into
/// 2^h equal half-open cells, the last one closed, so P_{h+1} refines P_h and
/// the cell diameter 2 D sqrt(d) / 2^h vanishes as h grows. Cell ids are the
/// lexicographic (row-major, first axis most significant) combination of the
/// per-axis indices.
class PartitionFamily {
 public:
  PartitionFamily(int d, double half_width);

  int d() const { return d_; }
  double half_width() const { return half_width_; }

  static constexpr int kMaxBits = 62;
  int max_level() const { return kMaxBits / d_; }

  std::uint64_t cells_per_axis(int h) const { return std::uint64_t{1} << h; }
  std::uint64_t cell_count(int h) const { return std::uint64_t{1} << (h * d_); }
  double max_cell_diameter(int h) const;

  std::vector<std::uint64_t> axis_indices(const Observation& x, int h) const;
  CellId quantize(const Observation& x, int h) const;
  // Id of the level-(h-1) cell containing the level-h cell `id`.
  CellId parent(CellId id, int h) const;

 private:
  void check_level(int h) const;

  int d_;
  double half_width_;
};

/// Quantized window Q_h(x_{n-k}, ..., x_{n-1}).
struct ContextString {
  std::vector<CellId> ids;

  bool operator==(const ContextString&) const = default;
  auto operator<=>(const ContextString&) const = default;

  // Little-endian 8-byte encoding of each id, in window order.
  std::string bytes() const;
};

struct ContextHash {
  std::size_t operator()(const ContextString& w) const noexcept;
};

/// Context for round n (1-based): the cell ids of the k observations
/// preceding x_n. Empty when fewer than k observations precede round n.
std::optional<ContextString> quantize_window(const PartitionFamily& family,
                                             std::span<const Observation> history,
                                             std::size_t n, int k, int h);

// Same, from already-quantized ids q_h(x_1), q_h(x_2), ...
std::optional<ContextString> window_from_ids(std::span<const CellId> ids, std::size_t n, int k);

/// Direct scan of {i : k < i < n, Q_h(x_{i-k}, ..., x_{i-1}) = w}, 1-based.
std::vector<std::size_t> match_set(const PartitionFamily& family,
                                   std::span<const Observation> history, std::size_t n, int k,
                                   int h, const ContextString& w);

/// Observations gathered under one context, with multiplicities.
struct ContextBucket {
  std::vector<std::size_t> indices;  // ascending, 1-based rounds
  std::map<Observation, std::size_t> counts;
};

/// Incremental form of match_set for a fixed window length k: each round
/// appends one index under the context that preceded it.
class ContextIndex {
 public:
  explicit ContextIndex(int k) : k_(k) {}

  int k() const { return k_; }

  // `ids` are the quantized ids of x_1..x_n and x_n the newest observation;
  // must be called once per round, in order.
  void append(std::span<const CellId> ids, const Observation& x_n);

  const ContextBucket* find(const ContextString& w) const;
  std::vector<std::size_t> match(const ContextString& w, std::size_t n) const;
  std::size_t rounds_seen() const { return rounds_seen_; }
  std::size_t context_count() const { return buckets_.size(); }

 private:
  int k_;
  std::size_t rounds_seen_ = 0;
  std::unordered_map<ContextString, ContextBucket, ContextHash> buckets_;
};

}  // namespace mha
