#include "mha/partition.hpp"

#include <algorithm>
#include <cmath>

#include "mha/errors.hpp"

namespace mha {

PartitionFamily::PartitionFamily(int d, double half_width) : d_(d), half_width_(half_width) {
  if (d_ < 1 || d_ > kMaxBits) throw ConfigError("partition dimension out of range");
  if (!(half_width_ > 0.0)) throw ConfigError("partition half-width must be positive");
}

void PartitionFamily::check_level(int h) const {
  if (h < 1 || h > max_level()) {
    throw ConfigError("partition level " + std::to_string(h) + " outside [1, " +
                      std::to_string(max_level()) + "]");
  }
}

double PartitionFamily::max_cell_diameter(int h) const {
  return 2.0 * half_width_ * std::sqrt(static_cast<double>(d_)) / std::ldexp(1.0, h);
}

std::vector<std::uint64_t> PartitionFamily::axis_indices(const Observation& x, int h) const {
  check_level(h);
  if (static_cast<int>(x.coords.size()) != d_) {
    throw RangeError("observation dimension does not match the partition");
  }
  const std::uint64_t cells = cells_per_axis(h);
  const double width = 2.0 * half_width_ / static_cast<double>(cells);
  std::vector<std::uint64_t> out(d_);
  for (int axis = 0; axis < d_; ++axis) {
    const double c = x.coords[axis];
    if (!(c >= -half_width_ && c <= half_width_)) {
      throw RangeError("observation coordinate " + std::to_string(c) + " outside [-D, D]");
    }
    const double scaled = std::floor((c + half_width_) / width);
    out[axis] = std::min(static_cast<std::uint64_t>(scaled), cells - 1);
  }
  return out;
}

CellId PartitionFamily::quantize(const Observation& x, int h) const {
  const auto indices = axis_indices(x, h);
  CellId id = 0;
  for (std::uint64_t index : indices) id = (id << h) | index;
  return id;
}

CellId PartitionFamily::parent(CellId id, int h) const {
  check_level(h);
  if (h == 1) throw ConfigError("level 1 cells have no parent");
  const std::uint64_t mask = cells_per_axis(h) - 1;
  CellId out = 0;
  for (int axis = 0; axis < d_; ++axis) {
    const int shift = (d_ - 1 - axis) * h;
    const std::uint64_t index = (id >> shift) & mask;
    out = (out << (h - 1)) | (index >> 1);
  }
  return out;
}

std::string ContextString::bytes() const {
  std::string out;
  out.reserve(ids.size() * 8);
  for (CellId id : ids) {
    for (int byte = 0; byte < 8; ++byte) out.push_back(static_cast<char>((id >> (8 * byte)) & 0xff));
  }
  return out;
}

std::size_t ContextHash::operator()(const ContextString& w) const noexcept {
  // FNV-1a over the canonical byte encoding.
  std::uint64_t hash = 14695981039346656037ull;
  for (CellId id : w.ids) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (id >> (8 * byte)) & 0xff;
      hash *= 1099511628211ull;
    }
  }
  return static_cast<std::size_t>(hash);
}

std::optional<ContextString> window_from_ids(std::span<const CellId> ids, std::size_t n, int k) {
  if (k < 1) throw ConfigError("window length k must be positive");
  const auto window = static_cast<std::size_t>(k);
  if (n < window + 1 || ids.size() < n - 1) return std::nullopt;
  // x_{n-k} .. x_{n-1} sit at 0-based positions n-k-1 .. n-2.
  return ContextString{{ids.begin() + static_cast<std::ptrdiff_t>(n - window - 1),
                        ids.begin() + static_cast<std::ptrdiff_t>(n - 1)}};
}

std::optional<ContextString> quantize_window(const PartitionFamily& family,
                                             std::span<const Observation> history,
                                             std::size_t n, int k, int h) {
  if (k < 1) throw ConfigError("window length k must be positive");
  const auto window = static_cast<std::size_t>(k);
  if (n < window + 1 || history.size() < n - 1) return std::nullopt;
  ContextString w;
  w.ids.reserve(window);
  for (std::size_t i = n - window; i <= n - 1; ++i) w.ids.push_back(family.quantize(history[i - 1], h));
  return w;
}

std::vector<std::size_t> match_set(const PartitionFamily& family,
                                   std::span<const Observation> history, std::size_t n, int k,
                                   int h, const ContextString& w) {
  std::vector<std::size_t> out;
  for (std::size_t i = static_cast<std::size_t>(k) + 1; i < n; ++i) {
    if (quantize_window(family, history, i, k, h) == w) out.push_back(i);
  }
  return out;
}

void ContextIndex::append(std::span<const CellId> ids, const Observation& x_n) {
  const std::size_t n = ids.size();
  if (n != rounds_seen_ + 1) throw ConfigError("context index must see every round in order");
  rounds_seen_ = n;
  auto w = window_from_ids(ids, n, k_);
  if (!w) return;
  auto& bucket = buckets_[*w];
  bucket.indices.push_back(n);
  ++bucket.counts[x_n];
}

const ContextBucket* ContextIndex::find(const ContextString& w) const {
  auto it = buckets_.find(w);
  return it == buckets_.end() ? nullptr : &it->second;
}

std::vector<std::size_t> ContextIndex::match(const ContextString& w, std::size_t n) const {
  const ContextBucket* bucket = find(w);
  if (bucket == nullptr) return {};
  std::vector<std::size_t> out;
  for (std::size_t i : bucket->indices) {
    if (i < n) out.push_back(i);
  }
  return out;
}

}  // namespace mha
