#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace simsize {

using Rng = std::mt19937_64;

/// Hierarchical, reproducible random stream.
///
/// A stream is a master seed plus a path of (label, index) pairs. Every
/// distinct path hashes to its own 64-bit key, so sub-streams for runs,
/// candidate sample sizes and replicates never share state and can be
/// consumed from any thread in any order.
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t master_seed) : master_seed_(master_seed) {}

  /// Returns a new stream with (label, index) appended to the path.
  SeedStream child(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<std::pair<std::string, std::uint64_t>>& path() const {
    return path_;
  }

  /// 64-bit key derived from the master seed and the full path.
  std::uint64_t key() const;

  Rng engine() const { return Rng(key()); }

  /// Human-readable path, e.g. "42/run:3/eval:7".
  std::string describe() const;

 private:
  std::uint64_t master_seed_;
  std::vector<std::pair<std::string, std::uint64_t>> path_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace simsize
