#pragma once

#include <cstdint>
#include <random>

namespace privsub {

// Identifies independent random streams that share a master seed.
enum class StreamKind : std::uint32_t { KyleMarket = 1, LvrReference = 2 };

// Per-path normal stream. Seeded from (master_seed, kind, path_index) alone, so a
// path's draws do not depend on which thread or batch simulates it.
class PathStream {
 public:
  PathStream(std::uint64_t master_seed, StreamKind kind, std::uint64_t path_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(path_index),
                      static_cast<std::uint32_t>(path_index >> 32)};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace privsub
