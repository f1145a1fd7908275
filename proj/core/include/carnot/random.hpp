#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace carnot {

/// Independent deterministic stream for (seed, stream tag, chunk index).
/// Uniform doubles are derived from raw 64-bit output so results do not
/// depend on the standard library's distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    engine_.seed(seq);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller.
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Runs body(chunk) for chunk in [0, chunks) on up to hardware_concurrency
/// threads. Callers write into per-chunk slots, so combining results in chunk
/// order keeps runs reproducible regardless of scheduling.
void parallel_chunks(std::size_t chunks, const std::function<void(std::size_t)>& body);

// Stream tags keep independent consumers of one seed apart.
namespace stream_tag {
inline constexpr std::uint64_t calibration = 0x63616c69;
inline constexpr std::uint64_t metric_factor = 0x6d666163;
inline constexpr std::uint64_t density = 0x64656e73;
inline constexpr std::uint64_t measure = 0x6d656173;
inline constexpr std::uint64_t blowup = 0x626c6f77;
inline constexpr std::uint64_t subgroup = 0x73756267;
inline constexpr std::uint64_t region = 0x72656769;
}  // namespace stream_tag

}  // namespace carnot
