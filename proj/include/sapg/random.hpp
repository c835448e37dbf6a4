#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace sapg {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed of run `index` under `master`; independent of scheduling.
constexpr std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ull));
}

/// Random source for one simulated game. All draws are derived from raw
/// 64-bit outputs, so results do not depend on the standard library's
/// distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(uniform() * n); }

  /// Index drawn proportionally to non-negative weights (sum > 0).
  int pick(std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0) continue;
      last = static_cast<int>(i);
      if (u < weights[i]) return last;
      u -= weights[i];
    }
    return last;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sapg
