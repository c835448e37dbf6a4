#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sapg {

/// Colexicographic ranking of weak compositions of t into `parts` parts.
///
/// A composition c maps to the bar positions s_j = c_0 + ... + c_{j-1} + j - 1
/// (j = 1..parts-1), and rank(c) = sum_j C(s_j, j). The rank does not depend
/// on t, so c and c - 1^e share one formula across layers. Rank 0 is
/// (0, ..., 0, t); the last rank is (t, 0, ..., 0).
class CompositionIndex {
 public:
  CompositionIndex(int parts, int max_total);

  int parts() const noexcept { return parts_; }
  int max_total() const noexcept { return max_total_; }

  /// C(t + parts - 1, parts - 1).
  std::uint64_t layer_size(int t) const;
  std::uint64_t rank(std::span<const int> c) const;
  void unrank(int t, std::uint64_t r, std::span<int> out) const;

  /// Advances to the next composition in colex order; false after the last.
  static bool next(std::span<int> c);

  /// For each edge e with c_e > 0: rank(c) - rank(c - 1^e). `out` has
  /// `parts` entries; entries for empty parts are unspecified.
  void decrement_offsets(std::span<const int> c, std::span<std::uint64_t> out) const;

  std::uint64_t binom(int n, int r) const;

 private:
  int parts_;
  int max_total_;
  int rows_;
  std::vector<std::uint64_t> table_;  // table_[n * parts_ + r] = C(n, r)
};

}  // namespace sapg
