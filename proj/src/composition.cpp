#include "sapg/composition.hpp"

#include "sapg/error.hpp"

namespace sapg {

CompositionIndex::CompositionIndex(int parts, int max_total)
    : parts_(parts), max_total_(max_total), rows_(max_total + parts + 1) {
  if (parts < 1 || max_total < 0) throw Error(Errc::InvalidArgument, "bad composition shape");
  table_.assign(static_cast<std::size_t>(rows_) * static_cast<std::size_t>(parts_), 0);
  for (int n = 0; n < rows_; ++n) {
    for (int r = 0; r < parts_; ++r) {
      std::uint64_t v = 0;
      if (r == 0)
        v = 1;
      else if (n > 0)
        v = binom(n - 1, r - 1) + binom(n - 1, r);
      table_[static_cast<std::size_t>(n) * static_cast<std::size_t>(parts_) + static_cast<std::size_t>(r)] = v;
    }
  }
}

std::uint64_t CompositionIndex::binom(int n, int r) const {
  if (n < 0 || r < 0 || r > n) return 0;
  if (r >= parts_ || n >= rows_) throw Error(Errc::InvalidArgument, "binomial outside table");
  return table_[static_cast<std::size_t>(n) * static_cast<std::size_t>(parts_) + static_cast<std::size_t>(r)];
}

std::uint64_t CompositionIndex::layer_size(int t) const { return binom(t + parts_ - 1, parts_ - 1); }

std::uint64_t CompositionIndex::rank(std::span<const int> c) const {
  std::uint64_t r = 0;
  int prefix = 0;
  for (int j = 1; j < parts_; ++j) {
    prefix += c[static_cast<std::size_t>(j - 1)];
    r += binom(prefix + j - 1, j);
  }
  return r;
}

void CompositionIndex::unrank(int t, std::uint64_t r, std::span<int> out) const {
  // Recover bar positions greedily from the top, then difference them.
  std::vector<int> s(static_cast<std::size_t>(parts_), 0);
  int upper = t + parts_ - 2;
  for (int j = parts_ - 1; j >= 1; --j) {
    int pos = upper;
    while (pos >= j && binom(pos, j) > r) --pos;
    if (pos < j - 1) pos = j - 1;
    s[static_cast<std::size_t>(j)] = pos;
    r -= binom(pos, j);
    upper = pos - 1;
  }
  int prev = 0;
  for (int j = 1; j < parts_; ++j) {
    const int prefix = s[static_cast<std::size_t>(j)] - (j - 1);
    out[static_cast<std::size_t>(j - 1)] = prefix - prev;
    prev = prefix;
  }
  out[static_cast<std::size_t>(parts_ - 1)] = t - prev;
}

bool CompositionIndex::next(std::span<int> c) {
  const std::size_t m = c.size();
  int carried = 0;
  for (std::size_t j = 1; j < m; ++j) {
    carried += c[j - 1];
    if (c[j] >= 1) {
      for (std::size_t i = 0; i + 1 < j; ++i) c[i] = 0;
      c[j - 1] = carried + 1;
      c[j] -= 1;
      return true;
    }
  }
  return false;
}

void CompositionIndex::decrement_offsets(std::span<const int> c, std::span<std::uint64_t> out) const {
  // Removing one unit from part e lowers s_j by one for every j > e, and
  // C(s, j) - C(s - 1, j) = C(s - 1, j - 1).
  std::vector<int> s(static_cast<std::size_t>(parts_), 0);
  int prefix = 0;
  for (int j = 1; j < parts_; ++j) {
    prefix += c[static_cast<std::size_t>(j - 1)];
    s[static_cast<std::size_t>(j)] = prefix + j - 1;
  }
  std::uint64_t suffix = 0;
  out[static_cast<std::size_t>(parts_ - 1)] = 0;
  for (int e = parts_ - 2; e >= 0; --e) {
    const int j = e + 1;
    suffix += binom(s[static_cast<std::size_t>(j)] - 1, j - 1);
    out[static_cast<std::size_t>(e)] = suffix;
  }
}

}  // namespace sapg
