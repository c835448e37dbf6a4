#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library beyond reading a Graph's edge list.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "sapg/graph.hpp"

namespace oracle {

struct Plain {
  int k = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> p;  // vertex weights, index v-1
};

inline Plain plain(const sapg::Graph& g) {
  Plain out;
  out.k = g.vertex_count();
  for (const auto& e : g.edges()) out.edges.emplace_back(e.u, e.v);
  out.p.assign(static_cast<std::size_t>(out.k), 1.0 / out.k);
  return out;
}

inline bool touches(const std::pair<int, int>& e, int v) { return e.first == v || e.second == v; }

/// Memo-free recursion on the optimality equation.
inline double win_probability(const Plain& g, std::vector<int> c) {
  int t = 0;
  for (int x : c) t += x;
  if (t == 0) return 1.0;
  double sum = 0;
  for (int v = 1; v <= g.k; ++v) {
    double best = 0;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (!touches(g.edges[e], v) || c[e] == 0) continue;
      --c[e];
      best = std::max(best, win_probability(g, c));
      ++c[e];
    }
    sum += g.p[static_cast<std::size_t>(v - 1)] * best;
  }
  return sum;
}

/// Sum of p_v over vertices whose incident edges all lie in the mask.
inline double demand(const Plain& g, std::uint64_t mask) {
  double d = 0;
  for (int v = 1; v <= g.k; ++v) {
    bool full = true;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (touches(g.edges[e], v) && !((mask >> e) & 1u)) full = false;
    if (full) d += g.p[static_cast<std::size_t>(v - 1)];
  }
  return d;
}

inline int full_degree(const Plain& g, std::uint64_t mask) {
  int d = 0;
  for (int v = 1; v <= g.k; ++v) {
    bool full = true;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (touches(g.edges[e], v) && !((mask >> e) & 1u)) full = false;
    if (full) ++d;
  }
  return d;
}

/// min over proper non-empty masks of sum_{e in F} x_e - demand(F).
inline double min_slack(const Plain& g, const std::vector<double>& x) {
  const std::size_t m = g.edges.size();
  double best = 1e300;
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << m); ++mask) {
    double s = 0;
    for (std::size_t e = 0; e < m; ++e)
      if ((mask >> e) & 1u) s += x[e];
    best = std::min(best, s - demand(g, mask));
  }
  return best;
}

/// Hall-type feasibility by brute force over vertex subsets: the demand of
/// every vertex set S must fit in the edges touching S. Equivalent to the
/// face inequalities, checked from the other side.
inline double hall_margin(const Plain& g, const std::vector<double>& x) {
  double best = 1e300;
  for (std::uint64_t s = 1; s < (std::uint64_t{1} << g.k); ++s) {
    double need = 0, cap = 0;
    for (int v = 1; v <= g.k; ++v)
      if ((s >> (v - 1)) & 1u) need += g.p[static_cast<std::size_t>(v - 1)];
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (((s >> (g.edges[e].first - 1)) & 1u) || ((s >> (g.edges[e].second - 1)) & 1u)) cap += x[e];
    best = std::min(best, cap - need);
  }
  return best;
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  double out = 1;
  for (int i = 1; i <= r; ++i) out = out * (n - r + i) / i;
  return out;
}

}  // namespace oracle
