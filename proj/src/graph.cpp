#include "sapg/graph.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "sapg/error.hpp"

namespace sapg {

EdgeSubset EdgeSubset::of(std::initializer_list<int> indices) {
  return of(std::span<const int>(indices.begin(), indices.size()));
}

EdgeSubset EdgeSubset::of(std::span<const int> indices) {
  EdgeSubset s;
  for (int e : indices) {
    if (e < 0 || e >= kMaxEdges) throw Error(Errc::InvalidArgument, "edge index out of range");
    s.insert(e);
  }
  return s;
}

EdgeSubset EdgeSubset::full(int edge_count) {
  if (edge_count >= kMaxEdges) return EdgeSubset(~std::uint64_t{0});
  return EdgeSubset((std::uint64_t{1} << edge_count) - 1);
}

int EdgeSubset::size() const noexcept { return std::popcount(bits_); }

std::vector<int> EdgeSubset::indices() const {
  std::vector<int> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

std::uint64_t Graph::hash() const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  auto mix_u32 = [&h](std::uint32_t w) {
    for (int i = 0; i < 4; ++i) {
      h ^= (w >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix_u32(static_cast<std::uint32_t>(k_));
  for (const Edge& e : edges_) {
    mix_u32(static_cast<std::uint32_t>(e.u));
    mix_u32(static_cast<std::uint32_t>(e.v));
  }
  return h;
}

Graph build_graph(int k, std::span<const std::pair<int, int>> pairs) {
  if (k < 1) throw Error(Errc::VertexOutOfRange, "vertex count must be positive");
  if (pairs.size() > static_cast<std::size_t>(kMaxEdges))
    throw Error(Errc::InvalidArgument, "more than 64 edges");

  Graph g;
  g.k_ = k;
  g.incidence_.assign(static_cast<std::size_t>(k), {});
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : pairs) {
    if (a < 1 || a > k || b < 1 || b > k)
      throw Error(Errc::VertexOutOfRange, "edge {" + std::to_string(a) + "," + std::to_string(b) + "}");
    if (a == b) throw Error(Errc::LoopEdge, "loop at vertex " + std::to_string(a));
    Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.insert({e.u, e.v}).second)
      throw Error(Errc::DuplicateEdge, "{" + std::to_string(e.u) + "," + std::to_string(e.v) + "}");
    const int idx = static_cast<int>(g.edges_.size());
    g.edges_.push_back(e);
    g.incidence_[static_cast<std::size_t>(e.u - 1)].push_back(idx);
    g.incidence_[static_cast<std::size_t>(e.v - 1)].push_back(idx);
  }
  if (g.edges_.size() < 2) throw Error(Errc::TooFewEdges, "need at least 2 edges");

  // union-find connectivity over all k vertices
  std::vector<int> parent(static_cast<std::size_t>(k));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  int components = k;
  for (const Edge& e : g.edges_) {
    int ra = find(e.u - 1), rb = find(e.v - 1);
    if (ra != rb) {
      parent[static_cast<std::size_t>(ra)] = rb;
      --components;
    }
  }
  if (components != 1)
    throw Error(Errc::DisconnectedGraph, std::to_string(components) + " components");
  return g;
}

Graph build_graph(int k, std::initializer_list<std::pair<int, int>> pairs) {
  return build_graph(k, std::span<const std::pair<int, int>>(pairs.begin(), pairs.size()));
}

int degree_in(const Graph& g, EdgeSubset F, int v) {
  int d = 0;
  for (int e : g.incident(v)) d += F.contains(e) ? 1 : 0;
  return d;
}

int full_degree_count(const Graph& g, EdgeSubset F) {
  int count = 0;
  for (int v = 1; v <= g.vertex_count(); ++v)
    if (degree_in(g, F, v) == g.degree(v)) ++count;
  return count;
}

std::vector<int> full_degree_vertices(const Graph& g, EdgeSubset F) {
  std::vector<int> out;
  for (int v = 1; v <= g.vertex_count(); ++v)
    if (degree_in(g, F, v) == g.degree(v)) out.push_back(v);
  return out;
}

Subgraph remove_edges(const Graph& g, EdgeSubset H) {
  Subgraph sub;
  sub.old_to_new.assign(static_cast<std::size_t>(g.edge_count()), -1);
  std::vector<std::pair<int, int>> kept;
  for (int e = 0; e < g.edge_count(); ++e) {
    if (H.contains(e)) continue;
    sub.old_to_new[static_cast<std::size_t>(e)] = static_cast<int>(kept.size());
    sub.new_to_old.push_back(e);
    kept.emplace_back(g.edge(e).u, g.edge(e).v);
  }
  sub.graph = build_graph(g.vertex_count(), kept);
  return sub;
}

ProperSubsets proper_subsets(const Graph& g) {
  if (g.edge_count() > kSubsetEnumerationCap)
    throw Error(Errc::SubsetCapExceeded, std::to_string(g.edge_count()) + " edges > 24");
  return ProperSubsets(g.edge_count());
}

Graph parse_graph(std::istream& in) {
  std::string line;
  int k = -1;
  int lineno = 0;
  std::vector<std::pair<int, int>> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    auto fail = [&](const std::string& why) {
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": " + why);
    };
    if (k < 0) {
      if (first != "vertices" || !(ls >> k) || k < 1) fail("expected 'vertices <k>'");
    } else {
      int u = 0, v = 0;
      std::istringstream fs(first);
      if (!(fs >> u) || !fs.eof() || !(ls >> v)) fail("expected '<u> <v>'");
      pairs.emplace_back(u, v);
    }
    std::string rest;
    if (ls >> rest) fail("trailing tokens");
  }
  if (k < 0) throw Error(Errc::ParseError, "missing 'vertices <k>' header");
  return build_graph(k, pairs);
}

Graph parse_graph(const std::string& text) {
  std::istringstream in(text);
  return parse_graph(in);
}

Graph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  return parse_graph(in);
}

std::string format_graph(const Graph& g) {
  std::ostringstream out;
  out << "vertices " << g.vertex_count() << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

Graph path_graph(int k) {
  std::vector<std::pair<int, int>> pairs;
  for (int v = 1; v < k; ++v) pairs.emplace_back(v, v + 1);
  return build_graph(k, pairs);
}

Graph cycle_graph(int k) {
  std::vector<std::pair<int, int>> pairs;
  for (int v = 1; v < k; ++v) pairs.emplace_back(v, v + 1);
  pairs.emplace_back(1, k);
  return build_graph(k, pairs);
}

Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> pairs;
  for (int v = 2; v <= leaves + 1; ++v) pairs.emplace_back(1, v);
  return build_graph(leaves + 1, pairs);
}

Graph complete_graph(int k) {
  std::vector<std::pair<int, int>> pairs;
  for (int u = 1; u <= k; ++u)
    for (int v = u + 1; v <= k; ++v) pairs.emplace_back(u, v);
  return build_graph(k, pairs);
}

}  // namespace sapg
