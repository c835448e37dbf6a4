#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sapg {

/// Largest edge count representable by an EdgeSubset bit pattern.
inline constexpr int kMaxEdges = 64;
/// Largest edge count for which proper subsets are enumerated.
inline constexpr int kSubsetEnumerationCap = 24;

/// Unordered vertex pair, stored with u < v (1-based labels).
struct Edge {
  int u = 0;
  int v = 0;

  bool touches(int w) const noexcept { return u == w || v == w; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Set of edge indices as a fixed-width bit pattern.
class EdgeSubset {
 public:
  constexpr EdgeSubset() = default;
  constexpr explicit EdgeSubset(std::uint64_t bits) : bits_(bits) {}

  static EdgeSubset of(std::initializer_list<int> indices);
  static EdgeSubset of(std::span<const int> indices);
  static EdgeSubset full(int edge_count);

  constexpr bool contains(int e) const noexcept { return (bits_ >> e) & 1u; }
  constexpr std::uint64_t bits() const noexcept { return bits_; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  int size() const noexcept;
  std::vector<int> indices() const;

  void insert(int e) noexcept { bits_ |= std::uint64_t{1} << e; }
  void erase(int e) noexcept { bits_ &= ~(std::uint64_t{1} << e); }

  constexpr bool is_subset_of(EdgeSubset other) const noexcept {
    return (bits_ & ~other.bits_) == 0;
  }

  friend constexpr bool operator==(EdgeSubset, EdgeSubset) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// Finite connected simple graph with vertices 1..k and edges indexed in
/// construction order. Immutable once built.
class Graph {
 public:
  int vertex_count() const noexcept { return k_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

  const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Incident edge indices of vertex v (1-based), ascending.
  std::span<const int> incident(int v) const { return incidence_.at(static_cast<std::size_t>(v - 1)); }
  int degree(int v) const { return static_cast<int>(incident(v).size()); }

  /// 64-bit FNV-1a over k and the edge list (u32 little-endian words).
  std::uint64_t hash() const noexcept;

  friend bool operator==(const Graph& a, const Graph& b) { return a.k_ == b.k_ && a.edges_ == b.edges_; }

 private:
  friend Graph build_graph(int k, std::span<const std::pair<int, int>> pairs);

  int k_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> incidence_;
};

/// Validates and builds a graph. Pairs may be given in either order.
/// Throws DisconnectedGraph, DuplicateEdge, LoopEdge, TooFewEdges, VertexOutOfRange.
Graph build_graph(int k, std::span<const std::pair<int, int>> pairs);
Graph build_graph(int k, std::initializer_list<std::pair<int, int>> pairs);

int degree_in(const Graph& g, EdgeSubset F, int v);

/// d(F): number of vertices all of whose incident edges lie in F.
int full_degree_count(const Graph& g, EdgeSubset F);

/// Vertices with full degree in F, ascending.
std::vector<int> full_degree_vertices(const Graph& g, EdgeSubset F);

struct Subgraph {
  Graph graph;
  std::vector<int> old_to_new;  ///< -1 for removed edges
  std::vector<int> new_to_old;
};

/// G with the edges in H removed; edge indices are re-packed in order.
Subgraph remove_edges(const Graph& g, EdgeSubset H);

/// Forward range over the 2^|E| - 2 proper non-empty subsets, in increasing
/// bit-pattern order.
class ProperSubsets {
 public:
  class iterator {
   public:
    using value_type = EdgeSubset;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(std::uint64_t bits) : bits_(bits) {}
    EdgeSubset operator*() const { return EdgeSubset(bits_); }
    iterator& operator++() { ++bits_; return *this; }
    iterator operator++(int) { auto t = *this; ++bits_; return t; }
    friend bool operator==(const iterator&, const iterator&) = default;

   private:
    std::uint64_t bits_ = 0;
  };

  explicit ProperSubsets(int edge_count) : end_((std::uint64_t{1} << edge_count) - 1) {}
  iterator begin() const { return iterator(1); }
  iterator end() const { return iterator(end_); }
  std::uint64_t size() const { return end_ - 1; }

 private:
  std::uint64_t end_;
};

/// Throws SubsetCapExceeded if |E| > kSubsetEnumerationCap.
ProperSubsets proper_subsets(const Graph& g);

// Text format: "vertices <k>" then one "<u> <v>" per line; '#' comments.
Graph parse_graph(std::istream& in);
Graph parse_graph(const std::string& text);
Graph load_graph_file(const std::string& path);
std::string format_graph(const Graph& g);

Graph path_graph(int k);
Graph cycle_graph(int k);
Graph star_graph(int leaves);
Graph complete_graph(int k);

}  // namespace sapg
