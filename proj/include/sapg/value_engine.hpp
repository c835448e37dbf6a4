#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "sapg/composition.hpp"
#include "sapg/graph.hpp"
#include "sapg/region.hpp"

namespace sapg {

/// Remaining capacity per edge; the game state.
using Config = std::vector<int>;

int total(std::span<const int> c);

inline constexpr std::uint64_t kDefaultMemoryBudget = std::uint64_t{1} << 30;

struct EngineOptions {
  std::uint64_t memory_budget = kDefaultMemoryBudget;  ///< bytes
  int threads = 0;                                     ///< 0 = hardware concurrency
};

/// Optimal win probabilities for every config of total 0..n_max, one dense
/// layer per total in colex rank order.
class ValueTable {
 public:
  ValueTable(Graph g, VertexWeights w, int n_max);

  const Graph& graph() const noexcept { return g_; }
  const VertexWeights& weights() const noexcept { return w_; }
  int n_max() const noexcept { return n_max_; }
  const CompositionIndex& index() const noexcept { return index_; }

  std::span<const double> layer(int t) const;
  std::span<double> layer(int t);

  /// Throws LayerOutOfRange, NegativeEntry.
  double value_at(std::span<const int> c) const;

  /// Bytes needed to hold layers 0..n_max.
  static std::uint64_t bytes_required(int edge_count, int n_max);

 private:
  Graph g_;
  VertexWeights w_;
  int n_max_;
  CompositionIndex index_;
  std::vector<std::vector<double>> layers_;
};

/// Fills layer t from layer t-1: p(c) = sum_v p_v max_{e ~ v, c_e > 0} p(c - 1^e),
/// with an empty max contributing 0. Vertices are summed in label order.
void compute_layer(const Graph& g, const VertexWeights& w, const CompositionIndex& index, int t,
                   std::span<const double> previous, std::span<double> out, int threads = 0);

/// Throws MemoryBudgetExceeded when the full table would exceed the budget.
ValueTable compute_table(const Graph& g, int n_max, const VertexWeights& w,
                         const EngineOptions& options = {});
ValueTable compute_table(const Graph& g, int n_max);

/// Only layer n, keeping two layers resident.
std::vector<double> compute_final_layer(const Graph& g, int n, const VertexWeights& w,
                                        const EngineOptions& options = {});

/// Optimal edge for vertex v at config c, lowest index on ties; nullopt
/// when v has no incident edge with positive capacity.
std::optional<int> optimal_move(const ValueTable& table, std::span<const int> c, int v);

struct ConfigValue {
  Config config;
  double value = 0;
};

/// Lexicographically smallest maximizer within layer n.
ConfigValue argmax_config(const ValueTable& table, int n);

enum class SliceKind { I, II, III };

struct SliceSpec {
  double amplitude = 1;
  SliceKind kind = SliceKind::I;
};

/// Max over the configs of total n in the slice; nullopt when the slice is
/// empty. Throws LayerOutOfRange, SubsetCapExceeded.
std::optional<ConfigValue> slice_max(const ValueTable& table, int n, const SliceSpec& slice);

/// Slice predicate on the min critical-face functional value.
bool in_slice(double min_l, int n, const SliceSpec& slice);

/// Cache file: magic "SAPG", u32 version, u64 graph hash, u32 k, u32 |E|,
/// u32 n_max, k f64 weights, then each layer as f64 in colex order. All
/// little-endian.
void save_table(const ValueTable& table, const std::string& path);
ValueTable load_table(const std::string& path, const Graph& g,
                      std::optional<int> expected_n_max = std::nullopt,
                      const EngineOptions& options = {});

/// Computes the table layer by layer straight into a cache file, keeping two
/// layers in memory.
void compute_table_to_file(const Graph& g, int n_max, const VertexWeights& w, const std::string& path,
                           const EngineOptions& options = {});

inline constexpr std::uint32_t kCacheVersion = 1;

using Rational = boost::rational<std::int64_t>;

/// Exact optimal win probability under uniform draws, by memoized recursion
/// in rationals. Limited to totals <= 12.
Rational exact_value(const Graph& g, std::span<const int> c);

}  // namespace sapg
