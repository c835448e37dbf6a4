#include "sapg/value_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include "sapg/error.hpp"

namespace sapg {

int total(std::span<const int> c) { return std::accumulate(c.begin(), c.end(), 0); }

namespace {

constexpr std::uint64_t kParallelThreshold = 1u << 15;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void fill_range(const Graph& g, const VertexWeights& w, const CompositionIndex& index, int t,
                std::span<const double> previous, std::span<double> out, std::uint64_t begin,
                std::uint64_t end) {
  const int m = g.edge_count();
  Config c(static_cast<std::size_t>(m));
  std::vector<std::uint64_t> offsets(static_cast<std::size_t>(m));
  index.unrank(t, begin, c);
  for (std::uint64_t r = begin; r < end; ++r) {
    index.decrement_offsets(c, offsets);
    double acc = 0.0;
    for (int v = 1; v <= g.vertex_count(); ++v) {
      double best = 0.0;
      bool any = false;
      for (int e : g.incident(v)) {
        if (c[static_cast<std::size_t>(e)] == 0) continue;
        const double p = previous[r - offsets[static_cast<std::size_t>(e)]];
        if (!any || p > best) best = p;
        any = true;
      }
      acc += w(v) * best;
    }
    out[r] = acc;
    if (r + 1 < end) CompositionIndex::next(c);
  }
}

// Little-endian primitive IO for the cache format.
template <typename T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw Error(Errc::FormatMismatch, "truncated cache file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void write_layer(std::ostream& out, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (double v : values) put(out, v);
  }
}

void write_header(std::ostream& out, const Graph& g, const VertexWeights& w, int n_max) {
  out.write("SAPG", 4);
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint64_t>(out, g.hash());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.vertex_count()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.edge_count()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(n_max));
  for (double p : w.values()) put(out, p);
}

void check_budget(int m, int n_max, const EngineOptions& options) {
  const std::uint64_t need = ValueTable::bytes_required(m, n_max);
  if (need > options.memory_budget)
    throw Error(Errc::MemoryBudgetExceeded, "value table needs " + std::to_string(need) + " bytes, budget " +
                                                std::to_string(options.memory_budget));
}

}  // namespace

ValueTable::ValueTable(Graph g, VertexWeights w, int n_max)
    : g_(std::move(g)), w_(std::move(w)), n_max_(n_max), index_(g_.edge_count(), n_max) {
  if (n_max < 0) throw Error(Errc::InvalidArgument, "n_max must be non-negative");
  if (w_.size() != g_.vertex_count()) throw Error(Errc::InvalidArgument, "vertex weight count does not match graph");
  layers_.resize(static_cast<std::size_t>(n_max) + 1);
  for (int t = 0; t <= n_max; ++t) layers_[static_cast<std::size_t>(t)].assign(index_.layer_size(t), 0.0);
}

std::uint64_t ValueTable::bytes_required(int edge_count, int n_max) {
  // sum_{t<=n} C(t+m-1, m-1) = C(n+m, m)
  long double states = 1;
  for (int i = 1; i <= edge_count; ++i) states = states * (n_max + i) / i;
  const long double bytes = states * sizeof(double);
  if (bytes > 1.8e19L) return ~std::uint64_t{0};
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(bytes)));
}

std::span<const double> ValueTable::layer(int t) const {
  if (t < 0 || t > n_max_) throw Error(Errc::LayerOutOfRange, "layer " + std::to_string(t));
  return layers_[static_cast<std::size_t>(t)];
}

std::span<double> ValueTable::layer(int t) {
  if (t < 0 || t > n_max_) throw Error(Errc::LayerOutOfRange, "layer " + std::to_string(t));
  return layers_[static_cast<std::size_t>(t)];
}

double ValueTable::value_at(std::span<const int> c) const {
  if (static_cast<int>(c.size()) != g_.edge_count()) throw Error(Errc::InvalidArgument, "config length");
  for (int x : c)
    if (x < 0) throw Error(Errc::NegativeEntry, "config has a negative entry");
  const int t = total(c);
  return layer(t)[index_.rank(c)];
}

void compute_layer(const Graph& g, const VertexWeights& w, const CompositionIndex& index, int t,
                   std::span<const double> previous, std::span<double> out, int threads) {
  if (t == 0) {
    out[0] = 1.0;
    return;
  }
  const std::uint64_t size = index.layer_size(t);
  const int workers = size < kParallelThreshold ? 1 : std::min<int>(resolve_threads(threads), 64);
  if (workers <= 1) {
    fill_range(g, w, index, t, previous, out, 0, size);
    return;
  }
  std::vector<std::jthread> pool;
  const std::uint64_t chunk = (size + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);
  for (std::uint64_t begin = 0; begin < size; begin += chunk) {
    const std::uint64_t end = std::min(size, begin + chunk);
    pool.emplace_back([&, begin, end] { fill_range(g, w, index, t, previous, out, begin, end); });
  }
}

ValueTable compute_table(const Graph& g, int n_max, const VertexWeights& w, const EngineOptions& options) {
  check_budget(g.edge_count(), n_max, options);
  ValueTable table(g, w, n_max);
  for (int t = 0; t <= n_max; ++t)
    compute_layer(g, w, table.index(), t, t > 0 ? table.layer(t - 1) : std::span<const double>{}, table.layer(t),
                  options.threads);
  return table;
}

ValueTable compute_table(const Graph& g, int n_max) {
  return compute_table(g, n_max, VertexWeights::uniform(g.vertex_count()));
}

std::vector<double> compute_final_layer(const Graph& g, int n, const VertexWeights& w,
                                        const EngineOptions& options) {
  CompositionIndex index(g.edge_count(), n);
  const std::uint64_t need = 2 * index.layer_size(n) * sizeof(double);
  if (need > options.memory_budget)
    throw Error(Errc::MemoryBudgetExceeded, "two layers need " + std::to_string(need) + " bytes");
  std::vector<double> previous, current{1.0};
  for (int t = 1; t <= n; ++t) {
    previous.swap(current);
    current.assign(index.layer_size(t), 0.0);
    compute_layer(g, w, index, t, previous, current, options.threads);
  }
  return current;
}

std::optional<int> optimal_move(const ValueTable& table, std::span<const int> c, int v) {
  const Graph& g = table.graph();
  std::optional<int> best_edge;
  double best = 0.0;
  Config next(c.begin(), c.end());
  for (int e : g.incident(v)) {
    if (c[static_cast<std::size_t>(e)] <= 0) continue;
    next[static_cast<std::size_t>(e)] -= 1;
    const double p = table.value_at(next);
    next[static_cast<std::size_t>(e)] += 1;
    if (!best_edge || p > best) {
      best = p;
      best_edge = e;
    }
  }
  return best_edge;
}

ConfigValue argmax_config(const ValueTable& table, int n) {
  const auto values = table.layer(n);
  const int m = table.graph().edge_count();
  Config c(static_cast<std::size_t>(m), 0);
  c.back() = n;
  ConfigValue best{c, values[0]};
  for (std::uint64_t r = 1; r < values.size(); ++r) {
    CompositionIndex::next(c);
    if (values[r] > best.value || (values[r] == best.value && c < best.config)) best = {c, values[r]};
  }
  return best;
}

bool in_slice(double min_l, int n, const SliceSpec& slice) {
  const double bound = slice.amplitude * std::sqrt(static_cast<double>(n));
  switch (slice.kind) {
    case SliceKind::I: return min_l <= -bound;
    case SliceKind::II: return min_l >= bound;
    case SliceKind::III: return min_l > -bound && min_l < bound;
  }
  return false;
}

std::optional<ConfigValue> slice_max(const ValueTable& table, int n, const SliceSpec& slice) {
  if (!(slice.amplitude > 0)) throw Error(Errc::InvalidArgument, "slice amplitude must be positive");
  const auto values = table.layer(n);
  const Geometry geo(table.graph(), table.weights());
  const auto faces = geo.critical_faces();
  const int m = table.graph().edge_count();
  Config c(static_cast<std::size_t>(m), 0);
  c.back() = n;
  std::vector<double> counts(static_cast<std::size_t>(m));
  std::optional<ConfigValue> best;
  for (std::uint64_t r = 0; r < values.size(); ++r) {
    if (r > 0) CompositionIndex::next(c);
    std::copy(c.begin(), c.end(), counts.begin());
    // Slice II with no critical faces holds vacuously (min over empty = +inf).
    const double min_l = faces.empty() ? std::numeric_limits<double>::infinity() : geo.min_critical_l(counts, n);
    if (!in_slice(min_l, n, slice)) continue;
    if (!best || values[r] > best->value || (values[r] == best->value && c < best->config))
      best = ConfigValue{c, values[r]};
  }
  return best;
}

void save_table(const ValueTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path + " for writing");
  write_header(out, table.graph(), table.weights(), table.n_max());
  for (int t = 0; t <= table.n_max(); ++t) write_layer(out, table.layer(t));
  if (!out.flush()) throw Error(Errc::IoFailure, "write failed for " + path);
}

void compute_table_to_file(const Graph& g, int n_max, const VertexWeights& w, const std::string& path,
                           const EngineOptions& options) {
  CompositionIndex index(g.edge_count(), n_max);
  const std::uint64_t need = 2 * index.layer_size(n_max) * sizeof(double);
  if (need > options.memory_budget)
    throw Error(Errc::MemoryBudgetExceeded, "two layers need " + std::to_string(need) + " bytes");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot open " + path + " for writing");
  write_header(out, g, w, n_max);
  std::vector<double> previous, current{1.0};
  write_layer(out, current);
  for (int t = 1; t <= n_max; ++t) {
    previous.swap(current);
    current.assign(index.layer_size(t), 0.0);
    compute_layer(g, w, index, t, previous, current, options.threads);
    write_layer(out, current);
  }
  if (!out.flush()) throw Error(Errc::IoFailure, "write failed for " + path);
}

ValueTable load_table(const std::string& path, const Graph& g, std::optional<int> expected_n_max,
                      const EngineOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SAPG", 4) != 0) throw Error(Errc::FormatMismatch, "bad magic");
  if (get<std::uint32_t>(in) != kCacheVersion) throw Error(Errc::FormatMismatch, "unsupported version");
  const auto hash = get<std::uint64_t>(in);
  const auto k = get<std::uint32_t>(in);
  const auto m = get<std::uint32_t>(in);
  const auto n_max = get<std::uint32_t>(in);
  if (hash != g.hash() || k != static_cast<std::uint32_t>(g.vertex_count()) ||
      m != static_cast<std::uint32_t>(g.edge_count()))
    throw Error(Errc::GraphHashMismatch, "cache was built for a different graph");
  if (expected_n_max && static_cast<int>(n_max) != *expected_n_max)
    throw Error(Errc::FormatMismatch, "cache n_max " + std::to_string(n_max) + " != " + std::to_string(*expected_n_max));
  if (n_max > 1'000'000u) throw Error(Errc::FormatMismatch, "implausible n_max");
  check_budget(static_cast<int>(m), static_cast<int>(n_max), options);
  std::vector<double> weights(k);
  for (auto& p : weights) p = get<double>(in);
  ValueTable table(g, VertexWeights::from(std::move(weights)), static_cast<int>(n_max));
  for (int t = 0; t <= static_cast<int>(n_max); ++t) {
    auto layer = table.layer(t);
    if constexpr (std::endian::native == std::endian::little) {
      if (!in.read(reinterpret_cast<char*>(layer.data()), static_cast<std::streamsize>(layer.size_bytes())))
        throw Error(Errc::FormatMismatch, "truncated cache file");
    } else {
      for (double& v : layer) v = get<double>(in);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(Errc::FormatMismatch, "trailing bytes");
  return table;
}

Rational exact_value(const Graph& g, std::span<const int> c) {
  if (total(c) > 12) throw Error(Errc::InvalidArgument, "exact oracle limited to totals <= 12");
  std::map<Config, Rational> memo;
  const std::int64_t k = g.vertex_count();
  std::function<Rational(const Config&)> solve = [&](const Config& state) -> Rational {
    if (total(state) == 0) return Rational(1);
    if (auto it = memo.find(state); it != memo.end()) return it->second;
    Rational acc(0);
    Config next = state;
    for (int v = 1; v <= g.vertex_count(); ++v) {
      std::optional<Rational> best;
      for (int e : g.incident(v)) {
        if (state[static_cast<std::size_t>(e)] == 0) continue;
        next[static_cast<std::size_t>(e)] -= 1;
        const Rational p = solve(next);
        next[static_cast<std::size_t>(e)] += 1;
        if (!best || p > *best) best = p;
      }
      if (best) acc += *best / k;
    }
    memo.emplace(state, acc);
    return acc;
  };
  for (int x : c)
    if (x < 0) throw Error(Errc::NegativeEntry, "config has a negative entry");
  return solve(Config(c.begin(), c.end()));
}

}  // namespace sapg
