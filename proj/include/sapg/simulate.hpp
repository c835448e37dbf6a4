#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sapg/region.hpp"
#include "sapg/strategy.hpp"
#include "sapg/value_engine.hpp"

namespace sapg {

struct TraceStep {
  int vertex = 0;
  int edge = -1;          ///< -1 on forfeit
  int stage = 0;          ///< Strategy::stage() after the choice
  Config state;           ///< after the move
  double deviation = 0;   ///< |N(t) - (n - t) z| after the move
  double z_min_l = 0;     ///< min critical-face L^{F, n-t}(N(t)) after the move
  double s_value = 0;     ///< <N(t) - (n - t) z, u> after the move
  /// Exact conditional mean of the S increment for this step's kernel,
  /// sum_v p_v q^{(v)}(e) <z - 1^e, u>; NaN when the move was not randomized.
  double s_drift = 0;
};

struct TraceSpec {
  EdgeVector z;  ///< target used for deviation and S
  EdgeVector u;  ///< direction for S; empty means no S column
};

struct GameResult {
  bool won = false;
  int steps = 0;
  std::optional<int> forfeit_step;  ///< 1-based step at which no edge was available
  Config final_state;
  std::vector<TraceStep> trace;
};

struct PlayOptions {
  int stop_at_total = 0;              ///< stop early once this many units remain
  std::optional<TraceSpec> trace;
};

/// Plays one game. Throws IllegalStrategyMove if the strategy returns an edge
/// not incident to the drawn vertex or without capacity.
GameResult play(const Geometry& geo, std::span<const int> start, Strategy& strategy, RandomStream& rng,
                const PlayOptions& options = {});

struct Estimate {
  std::int64_t runs = 0;
  std::int64_t successes = 0;
  double p_hat = 0;
  double ci_lo = 0;
  double ci_hi = 0;
};

/// Wilson score interval at 95%.
Estimate wilson(std::int64_t successes, std::int64_t runs);

/// Runs `runs` independent games; run i uses child_seed(master_seed, i).
/// Threads: 0 = hardware concurrency. The result does not depend on it.
Estimate estimate(const Geometry& geo, std::span<const int> start, const StrategyFactory& factory, std::int64_t runs,
                  std::uint64_t master_seed, int threads = 0);

/// Generic parallel map over runs: f(i, rng) for i in [0, runs), results in
/// run order.
template <class T, class F>
std::vector<T> map_runs(std::int64_t runs, std::uint64_t master_seed, int threads, F&& f);

struct TailPoint {
  double q = 0;
  double fraction = 0;
};

struct TailResult {
  std::int64_t runs = 0;
  std::int64_t exact_hits = 0;   ///< runs with N(n - n1) equal to the target config
  std::vector<TailPoint> tail;   ///< P[|N(n - n1) - target| > q]
  std::vector<double> deviations;
};

/// Stops each game when n1 units remain (forfeited games use their last
/// state) and measures the distance to `target`.
TailResult deviation_tail(const Geometry& geo, std::span<const int> start, const StrategyFactory& factory,
                          std::span<const int> target, std::span<const double> q_grid, std::int64_t runs,
                          std::uint64_t master_seed, int threads = 0);

/// Exact one-step expectation of the normalized state N'/(r-1) when every
/// vertex plays `kernel` from `state` (r = total >= 2).
EdgeVector expected_next_point(const Graph& g, const VertexWeights& w, const MoveKernel& kernel,
                               std::span<const int> state);

struct TraceSummary {
  std::vector<double> s_increments;
  std::vector<double> z_increments;
  std::vector<double> deviations;
  int stage1_steps = 0;
  int positive_drift_steps = 0;       ///< stage-1 steps whose exact S drift exceeds 1e-12
  double max_abs_z_increment = 0;
  double z_increment_bound = 0;       ///< 2 max_F (a_F + b_F)
  std::optional<double> mean_p_increment;  ///< along the trace, when a table is given
};

TraceSummary trace_diagnostics(const Geometry& geo, std::span<const int> start, const GameResult& result,
                               const ValueTable* table = nullptr);

/// {graph_hash, config, strategy, runs, successes, p_hat, ci_lo, ci_hi, seed}
std::string estimate_json(const Graph& g, std::span<const int> config, const std::string& strategy,
                          const Estimate& e, std::uint64_t seed);

}  // namespace sapg

#include "sapg/detail/map_runs.hpp"
