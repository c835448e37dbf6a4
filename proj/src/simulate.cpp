#include "sapg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "sapg/error.hpp"

namespace sapg {

namespace {

// Distribution actually sampled by sample_kernel_move (without an allowed
// mask) for vertex v at `state`.
std::vector<std::pair<int, double>> effective_row(const Graph& g, const MoveKernel& kernel,
                                                  std::span<const int> state, int v) {
  std::vector<std::pair<int, double>> row;
  double mass = 0;
  for (int e : g.incident(v)) {
    if (state[static_cast<std::size_t>(e)] <= 0) continue;
    const double q = std::max(0.0, kernel.prob(v, e));
    row.emplace_back(e, q);
    mass += q;
  }
  if (row.size() == 1) {
    row.front().second = 1;
  } else if (mass <= 0) {
    for (auto& [e, q] : row) q = 1.0 / static_cast<double>(row.size());
  } else {
    for (auto& [e, q] : row) q /= mass;
  }
  return row;
}

double s_drift_of(const Geometry& geo, const MoveKernel& kernel, std::span<const int> state, const TraceSpec& spec) {
  const Graph& g = geo.graph();
  const double zu = dot(spec.z, spec.u);
  double drift = 0;
  for (int v = 1; v <= g.vertex_count(); ++v) {
    const double pv = geo.weights()(v);
    for (const auto& [e, q] : effective_row(g, kernel, state, v))
      drift += pv * q * (zu - spec.u[static_cast<std::size_t>(e)]);
  }
  return drift;
}

void fill_metrics(const Geometry& geo, const TraceSpec& spec, TraceStep& step) {
  const double r = total(step.state);
  double dev = 0, s = 0;
  EdgeVector counts(step.state.size());
  for (std::size_t e = 0; e < step.state.size(); ++e) {
    counts[e] = step.state[e];
    const double d = step.state[e] - r * spec.z[e];
    dev += d * d;
    if (!spec.u.empty()) s += d * spec.u[e];
  }
  step.deviation = std::sqrt(dev);
  step.s_value = s;
  step.z_min_l = geo.critical_faces().empty() ? 0.0 : geo.min_critical_l(counts, r);
}

}  // namespace

GameResult play(const Geometry& geo, std::span<const int> start, Strategy& strategy, RandomStream& rng,
                const PlayOptions& options) {
  const Graph& g = geo.graph();
  if (static_cast<int>(start.size()) != g.edge_count()) throw Error(Errc::InvalidArgument, "config length mismatch");
  for (int c : start)
    if (c < 0) throw Error(Errc::NegativeEntry, "negative config entry");
  GameResult result;
  result.final_state.assign(start.begin(), start.end());
  Config& state = result.final_state;
  strategy.reset(state);
  const bool tracing = options.trace.has_value();
  int remaining = total(state);
  while (remaining > options.stop_at_total) {
    const int v = draw_vertex(geo.weights(), rng);
    TraceStep step;
    step.vertex = v;
    double drift = std::numeric_limits<double>::quiet_NaN();
    const Config before = tracing ? state : Config{};
    const auto choice = strategy.choose(state, v, rng);
    step.stage = strategy.stage();
    if (tracing && !options.trace->u.empty())
      if (const MoveKernel* k = strategy.last_kernel()) drift = s_drift_of(geo, *k, before, *options.trace);
    if (!choice) {
      if (first_legal(g, state, v))
        throw Error(Errc::IllegalStrategyMove, strategy.name() + " forfeited with a legal move available");
      result.forfeit_step = result.steps + 1;
      if (tracing) {
        step.state = state;
        step.s_drift = drift;
        fill_metrics(geo, *options.trace, step);
        result.trace.push_back(std::move(step));
      }
      break;
    }
    const int e = *choice;
    if (e < 0 || e >= g.edge_count() || !g.edge(e).touches(v) || state[static_cast<std::size_t>(e)] <= 0)
      throw Error(Errc::IllegalStrategyMove,
                  strategy.name() + " chose edge " + std::to_string(e) + " for vertex " + std::to_string(v));
    --state[static_cast<std::size_t>(e)];
    --remaining;
    ++result.steps;
    if (tracing) {
      step.edge = e;
      step.state = state;
      step.s_drift = drift;
      fill_metrics(geo, *options.trace, step);
      result.trace.push_back(std::move(step));
    }
  }
  result.won = !result.forfeit_step && remaining == 0;
  return result;
}

Estimate wilson(std::int64_t successes, std::int64_t runs) {
  if (runs < 1) throw Error(Errc::InvalidArgument, "runs must be at least 1");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(runs);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  Estimate est;
  est.runs = runs;
  est.successes = successes;
  est.p_hat = p;
  est.ci_lo = std::max(0.0, center - half);
  est.ci_hi = std::min(1.0, center + half);
  return est;
}

Estimate estimate(const Geometry& geo, std::span<const int> start, const StrategyFactory& factory, std::int64_t runs,
                  std::uint64_t master_seed, int threads) {
  if (runs < 1) throw Error(Errc::InvalidArgument, "runs must be at least 1");
  const Config s(start.begin(), start.end());
  const auto wins = map_runs<char>(runs, master_seed, threads, [&](std::int64_t, RandomStream& rng) -> char {
    auto strategy = factory();
    return play(geo, s, *strategy, rng).won ? 1 : 0;
  });
  std::int64_t successes = 0;
  for (char w : wins) successes += w;
  return wilson(successes, runs);
}

TailResult deviation_tail(const Geometry& geo, std::span<const int> start, const StrategyFactory& factory,
                          std::span<const int> target, std::span<const double> q_grid, std::int64_t runs,
                          std::uint64_t master_seed, int threads) {
  if (runs < 1) throw Error(Errc::InvalidArgument, "runs must be at least 1");
  const int n1 = total(target);
  const Config s(start.begin(), start.end());
  PlayOptions opts;
  opts.stop_at_total = n1;
  TailResult out;
  out.runs = runs;
  out.deviations = map_runs<double>(runs, master_seed, threads, [&](std::int64_t, RandomStream& rng) {
    auto strategy = factory();
    const GameResult r = play(geo, s, *strategy, rng, opts);
    double d = 0;
    for (std::size_t e = 0; e < target.size(); ++e) {
      const double x = r.final_state[e] - target[e];
      d += x * x;
    }
    return std::sqrt(d);
  });
  for (double d : out.deviations)
    if (d == 0) ++out.exact_hits;
  for (double q : q_grid) {
    std::int64_t above = 0;
    for (double d : out.deviations)
      if (d > q) ++above;
    out.tail.push_back({q, static_cast<double>(above) / static_cast<double>(runs)});
  }
  return out;
}

EdgeVector expected_next_point(const Graph& g, const VertexWeights& w, const MoveKernel& kernel,
                               std::span<const int> state) {
  const int r = total(state);
  if (r < 2) throw Error(Errc::InvalidArgument, "need at least two remaining units");
  EdgeVector mean(state.size(), 0.0);
  for (int v = 1; v <= g.vertex_count(); ++v) {
    for (int e = 0; e < g.edge_count(); ++e) {
      const double pr = w(v) * kernel.prob(v, e);
      if (pr == 0) continue;
      for (std::size_t f = 0; f < state.size(); ++f)
        mean[f] += pr * (state[f] - (static_cast<int>(f) == e ? 1 : 0)) / static_cast<double>(r - 1);
    }
  }
  return mean;
}

TraceSummary trace_diagnostics(const Geometry& geo, std::span<const int> start, const GameResult& result,
                               const ValueTable* table) {
  TraceSummary out;
  if (result.trace.empty()) return out;
  double max_scale = 0;
  for (const Face& f : geo.critical_faces()) max_scale = std::max(max_scale, f.scale);
  out.z_increment_bound = 2 * max_scale;

  // Metrics of the starting state, measured the same way as the trace.
  const double r0 = total(start);
  EdgeVector counts(start.begin(), start.end());
  double prev_z = geo.critical_faces().empty() ? 0.0 : geo.min_critical_l(counts, r0);
  // S(0) is not stored, so S increments start at the second step.
  double prev_s = result.trace.front().s_value;
  double prev_p = table ? table->value_at(start) : 0.0;
  double sum_dp = 0;
  int count_dp = 0;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const TraceStep& st = result.trace[i];
    out.deviations.push_back(st.deviation);
    if (i > 0) out.s_increments.push_back(st.s_value - prev_s);
    prev_s = st.s_value;
    const double dz = st.z_min_l - prev_z;
    out.z_increments.push_back(dz);
    out.max_abs_z_increment = std::max(out.max_abs_z_increment, std::abs(dz));
    prev_z = st.z_min_l;
    if (st.stage == 1) {
      ++out.stage1_steps;
      if (!std::isnan(st.s_drift) && st.s_drift > 1e-12) ++out.positive_drift_steps;
    }
    if (table && st.edge >= 0) {
      const double p = table->value_at(st.state);
      sum_dp += p - prev_p;
      ++count_dp;
      prev_p = p;
    }
  }
  if (table && count_dp > 0) out.mean_p_increment = sum_dp / count_dp;
  return out;
}

std::string estimate_json(const Graph& g, std::span<const int> config, const std::string& strategy,
                          const Estimate& e, std::uint64_t seed) {
  char hash[19];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(g.hash()));
  nlohmann::ordered_json j;
  j["graph_hash"] = hash;
  j["config"] = std::vector<int>(config.begin(), config.end());
  j["strategy"] = strategy;
  j["runs"] = e.runs;
  j["successes"] = e.successes;
  j["p_hat"] = e.p_hat;
  j["ci_lo"] = e.ci_lo;
  j["ci_hi"] = e.ci_hi;
  j["seed"] = seed;
  return j.dump();
}

}  // namespace sapg
