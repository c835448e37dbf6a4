// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "sapg/composition.hpp"
#include "sapg/experiments.hpp"
#include "sapg/simulate.hpp"
#include "sapg/strategy.hpp"
#include "support/oracles.hpp"

using namespace sapg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double peak_rss_mib() {
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<double>(ru.ru_maxrss) / 1024.0;
}

template <class F>
void for_each_config(int m, int t, F&& f) {
  Config c(static_cast<std::size_t>(m), 0);
  c.back() = t;
  do f(c);
  while (CompositionIndex::next(c));
}

EdgeVector random_simplex_point(int m, std::mt19937_64& gen) {
  std::exponential_distribution<double> ex(1.0);
  EdgeVector x(static_cast<std::size_t>(m));
  double s = 0;
  for (double& v : x) s += (v = ex(gen));
  for (double& v : x) v /= s;
  return x;
}

EdgeVector random_point_in_k(const Geometry& geo, std::mt19937_64& gen) {
  for (;;) {
    EdgeVector x = random_simplex_point(geo.edge_count(), gen);
    if (geo.in_region(x)) return x;
  }
}

std::vector<Graph> small_graphs() {
  return {path_graph(4), cycle_graph(3), star_graph(3), cycle_graph(4),
          build_graph(5, {{1, 2}, {2, 3}, {3, 1}, {3, 4}, {4, 5}, {5, 3}})};
}

// ---------------------------------------------------------------------------

Outcome grid_maximum() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = compute_table(path_graph(4), 200);
  const PhaseGrid grid = phase_diagram(table, 200);
  const double secs = seconds_since(t0);
  const double rss = peak_rss_mib();
  const Config& c = grid.max.config;
  const double m = c[0] / 200.0, l = c[2] / 200.0;
  const bool inside = 0.25 < m && m < 0.5 && 0.25 < l && l < 0.5;
  const bool ok = std::abs(grid.max.value - 0.2583299) <= 5e-7 && inside && secs <= 60 && rss <= 1024;
  return {ok, fmt("max %.9f at (%d,%d,%d), %.2f s, peak %.0f MiB", grid.max.value, c[0], c[1], c[2], secs, rss)};
}

Outcome oracle_equivalence() {
  double worst = 0;
  long checked = 0;
  for (const Graph& g : {path_graph(4), cycle_graph(3), star_graph(3), cycle_graph(4)}) {
    const auto pl = oracle::plain(g);
    const auto t = compute_table(g, 6);
    for (int n = 0; n <= 6; ++n)
      for_each_config(g.edge_count(), n, [&](const Config& c) {
        worst = std::max(worst, std::abs(t.value_at(c) - oracle::win_probability(pl, c)));
        ++checked;
      });
  }
  const auto p4 = compute_table(path_graph(4), 3);
  const auto tri = compute_table(cycle_graph(3), 3);
  const bool hand = std::abs(p4.value_at(Config{1, 0, 0}) - 0.5) <= 1e-12 &&
                    std::abs(p4.value_at(Config{1, 1, 1}) - 7.0 / 16) <= 1e-12 &&
                    std::abs(tri.value_at(Config{1, 1, 1}) - 2.0 / 3) <= 1e-12;
  return {worst <= 1e-12 && hand, fmt("%ld configs, max diff %.3g, hand values %s", checked, worst, hand ? "ok" : "off")};
}

Outcome region_duality() {
  std::mt19937_64 gen(2024);
  long points = 0, disagreements = 0, kernels = 0, bad_kernels = 0;
  for (const Graph& g : small_graphs()) {
    const Geometry geo(g);
    const auto& w = geo.weights();
    for (int i = 0; i < 10000; ++i) {
      // Mix uniform draws with points pushed onto the boundary.
      EdgeVector x = random_simplex_point(g.edge_count(), gen);
      if (i % 4 == 0) x = geo.clip_to_region(x);
      const bool by_faces = geo.min_slack(x) >= -kRegionTol;
      const FlowMembership fm = geo.membership_flow(x);
      const bool by_flow = fm.value >= 1 - kRegionTol;
      ++points;
      if (by_faces != by_flow || by_flow != fm.kernel.has_value()) ++disagreements;
      if (!fm.kernel) continue;
      ++kernels;
      const MoveKernel& k = *fm.kernel;
      bool ok = true;
      for (int v = 1; v <= g.vertex_count(); ++v) {
        double row = 0;
        for (int e = 0; e < g.edge_count(); ++e) {
          const double q = k.prob(v, e);
          const bool incident = g.edge(e).u == v || g.edge(e).v == v;
          if (q < -1e-9 || (!incident && std::abs(q) > 1e-9)) ok = false;
          row += q;
        }
        if (std::abs(row - 1) > 1e-9) ok = false;
      }
      const EdgeVector mean = k.mean(w);
      for (int e = 0; e < g.edge_count(); ++e)
        if (std::abs(mean[static_cast<std::size_t>(e)] - x[static_cast<std::size_t>(e)]) > 1e-9) ok = false;
      bad_kernels += !ok;
    }
  }
  return {disagreements == 0 && bad_kernels == 0,
          fmt("%ld points, %ld disagreements, %ld kernels, %ld violating", points, disagreements, kernels, bad_kernels)};
}

Outcome martingale_identity() {
  long checked = 0, mismatches = 0;
  auto check_table = [&](const ValueTable& t) {
    const Graph& g = t.graph();
    for (int n = 1; n <= t.n_max(); ++n)
      for_each_config(g.edge_count(), n, [&](const Config& c) {
        Config d = c;
        double acc = 0.0;
        for (int v = 1; v <= g.vertex_count(); ++v) {
          double best = 0.0;
          bool any = false;
          for (int e : g.incident(v)) {
            if (c[static_cast<std::size_t>(e)] == 0) continue;
            --d[static_cast<std::size_t>(e)];
            const double p = t.value_at(d);
            ++d[static_cast<std::size_t>(e)];
            if (!any || p > best) best = p;
            any = true;
          }
          acc += t.weights()(v) * best;
        }
        ++checked;
        mismatches += acc != t.value_at(c);
      });
  };
  check_table(compute_table(path_graph(4), 200));
  check_table(compute_table(cycle_graph(3), 60));
  check_table(compute_table(star_graph(3), 60));
  check_table(compute_table(cycle_graph(4), 30));
  return {mismatches == 0, fmt("%ld configs, %ld mismatches", checked, mismatches)};
}

Outcome bernstein_bound() {
  // Bound on every n in range. The fit uses the n where n x is already an
  // integer config (multiples of 20); in between, largest-remainder rounding
  // moves the config by up to one unit per edge and adds a period-20 staircase
  // to log p. The dense-grid R^2 is reported alongside.
  const EdgeVector x{0.15, 0.35, 0.5};
  std::vector<int> ns;
  for (int n = 40; n <= 200; ++n) ns.push_back(n);
  const ScanResult s = transition_scan(path_graph(4), x, ns, VertexWeights::uniform(4));
  int above = 0;
  std::vector<double> xs, ys;
  for (const ScanRow& r : s.rows) {
    above += r.p > std::exp(-r.n * 0.01 / 4);
    if (r.n % 20 == 0) {
      xs.push_back(r.n);
      ys.push_back(r.log_p);
    }
  }
  const LineFit lattice = fit_line(xs, ys);
  const bool ok = s.region == Region::Inaccessible && above == 0 && lattice.slope < 0 && lattice.r2 >= 0.99;
  return {ok, fmt("%zu values, %d above bound; lattice fit (%d points) slope %.5f R^2 %.4f; dense fit R^2 %.4f",
                  s.rows.size(), above, lattice.points, lattice.slope, lattice.r2, s.fit ? s.fit->r2 : 0.0)};
}

Outcome monte_carlo() {
  const Geometry geo(path_graph(4));
  auto table = std::make_shared<const ValueTable>(compute_table(geo.graph(), 60));
  const Config start = round_config(geo.x_star(), 60);
  const StrategyFactory f = [&] { return optimal_strategy(table); };
  const Estimate a = estimate(geo, start, f, 100000, 20240601);
  const Estimate b = estimate(geo, start, f, 100000, 20240601);
  const double p = table->value_at(start);
  const double tol = 4 * std::sqrt(p * (1 - p) / 1e5);
  const bool same = a.successes == b.successes;
  return {std::abs(a.p_hat - p) <= tol && same,
          fmt("start (%d,%d,%d), p %.6f, p_hat %.6f, tol %.6f, rerun %s", start[0], start[1], start[2], p, a.p_hat, tol,
              same ? "identical" : "differs")};
}

Outcome steering() {
  auto geo = std::make_shared<const Geometry>(path_graph(4));
  const Config start = round_config(std::vector<double>{0.42, 0.22, 0.36}, 400);
  std::vector<double> q;
  for (int i = 0; i <= 20; ++i) q.push_back(i);
  const SteeringReport r = steering_report(geo, start, "steer:xstar:50", 2000, 7, q);
  bool monotone = true;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.tail.tail.size(); ++i) {
    const TailPoint& t = r.tail.tail[i];
    if (i > 0 && t.fraction > r.tail.tail[i - 1].fraction) monotone = false;
    if (t.q >= 1 && t.fraction > 0) {
      xs.push_back(t.q);
      ys.push_back(std::log(t.fraction));
    }
  }
  const LineFit fit = fit_line(xs, ys);
  const bool ok = r.hits.ci_lo > 0 && monotone && fit.points >= 2 && fit.slope < 0;
  return {ok, fmt("hits %lld/%lld (95%% CI lower %.4f), tail %s, log-tail slope %.4f over %d points",
                  static_cast<long long>(r.hits.successes), static_cast<long long>(r.hits.runs), r.hits.ci_lo,
                  monotone ? "non-increasing" : "NOT monotone", fit.slope, fit.points)};
}

Outcome drift_exactness() {
  std::mt19937_64 gen(77);
  double worst = 0;
  int states = 0;
  const auto graphs = small_graphs();
  for (int i = 0; i < 100; ++i) {
    const Graph& g = graphs[static_cast<std::size_t>(i) % graphs.size()];
    const Geometry geo(g);
    std::uniform_int_distribution<int> cap(1, 60);
    Config c(static_cast<std::size_t>(g.edge_count()));
    for (int& x : c) x = cap(gen);
    const double r = total(c);
    const EdgeVector x = normalized(c);
    const MoveKernel k = geo.kernel_for(random_point_in_k(geo, gen));
    const EdgeVector next = expected_next_point(g, geo.weights(), k, c);
    for (std::size_t e = 0; e < x.size(); ++e)
      worst = std::max(worst, std::abs(next[e] - (x[e] + (x[e] - k.target[e]) / (r - 1))));
    ++states;
  }
  // Stage-1 S increments along sampled trajectories toward random interior targets.
  long sampled = 0, positive = 0;
  for (int i = 0; i < 40; ++i) {
    const Graph& g = graphs[static_cast<std::size_t>(i) % graphs.size()];
    auto geo = std::make_shared<const Geometry>(g);
    EdgeVector z;
    do z = random_point_in_k(*geo, gen);
    while (geo->min_slack(z) < 0.02);
    EdgeVector x0;
    do x0 = random_point_in_k(*geo, gen);
    while (geo->min_slack(x0) < 0.02);
    const Config start = round_config(x0, 300);
    SteerStage1 s1(geo, z);
    s1.reset(start);
    PlayOptions opts;
    opts.trace = TraceSpec{z, s1.direction()};
    opts.stop_at_total = 30;
    RandomStream rng(child_seed(99, static_cast<std::uint64_t>(i)));
    const GameResult res = play(*geo, start, s1, rng, opts);
    const TraceSummary sum = trace_diagnostics(*geo, start, res);
    sampled += sum.stage1_steps;
    positive += sum.positive_drift_steps;
  }
  return {worst <= 1e-12 && positive == 0 && sampled > 0,
          fmt("%d states, max drift error %.3g; %ld stage-1 steps, %ld with positive S drift", states, worst, sampled,
              positive)};
}

Outcome window_collapse_check() {
  std::vector<double> grid;
  for (double a = 0.5; a <= 6.0 + 1e-9; a += 0.5) grid.push_back(a);
  const auto rows = window_collapse(path_graph(4), {64, 256}, grid, VertexWeights::uniform(4));
  const auto gap = collapse_gap(rows, 64, 256, SliceKind::I);
  double at4 = 0;
  for (const WindowRow& r : rows)
    if (r.kind == SliceKind::I && std::abs(r.a - 4) < 1e-9 && !r.empty) at4 = std::max(at4, r.max);
  const bool ok = gap && *gap <= 0.05 && at4 <= std::exp(-2.0) + 0.1;
  return {ok, fmt("sup-gap %.5f, B^I max at A=4 %.3g (bound %.4f)", gap ? *gap : -1.0, at4, std::exp(-2.0) + 0.1)};
}

Outcome ode_claims() {
  std::mt19937_64 gen(31);
  const auto graphs = small_graphs();
  double worst_rise = -1e300;
  int runs = 0;
  for (int i = 0; i < 100; ++i) {
    const Geometry geo(graphs[static_cast<std::size_t>(i) % graphs.size()]);
    EdgeVector x0;
    do x0 = random_simplex_point(geo.edge_count(), gen);
    while (geo.min_slack(x0) >= -1e-3);
    // Piecewise-constant random controls in K, redrawn every 0.05 time units.
    std::vector<EdgeVector> controls;
    for (int j = 0; j < 10; ++j) controls.push_back(random_point_in_k(geo, gen));
    const OdeControl u = [&](double t, std::span<const double>) {
      return controls[std::min<std::size_t>(controls.size() - 1, static_cast<std::size_t>(t / 0.05))];
    };
    const OdePath path = ode_trajectory(geo, x0, u, 0.005, 0.5);
    for (std::size_t s = 1; s < path.min_slack.size(); ++s)
      worst_rise = std::max(worst_rise, path.min_slack[s] - path.min_slack[s - 1]);
    ++runs;
  }
  int converged = 0, monotone = 0;
  const Geometry p4(path_graph(4));
  const Geometry* geos[] = {&p4};
  for (int i = 0; i < 10; ++i) {
    const Geometry& geo = *geos[0];
    EdgeVector target;
    do target = random_point_in_k(geo, gen);
    while (geo.min_slack(target) < 0.01 || distance(target, geo.x_star()) < 1e-3);
    const OdePath path = ode_trajectory(geo, geo.x_star(), target, 0.01, 20.0);
    bool mono = true;
    for (std::size_t s = 1; s < path.points.size(); ++s)
      if (distance(path.points[s], target) > distance(path.points[s - 1], target) + 1e-15) mono = false;
    monotone += mono;
    converged += distance(path.points.back(), target) < 1e-3;
  }
  const bool ok = worst_rise <= 1e-6 && converged == 10 && monotone == 10;
  return {ok, fmt("%d controlled paths from the inaccessible region, max slack rise %.3g; %d/10 monotone, %d/10 within 1e-3",
                  runs, worst_rise, monotone, converged)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"grid maximum", grid_maximum},
      {"oracle equivalence", oracle_equivalence},
      {"region duality", region_duality},
      {"martingale identity", martingale_identity},
      {"exponential bound", bernstein_bound},
      {"Monte Carlo consistency", monte_carlo},
      {"steering properties", steering},
      {"drift exactness", drift_exactness},
      {"window collapse", window_collapse_check},
      {"ODE behaviour", ode_claims},
  };
  int failed = 0, i = 0;
  for (const auto& [name, run] : criteria) {
    ++i;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %2d %-24s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i, name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", i - failed, i);
  return failed == 0 ? 0 : 1;
}
