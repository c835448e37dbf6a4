#include "sapg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "sapg/error.hpp"

namespace sapg {

namespace {

using nlohmann::ordered_json;

std::string hash_hex(const Graph& g) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(g.hash()));
  return buf;
}

std::string config_text(std::span<const int> c) {
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(c[i]);
  }
  return s;
}

// JSON has no infinities; -inf log values become null.
ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

std::string_view slice_name(SliceKind k) {
  switch (k) {
    case SliceKind::I: return "I";
    case SliceKind::II: return "II";
    case SliceKind::III: return "III";
  }
  return "?";
}

PhaseGrid grid_from_layer(int n, std::span<const double> layer, const CompositionIndex& index) {
  PhaseGrid grid;
  grid.n = n;
  grid.rows.reserve(layer.size());
  Config c(3, 0);
  for (int m = 0; m <= n; ++m) {
    for (int l = 0; m + l <= n; ++l) {
      c = {m, n - m - l, l};
      const double p = layer[index.rank(c)];
      grid.rows.push_back({m, l, p});
      if (grid.max.config.empty() || p > grid.max.value || (p == grid.max.value && c < grid.max.config))
        grid.max = {c, p};
    }
  }
  return grid;
}

bool table_fits(int m, int n_max, const EngineOptions& options) {
  return ValueTable::bytes_required(m, n_max) <= options.memory_budget;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

PhaseGrid phase_diagram(const Graph& g, int n, const VertexWeights& w, const EngineOptions& options) {
  if (g.edge_count() != 3) throw Error(Errc::InvalidArgument, "phase diagram needs a graph with three edges");
  if (n < 0) throw Error(Errc::InvalidArgument, "n must be non-negative");
  const auto layer = compute_final_layer(g, n, w, options);
  return grid_from_layer(n, layer, CompositionIndex(3, n));
}

PhaseGrid phase_diagram(const ValueTable& table, int n) {
  if (table.graph().edge_count() != 3) throw Error(Errc::InvalidArgument, "phase diagram needs a graph with three edges");
  return grid_from_layer(n, table.layer(n), table.index());
}

// ---------------------------------------------------------------------------

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int k = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
    ++k;
  }
  LineFit fit;
  fit.points = k;
  if (k < 2) return fit;
  const double vx = sxx - sx * sx / k;
  const double vy = syy - sy * sy / k;
  const double cxy = sxy - sx * sy / k;
  if (vx <= 0) return fit;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / k;
  fit.r2 = vy > 0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return fit;
}

ScanResult transition_scan(const Graph& g, std::span<const double> x, std::vector<int> n_list, const VertexWeights& w,
                           const EngineOptions& options) {
  if (n_list.empty()) throw Error(Errc::InvalidArgument, "empty n-list");
  for (int n : n_list)
    if (n < 1) throw Error(Errc::InvalidArgument, "n values must be positive");
  const Geometry geo(g, w);
  ScanResult out;
  out.x.assign(x.begin(), x.end());
  out.region = geo.classify(x).region;
  const int n_max = *std::max_element(n_list.begin(), n_list.end());

  std::optional<ValueTable> table;
  if (table_fits(g.edge_count(), n_max, options)) table.emplace(compute_table(g, n_max, w, options));
  for (int n : n_list) {
    ScanRow row;
    row.n = n;
    row.config = round_config(x, n);
    if (table) {
      row.p = table->value_at(row.config);
    } else {
      const auto layer = compute_final_layer(g, n, w, options);
      row.p = layer[CompositionIndex(g.edge_count(), n).rank(row.config)];
    }
    row.log_p = row.p > 0 ? std::log(row.p) : -std::numeric_limits<double>::infinity();
    out.rows.push_back(std::move(row));
  }
  if (out.region == Region::Inaccessible) {
    std::vector<double> xs, ys;
    for (const auto& r : out.rows) {
      xs.push_back(r.n);
      ys.push_back(r.log_p);
    }
    out.fit = fit_line(xs, ys);
  } else if (out.region == Region::InteriorReachable) {
    for (std::size_t i = 1; i < out.rows.size(); ++i)
      out.successive_diffs.push_back(std::abs(out.rows[i].p - out.rows[i - 1].p));
  }
  return out;
}

// ---------------------------------------------------------------------------

double a_star(int j, int k) {
  if (k < 3 || j < 0 || j > k - 1) throw Error(Errc::DomainError, "a_* needs k >= 3 and 0 <= j <= k-1");
  if (j == 0) return 0.0;
  if (j == k - 1) return 1.0;
  const double num = std::log(static_cast<double>(k - j - 1) / (k - j));
  const double den = std::log(static_cast<double>(j) * (k - j - 1) / (static_cast<double>(j + 1) * (k - j)));
  return num / den;
}

std::vector<ConjectureRow> conjecture_scan(int k, const std::vector<int>& n_list, const EngineOptions& options) {
  if (k < 3) throw Error(Errc::DomainError, "conjecture scan needs k >= 3");
  if (n_list.empty()) throw Error(Errc::InvalidArgument, "empty n-list");
  for (int n : n_list)
    if (n < 1) throw Error(Errc::InvalidArgument, "n values must be positive");
  const Graph g = path_graph(k);
  const int n_max = *std::max_element(n_list.begin(), n_list.end());
  const auto table = compute_table(g, n_max, VertexWeights::uniform(k), options);
  std::vector<ConjectureRow> rows;
  for (int n : n_list) {
    const Config c = argmax_config(table, n).config;
    // Edge l (1-based) is c[l - 1]; the mirrored path reverses the edges.
    double sum = 0, mirror = 0;
    for (int j = 0; j <= k - 1; ++j) {
      if (j >= 1) {
        sum += c[static_cast<std::size_t>(j - 1)];
        mirror += c[static_cast<std::size_t>(k - 1 - j)];
      }
      ConjectureRow row;
      row.n = n;
      row.j = j;
      row.partial_sum = sum / n;
      row.a_star = a_star(j, k);
      row.gap = row.partial_sum - row.a_star;
      row.mirror_gap = mirror / n - row.a_star;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::vector<WindowRow> window_collapse(const Graph& g, const std::vector<int>& n_list, const std::vector<double>& a_grid,
                                       const VertexWeights& w, const EngineOptions& options) {
  if (n_list.empty() || a_grid.empty()) throw Error(Errc::InvalidArgument, "empty n-list or A-grid");
  for (double a : a_grid)
    if (!(a > 0)) throw Error(Errc::InvalidArgument, "A values must be positive");
  const int n_max = *std::max_element(n_list.begin(), n_list.end());
  const auto table = compute_table(g, n_max, w, options);
  std::vector<WindowRow> rows;
  for (int n : n_list) {
    for (double a : a_grid) {
      for (SliceKind kind : {SliceKind::I, SliceKind::II, SliceKind::III}) {
        WindowRow row;
        row.n = n;
        row.a = a;
        row.kind = kind;
        row.reference = std::exp(-a * a / 8);
        if (auto best = slice_max(table, n, SliceSpec{a, kind})) {
          row.empty = false;
          row.max = best->value;
          row.argmax = best->config;
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::optional<double> collapse_gap(const std::vector<WindowRow>& rows, int n_a, int n_b, SliceKind kind) {
  std::optional<double> gap;
  for (const auto& ra : rows) {
    if (ra.n != n_a || ra.kind != kind || ra.empty) continue;
    for (const auto& rb : rows) {
      if (rb.n != n_b || rb.kind != kind || rb.empty || rb.a != ra.a) continue;
      gap = std::max(gap.value_or(0.0), std::abs(ra.max - rb.max));
    }
  }
  return gap;
}

// ---------------------------------------------------------------------------

SteeringReport steering_report(std::shared_ptr<const Geometry> geo, const Config& start, const std::string& spec,
                               std::int64_t runs, std::uint64_t seed, const std::vector<double>& q_grid,
                               const PlanOptions& plan_options, int threads) {
  if (spec.rfind("steer", 0) != 0) throw Error(Errc::InvalidArgument, "steering report needs a steer: or steer-k: strategy");
  StrategyContext ctx{geo, nullptr, start, plan_options};
  const auto factory = make_strategy_factory(spec, ctx);
  SteeringReport rep;
  rep.strategy = spec;
  rep.start = start;
  {
    auto probe = factory();
    if (auto* s = dynamic_cast<SteerExact*>(probe.get())) rep.plan = s->plan();
  }
  if (rep.plan.target.empty()) {
    // steer-k carries the same plan; rebuild it for reporting.
    const auto colon = spec.find(':'), last = spec.rfind(':');
    rep.plan = make_steer_plan(geo, start, parse_z_spec(spec.substr(colon + 1, last - colon - 1), *geo),
                               std::stoi(spec.substr(last + 1)), plan_options);
  }
  rep.tail = deviation_tail(*geo, start, factory, rep.plan.target, q_grid, runs, seed, threads);
  rep.hits = wilson(rep.tail.exact_hits, runs);

  TraceSpec ts;
  ts.z = rep.plan.z;
  EdgeVector u = normalized(start);
  for (std::size_t e = 0; e < u.size(); ++e) u[e] -= ts.z[e];
  const double len = norm2(u);
  if (len > 0) {
    for (double& v : u) v /= len;
    ts.u = std::move(u);
  }
  RandomStream rng(child_seed(seed, 0));
  auto strategy = factory();
  PlayOptions po;
  po.stop_at_total = rep.plan.n1;
  po.trace = ts;
  const GameResult game = play(*geo, start, *strategy, rng, po);
  rep.trace = trace_diagnostics(*geo, start, game);
  rep.trace_steps = game.steps;
  return rep;
}

// ---------------------------------------------------------------------------

void write_phase(std::ostream& out, const Graph& g, const PhaseGrid& grid, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    out << "m,l,p\n";
    for (const auto& r : grid.rows) out << r.m << ',' << r.l << ',' << format_double(r.p) << '\n';
    return;
  }
  ordered_json j;
  j["graph_hash"] = hash_hex(g);
  j["n"] = grid.n;
  j["max"] = grid.max.value;
  j["argmax"] = grid.max.config;
  ordered_json rows = ordered_json::array();
  for (const auto& r : grid.rows) rows.push_back({r.m, r.l, r.p});
  j["rows"] = std::move(rows);
  out << j.dump() << '\n';
}

void write_scan(std::ostream& out, const Graph& g, const ScanResult& scan, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    out << "n,config,p,log_p\n";
    for (const auto& r : scan.rows)
      out << r.n << ',' << config_text(r.config) << ',' << format_double(r.p) << ',' << format_double(r.log_p) << '\n';
    return;
  }
  ordered_json j;
  j["graph_hash"] = hash_hex(g);
  j["x"] = scan.x;
  j["region"] = std::string(region_name(scan.region));
  ordered_json rows = ordered_json::array();
  for (const auto& r : scan.rows)
    rows.push_back({{"n", r.n}, {"config", r.config}, {"p", r.p}, {"log_p", finite_or_null(r.log_p)}});
  j["rows"] = std::move(rows);
  if (scan.fit)
    j["fit"] = {{"slope", scan.fit->slope}, {"intercept", scan.fit->intercept}, {"r2", scan.fit->r2},
                {"points", scan.fit->points}};
  if (!scan.successive_diffs.empty()) j["successive_diffs"] = scan.successive_diffs;
  out << j.dump() << '\n';
}

void write_conjecture(std::ostream& out, int k, const std::vector<ConjectureRow>& rows, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    out << "n,j,partial_sum,a_star,gap,mirror_gap\n";
    for (const auto& r : rows)
      out << r.n << ',' << r.j << ',' << format_double(r.partial_sum) << ',' << format_double(r.a_star) << ','
          << format_double(r.gap) << ',' << format_double(r.mirror_gap) << '\n';
    return;
  }
  ordered_json j;
  j["k"] = k;
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"n", r.n},
                   {"j", r.j},
                   {"partial_sum", r.partial_sum},
                   {"a_star", r.a_star},
                   {"gap", r.gap},
                   {"mirror_gap", r.mirror_gap}});
  j["rows"] = std::move(arr);
  out << j.dump() << '\n';
}

void write_window(std::ostream& out, const Graph& g, const std::vector<WindowRow>& rows, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    out << "n,A,slice,empty,max,argmax,reference\n";
    for (const auto& r : rows)
      out << r.n << ',' << format_double(r.a) << ',' << slice_name(r.kind) << ',' << (r.empty ? 1 : 0) << ','
          << (r.empty ? std::string() : format_double(r.max)) << ',' << config_text(r.argmax) << ','
          << format_double(r.reference) << '\n';
    return;
  }
  ordered_json j;
  j["graph_hash"] = hash_hex(g);
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"n", r.n},
                   {"A", r.a},
                   {"slice", std::string(slice_name(r.kind))},
                   {"empty", r.empty},
                   {"max", r.empty ? ordered_json(nullptr) : ordered_json(r.max)},
                   {"argmax", r.argmax},
                   {"reference", r.reference}});
  j["rows"] = std::move(arr);
  out << j.dump() << '\n';
}

void write_steering(std::ostream& out, const Graph& g, const SteeringReport& rep, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    out << "q,tail\n";
    for (const auto& t : rep.tail.tail) out << format_double(t.q) << ',' << format_double(t.fraction) << '\n';
    return;
  }
  ordered_json j;
  j["graph_hash"] = hash_hex(g);
  j["strategy"] = rep.strategy;
  j["start"] = rep.start;
  j["plan"] = {{"z", rep.plan.z},       {"n1", rep.plan.n1}, {"target", rep.plan.target},
               {"d0", rep.plan.d0},     {"M", rep.plan.M},   {"q0", rep.plan.q0}};
  j["runs"] = rep.hits.runs;
  j["exact_hits"] = rep.hits.successes;
  j["hit_frequency"] = rep.hits.p_hat;
  j["ci_lo"] = rep.hits.ci_lo;
  j["ci_hi"] = rep.hits.ci_hi;
  ordered_json tail = ordered_json::array();
  for (const auto& t : rep.tail.tail) tail.push_back({{"q", t.q}, {"tail", t.fraction}});
  j["tail"] = std::move(tail);
  j["trace"] = {{"steps", rep.trace_steps},
                {"stage1_steps", rep.trace.stage1_steps},
                {"positive_drift_steps", rep.trace.positive_drift_steps},
                {"max_abs_z_increment", rep.trace.max_abs_z_increment},
                {"z_increment_bound", rep.trace.z_increment_bound}};
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------

SpotCheck spot_verify(const PhaseGrid& grid, const ValueTable& table) {
  SpotCheck sc;
  const std::size_t stride = 100;
  for (std::size_t i = 0; i < grid.rows.size(); i += stride) {
    const auto& r = grid.rows[i];
    const Config c{r.m, grid.n - r.m - r.l, r.l};
    ++sc.checked;
    if (table.value_at(c) != r.p) ++sc.mismatches;
  }
  return sc;
}

SpotCheck spot_verify(const ScanResult& scan, const ValueTable& table) {
  SpotCheck sc;
  const std::size_t stride = 100;
  for (std::size_t i = 0; i < scan.rows.size(); i += stride) {
    ++sc.checked;
    if (table.value_at(scan.rows[i].config) != scan.rows[i].p) ++sc.mismatches;
  }
  return sc;
}

}  // namespace sapg
