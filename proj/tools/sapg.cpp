// sapg: command-line driver for the assignment game lab.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapg/error.hpp"
#include "sapg/experiments.hpp"
#include "sapg/graph.hpp"
#include "sapg/region.hpp"
#include "sapg/simulate.hpp"
#include "sapg/strategy.hpp"
#include "sapg/value_engine.hpp"

namespace {

using namespace sapg;
using nlohmann::ordered_json;

constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

struct Common {
  std::string graph;
  std::string weights;
  std::string out;
  std::string format = "csv";
  std::string cache;
  int n = -1;
  std::uint64_t seed = 1;
  std::int64_t runs = 10000;
  int threads = 0;
  double budget_mib = static_cast<double>(kDefaultMemoryBudget) / (1 << 20);
};

Graph load_graph(const Common& c) { return c.graph.empty() ? path_graph(4) : load_graph_file(c.graph); }

VertexWeights load_weights(const Common& c, const Graph& g) {
  if (c.weights.empty()) return VertexWeights::uniform(g.vertex_count());
  std::ifstream in(c.weights);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + c.weights);
  std::vector<double> p;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        p.push_back(std::stod(tok));
      } catch (const std::logic_error&) {
        throw Error(Errc::ParseError, "bad weight '" + tok + "'");
      }
    }
  }
  if (static_cast<int>(p.size()) != g.vertex_count())
    throw Error(Errc::InvalidArgument, "weights file has " + std::to_string(p.size()) + " entries, graph has " +
                                           std::to_string(g.vertex_count()) + " vertices");
  return VertexWeights::from(std::move(p));
}

EngineOptions engine(const Common& c) {
  EngineOptions o;
  o.memory_budget = static_cast<std::uint64_t>(c.budget_mib * (1 << 20));
  o.threads = c.threads;
  return o;
}

OutputFormat format_of(const Common& c) { return c.format == "json" ? OutputFormat::Json : OutputFormat::Csv; }

// Writes to --out or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error(Errc::IoFailure, "cannot open " + path + " for writing");
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<int> parse_int_list(const std::string& s) {
  // "a,b,c" or "lo:hi" or "lo:hi:step"
  std::vector<int> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::vector<int> parts;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(std::stoi(tok));
      if (parts.size() < 2 || parts.size() > 3) throw Error(Errc::ParseError, "bad range '" + s + "'");
      const int step = parts.size() == 3 ? parts[2] : 1;
      if (step <= 0) throw Error(Errc::ParseError, "range step must be positive");
      for (int v = parts[0]; v <= parts[1]; v += step) out.push_back(v);
    } else {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::ParseError, "bad integer list '" + s + "'");
  }
  if (out.empty()) throw Error(Errc::InvalidArgument, "empty list '" + s + "'");
  return out;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  try {
    if (s.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
      if (parts.size() != 3 || !(parts[2] > 0)) throw Error(Errc::ParseError, "range needs lo:hi:step");
      const auto count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      for (int i = 0; i <= count; ++i) out.push_back(parts[0] + i * parts[2]);
    } else {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::ParseError, "bad number list '" + s + "'");
  }
  if (out.empty()) throw Error(Errc::InvalidArgument, "empty list '" + s + "'");
  return out;
}

Config parse_config(const std::string& s, const Graph& g) {
  Config c = parse_int_list(s);
  if (static_cast<int>(c.size()) != g.edge_count())
    throw Error(Errc::InvalidArgument, "config has " + std::to_string(c.size()) + " entries, graph has " +
                                           std::to_string(g.edge_count()) + " edges");
  for (int v : c)
    if (v < 0) throw Error(Errc::NegativeEntry, "negative config entry");
  return c;
}

std::string edge_labels(const EdgeSubset& F) {
  std::string s;
  for (int e : F.indices()) {
    if (!s.empty()) s += ' ';
    s += std::to_string(e + 1);
  }
  return s;
}

// Table for totals up to n_max: loaded from --cache when present, else computed.
ValueTable obtain_table(const Common& c, const Graph& g, const VertexWeights& w, int n_max) {
  if (!c.cache.empty() && std::filesystem::exists(c.cache)) {
    ValueTable t = load_table(c.cache, g, std::nullopt, engine(c));
    if (t.n_max() < n_max)
      throw Error(Errc::LayerOutOfRange, "cache covers totals up to " + std::to_string(t.n_max()));
    return t;
  }
  return compute_table(g, n_max, w, engine(c));
}

void add_common(CLI::App* cmd, Common& c, bool with_n = true) {
  cmd->add_option("--graph", c.graph, "Graph file (default: path on 4 vertices)");
  cmd->add_option("--weights", c.weights, "Vertex weights file (k numbers)");
  cmd->add_option("--out", c.out, "Output file (default: stdout)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--cache", c.cache, "Value table cache file");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--memory-budget", c.budget_mib, "Table memory budget in MiB");
  if (with_n) cmd->add_option("--n", c.n, "Total number of units");
}

void add_sim(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--runs", c.runs, "Number of simulated games");
}

int run(int argc, char** argv) {
  CLI::App app{"Sequential assignment game lab"};
  app.require_subcommand(1);
  Common c;

  // region
  auto* region = app.add_subcommand("region", "Region geometry of a point");
  region->require_subcommand(1);
  std::string x_spec;
  auto* classify = region->add_subcommand("classify", "Classify an edge vector");
  auto* flow = region->add_subcommand("flow", "Max-flow membership and move kernel");
  for (auto* s : {classify, flow}) {
    add_common(s, c, false);
    s->add_option("--x", x_spec, "Edge vector: xstar or comma-separated entries")->required();
  }

  // value
  auto* value = app.add_subcommand("value", "Optimal win probabilities");
  value->require_subcommand(1);
  auto* vtable = value->add_subcommand("table", "Compute a table and write it to --cache");
  auto* vat = value->add_subcommand("at", "Value at one config");
  auto* vargmax = value->add_subcommand("argmax", "Maximizing config of total n");
  std::string config_spec;
  for (auto* s : {vtable, vat, vargmax}) add_common(s, c);
  vat->add_option("--config", config_spec, "Config, comma-separated")->required();

  // phase
  auto* phase = app.add_subcommand("phase", "Phase diagram p(m, n-m-l, l) for a three-edge graph");
  add_common(phase, c);
  bool verify = false;
  phase->add_flag("--verify", verify, "Spot re-verify 1% of rows against --cache");

  // scan
  auto* scan = app.add_subcommand("scan", "p(round(n x)) along a list of n");
  add_common(scan, c, false);
  std::string n_list = "40:200";
  scan->add_option("--x", x_spec, "Direction x: xstar or comma-separated entries")->required();
  scan->add_option("--n-list", n_list, "n values: a,b,c or lo:hi[:step]");
  scan->add_flag("--verify", verify, "Spot re-verify rows against --cache");

  // conjecture
  auto* conj = app.add_subcommand("conjecture", "Argmax partial sums on path graphs");
  add_common(conj, c, false);
  int k = 4;
  conj->add_option("--k", k, "Number of path vertices");
  conj->add_option("--n-list", n_list, "n values");

  // window
  auto* window = app.add_subcommand("window", "Slice maxima against A");
  add_common(window, c, false);
  std::string a_grid = "0.5:6:0.5";
  window->add_option("--n-list", n_list, "n values (default 64,256)");
  window->add_option("--a-grid", a_grid, "A values: a,b,c or lo:hi:step");

  // steer
  auto* steer = app.add_subcommand("steer", "Steering report");
  add_common(steer, c);
  add_sim(steer, c);
  std::string strategy_spec;
  std::string start_spec = "xstar";
  std::optional<int> q0;
  int q_max = 20;
  steer->add_option("--strategy", strategy_spec, "steer:<z>:<n1> or steer-k:<z>:<n1>")->required();
  steer->add_option("--start", start_spec, "Start direction; the start config is round(n x)");
  steer->add_option("--q0", q0, "Skip calibration and use this q0");
  steer->add_option("--q-max", q_max, "Largest q in the tail grid");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo win probability");
  add_common(sim, c);
  add_sim(sim, c);
  sim->add_option("--strategy", strategy_spec, "optimal, uniform, greedy, steer:..., steer-k:..., outward:<A>")
      ->required();
  sim->add_option("--config", config_spec, "Start config (else round(n x) from --start)");
  sim->add_option("--start", start_spec, "Start direction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  const Graph g = load_graph(c);
  const VertexWeights w = load_weights(c, g);
  auto geo = std::make_shared<const Geometry>(g, w);
  Sink sink(c.out);
  std::ostream& out = sink.os();
  const OutputFormat fmt = format_of(c);
  auto need_n = [&] {
    if (c.n < 0) throw Error(Errc::InvalidArgument, "--n is required");
    return c.n;
  };

  if (classify->parsed()) {
    const EdgeVector x = parse_z_spec(x_spec, *geo);
    const RegionClass rc = geo->classify(x);
    if (fmt == OutputFormat::Csv) {
      out << "region,face,slack\n"
          << region_name(rc.region) << ',' << edge_labels(rc.face) << ',' << format_double(rc.slack) << '\n';
    } else {
      ordered_json j{{"region", std::string(region_name(rc.region))},
                     {"face", edge_labels(rc.face)},
                     {"slack", rc.slack},
                     {"boundary_distance", geo->boundary_distance(x)}};
      out << j.dump() << '\n';
    }
    return 0;
  }
  if (flow->parsed()) {
    const EdgeVector x = parse_z_spec(x_spec, *geo);
    const FlowMembership fm = geo->membership_flow(x);
    if (fmt == OutputFormat::Csv) {
      out << "v,e,q\n";
      if (fm.kernel)
        for (int v = 1; v <= g.vertex_count(); ++v)
          for (int e : g.incident(v)) out << v << ',' << e + 1 << ',' << format_double(fm.kernel->prob(v, e)) << '\n';
      std::cerr << "flow value " << format_double(fm.value) << '\n';
    } else {
      ordered_json j{{"value", fm.value}, {"in_region", fm.kernel.has_value()}};
      if (fm.kernel) {
        ordered_json rows = ordered_json::array();
        for (int v = 1; v <= g.vertex_count(); ++v) {
          ordered_json row = ordered_json::array();
          for (int e = 0; e < g.edge_count(); ++e) row.push_back(fm.kernel->prob(v, e));
          rows.push_back(std::move(row));
        }
        j["kernel"] = std::move(rows);
      }
      out << j.dump() << '\n';
    }
    return 0;
  }
  if (vtable->parsed()) {
    if (c.cache.empty()) throw Error(Errc::InvalidArgument, "--cache is required");
    const int n = need_n();
    compute_table_to_file(g, n, w, c.cache, engine(c));
    ordered_json j{{"cache", c.cache},
                   {"n_max", n},
                   {"bytes", ValueTable::bytes_required(g.edge_count(), n)}};
    out << j.dump() << '\n';
    return 0;
  }
  if (vat->parsed()) {
    const Config cfg = parse_config(config_spec, g);
    const ValueTable t = obtain_table(c, g, w, total(cfg));
    const double p = t.value_at(cfg);
    if (fmt == OutputFormat::Csv)
      out << "p\n" << format_double(p) << '\n';
    else
      out << ordered_json{{"config", cfg}, {"p", p}}.dump() << '\n';
    return 0;
  }
  if (vargmax->parsed()) {
    const int n = need_n();
    const ValueTable t = obtain_table(c, g, w, n);
    const ConfigValue best = argmax_config(t, n);
    if (fmt == OutputFormat::Csv) {
      out << "n,config,p\n" << n << ',';
      for (std::size_t i = 0; i < best.config.size(); ++i) out << (i ? " " : "") << best.config[i];
      out << ',' << format_double(best.value) << '\n';
    } else {
      out << ordered_json{{"n", n}, {"config", best.config}, {"p", best.value}}.dump() << '\n';
    }
    return 0;
  }
  if (phase->parsed()) {
    const int n = need_n();
    const PhaseGrid grid = phase_diagram(g, n, w, engine(c));
    if (verify) {
      if (c.cache.empty()) throw Error(Errc::InvalidArgument, "--verify needs --cache");
      const ValueTable t = load_table(c.cache, g, std::nullopt, engine(c));
      const SpotCheck sc = spot_verify(grid, t);
      std::cerr << "verified " << sc.checked << " rows, " << sc.mismatches << " mismatches\n";
      if (sc.mismatches) return 1;
    }
    write_phase(out, g, grid, fmt);
    std::cerr << "max " << format_double(grid.max.value) << " at (" << grid.max.config[0] << ","
              << grid.max.config[1] << "," << grid.max.config[2] << ")\n";
    return 0;
  }
  if (scan->parsed()) {
    const EdgeVector x = parse_z_spec(x_spec, *geo);
    const ScanResult res = transition_scan(g, x, parse_int_list(n_list), w, engine(c));
    if (verify) {
      if (c.cache.empty()) throw Error(Errc::InvalidArgument, "--verify needs --cache");
      const ValueTable t = load_table(c.cache, g, std::nullopt, engine(c));
      const SpotCheck sc = spot_verify(res, t);
      std::cerr << "verified " << sc.checked << " rows, " << sc.mismatches << " mismatches\n";
      if (sc.mismatches) return 1;
    }
    write_scan(out, g, res, fmt);
    if (res.fit)
      std::cerr << "slope " << format_double(res.fit->slope) << " r2 " << format_double(res.fit->r2) << '\n';
    return 0;
  }
  if (conj->parsed()) {
    if (conj->count("--n-list") == 0) n_list = "4,50,100,200";
    write_conjecture(out, k, conjecture_scan(k, parse_int_list(n_list), engine(c)), fmt);
    return 0;
  }
  if (window->parsed()) {
    if (window->count("--n-list") == 0) n_list = "64,256";
    const auto rows = window_collapse(g, parse_int_list(n_list), parse_real_list(a_grid), w, engine(c));
    write_window(out, g, rows, fmt);
    return 0;
  }
  if (steer->parsed()) {
    const int n = need_n();
    const Config start = round_config(parse_z_spec(start_spec, *geo), n);
    PlanOptions po;
    po.q0 = q0;
    po.calibration_seed = c.seed;
    std::vector<double> qs;
    for (int q = 0; q <= q_max; ++q) qs.push_back(q);
    const SteeringReport rep = steering_report(geo, start, strategy_spec, c.runs, c.seed, qs, po, c.threads);
    write_steering(out, g, rep, fmt);
    return 0;
  }
  if (sim->parsed()) {
    Config start;
    if (!config_spec.empty()) {
      start = parse_config(config_spec, g);
    } else {
      const int n = need_n();
      if (strategy_spec.rfind("outward:", 0) == 0 && sim->count("--start") == 0) {
        const double a = std::stod(strategy_spec.substr(8));
        start = round_config(outward_start(*geo, a, n), n);
      } else {
        start = round_config(parse_z_spec(start_spec, *geo), n);
      }
    }
    StrategyContext ctx;
    ctx.geo = geo;
    ctx.start = start;
    ctx.plan.calibration_seed = c.seed;
    if (strategy_spec == "optimal")
      ctx.table = std::make_shared<const ValueTable>(obtain_table(c, g, w, total(start)));
    const auto factory = make_strategy_factory(strategy_spec, ctx);
    const Estimate est = estimate(*geo, start, factory, c.runs, c.seed, c.threads);
    if (fmt == OutputFormat::Json) {
      out << estimate_json(g, start, strategy_spec, est, c.seed) << '\n';
    } else {
      out << "runs,successes,p_hat,ci_lo,ci_hi,seed\n"
          << est.runs << ',' << est.successes << ',' << format_double(est.p_hat) << ',' << format_double(est.ci_lo)
          << ',' << format_double(est.ci_hi) << ',' << c.seed << '\n';
    }
    return 0;
  }
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sapg::Error& e) {
    std::cerr << "sapg: " << e.what() << '\n';
    switch (e.code()) {
      case sapg::Errc::MemoryBudgetExceeded: return kExitBudget;
      case sapg::Errc::IllegalStrategyMove: return 1;
      default: return kExitInput;
    }
  } catch (const std::exception& e) {
    std::cerr << "sapg: " << e.what() << '\n';
    return 1;
  }
}
