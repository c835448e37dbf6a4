#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sapg/error.hpp"
#include "sapg/experiments.hpp"
#include "sapg/region.hpp"
#include "sapg/simulate.hpp"
#include "sapg/strategy.hpp"
#include "sapg/value_engine.hpp"

namespace py = pybind11;
using namespace sapg;

namespace {

VertexWeights weights_or_uniform(const Graph& g, const std::optional<std::vector<double>>& w) {
  return w ? VertexWeights::from(*w) : VertexWeights::uniform(g.vertex_count());
}

EngineOptions engine_options(std::optional<std::uint64_t> budget_mib, int threads) {
  EngineOptions o;
  if (budget_mib) o.memory_budget = *budget_mib << 20;
  o.threads = threads;
  return o;
}

py::dict estimate_dict(const Estimate& e) {
  py::dict d;
  d["runs"] = e.runs;
  d["successes"] = e.successes;
  d["p_hat"] = e.p_hat;
  d["ci_lo"] = e.ci_lo;
  d["ci_hi"] = e.ci_hi;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sequential assignment game: exact values, region geometry and simulation.";

  py::register_exception<Error>(m, "SapgError", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def(py::init([](int k, const std::vector<std::pair<int, int>>& edges) { return build_graph(k, edges); }),
           py::arg("k"), py::arg("edges"))
      .def_static("parse", [](const std::string& text) { return parse_graph(text); })
      .def_static("load", &load_graph_file)
      .def_static("path", &path_graph)
      .def_static("cycle", &cycle_graph)
      .def_static("star", &star_graph)
      .def_static("complete", &complete_graph)
      .def_property_readonly("vertex_count", &Graph::vertex_count)
      .def_property_readonly("edge_count", &Graph::edge_count)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::pair<int, int>> out;
                               for (const auto& e : g.edges()) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def("hash", &Graph::hash)
      .def("__str__", &format_graph)
      .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; });

  m.def(
      "classify",
      [](const Graph& g, const std::vector<double>& x, std::optional<std::vector<double>> w) {
        const RegionClass rc = classify_point(g, x, weights_or_uniform(g, w));
        return py::make_tuple(std::string(region_name(rc.region)), rc.face.indices(), rc.slack);
      },
      py::arg("graph"), py::arg("x"), py::arg("weights") = py::none(),
      "Region class name, minimizing face (edge indices) and its slack.");

  m.def(
      "membership_flow",
      [](const Graph& g, const std::vector<double>& x, std::optional<std::vector<double>> w) {
        const FlowMembership fm = membership_flow(g, x, weights_or_uniform(g, w));
        py::object kernel = py::none();
        if (fm.kernel) {
          std::vector<std::vector<double>> rows;
          for (int v = 1; v <= fm.kernel->k; ++v) {
            std::vector<double> row;
            for (int e = 0; e < fm.kernel->m; ++e) row.push_back(fm.kernel->prob(v, e));
            rows.push_back(std::move(row));
          }
          kernel = py::cast(rows);
        }
        return py::make_tuple(fm.value, kernel);
      },
      py::arg("graph"), py::arg("x"), py::arg("weights") = py::none(),
      "Max-flow value and, when it is 1, the per-vertex kernel rows.");

  m.def(
      "x_star",
      [](const Graph& g, std::optional<std::vector<double>> w) { return Geometry(g, weights_or_uniform(g, w)).x_star(); },
      py::arg("graph"), py::arg("weights") = py::none());
  m.def(
      "boundary_distance",
      [](const Graph& g, const std::vector<double>& x) { return boundary_distance(g, x); }, py::arg("graph"),
      py::arg("x"));

  py::class_<ValueTable, std::shared_ptr<ValueTable>>(m, "ValueTable")
      .def(py::init([](const Graph& g, int n_max, std::optional<std::vector<double>> w,
                       std::optional<std::uint64_t> budget_mib, int threads) {
             auto t = compute_table(g, n_max, weights_or_uniform(g, w), engine_options(budget_mib, threads));
             return std::make_shared<ValueTable>(std::move(t));
           }),
           py::arg("graph"), py::arg("n_max"), py::arg("weights") = py::none(), py::arg("memory_budget_mib") = py::none(),
           py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>())
      .def_static(
          "load",
          [](const std::string& path, const Graph& g) { return std::make_shared<ValueTable>(load_table(path, g)); },
          py::arg("path"), py::arg("graph"))
      .def("save", [](const ValueTable& t, const std::string& path) { save_table(t, path); })
      .def_property_readonly("n_max", &ValueTable::n_max)
      .def_property_readonly("graph", &ValueTable::graph)
      .def("value", [](const ValueTable& t, const Config& c) { return t.value_at(c); }, py::arg("config"))
      .def("layer", [](const ValueTable& t, int n) {
        const auto l = t.layer(n);
        return std::vector<double>(l.begin(), l.end());
      })
      .def("argmax", [](const ValueTable& t, int n) {
        const ConfigValue cv = argmax_config(t, n);
        return py::make_tuple(cv.config, cv.value);
      })
      .def("optimal_move", [](const ValueTable& t, const Config& c, int v) { return optimal_move(t, c, v); },
           py::arg("config"), py::arg("vertex"));

  m.def(
      "phase_diagram",
      [](const Graph& g, int n) {
        const PhaseGrid grid = phase_diagram(g, n, VertexWeights::uniform(g.vertex_count()));
        std::vector<std::tuple<int, int, double>> rows;
        rows.reserve(grid.rows.size());
        for (const PhaseRow& r : grid.rows) rows.emplace_back(r.m, r.l, r.p);
        return py::make_tuple(rows, grid.max.config, grid.max.value);
      },
      py::arg("graph"), py::arg("n"), "Rows (m, l, p) plus the argmax config and value.");

  m.def(
      "transition_scan",
      [](const Graph& g, const std::vector<double>& x, const std::vector<int>& ns) {
        const ScanResult s = transition_scan(g, x, ns, VertexWeights::uniform(g.vertex_count()));
        py::dict d;
        d["region"] = std::string(region_name(s.region));
        std::vector<std::tuple<int, Config, double>> rows;
        for (const ScanRow& r : s.rows) rows.emplace_back(r.n, r.config, r.p);
        d["rows"] = rows;
        if (s.fit) d["fit"] = py::make_tuple(s.fit->slope, s.fit->intercept, s.fit->r2);
        d["successive_diffs"] = s.successive_diffs;
        return d;
      },
      py::arg("graph"), py::arg("x"), py::arg("n_list"));

  m.def("a_star", &a_star, py::arg("j"), py::arg("k"));

  m.def(
      "simulate",
      [](const Graph& g, const Config& start, const std::string& strategy, std::int64_t runs, std::uint64_t seed,
         int threads) {
        Estimate e;
        {
          py::gil_scoped_release release;
          StrategyContext ctx;
          ctx.geo = std::make_shared<const Geometry>(g);
          ctx.start = start;
          if (strategy == "optimal") ctx.table = std::make_shared<const ValueTable>(compute_table(g, total(start)));
          const StrategyFactory f = make_strategy_factory(strategy, ctx);
          e = estimate(*ctx.geo, start, f, runs, seed, threads);
        }
        return estimate_dict(e);
      },
      py::arg("graph"), py::arg("start"), py::arg("strategy") = "optimal", py::arg("runs") = 10000,
      py::arg("seed") = 1, py::arg("threads") = 0, "Monte Carlo win frequency with a Wilson 95% interval.");

  m.def("wilson", [](std::int64_t s, std::int64_t n) { return estimate_dict(wilson(s, n)); });
  m.def("round_config", [](const std::vector<double>& x, int n) { return round_config(x, n); });
}
