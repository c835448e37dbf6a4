#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "sapg/error.hpp"
#include "sapg/experiments.hpp"

using namespace sapg;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("phase diagram for n = 1 is a fixed table") {
  const PhaseGrid grid = phase_diagram(path_graph(4), 1, VertexWeights::uniform(4));
  std::ostringstream out;
  write_phase(out, path_graph(4), grid, OutputFormat::Csv);
  CHECK(out.str() ==
        "m,l,p\n"
        "0,0,0.5\n"
        "0,1,0.5\n"
        "1,0,0.5\n");
  CHECK(grid.max.config == Config{0, 0, 1});
  CHECK(grid.max.value == 0.5);
}

TEST_CASE("phase diagram agrees with the table") {
  const auto table = compute_table(path_graph(4), 40);
  const PhaseGrid grid = phase_diagram(table, 40);
  CHECK(grid.rows.size() == 41 * 42 / 2);
  for (const PhaseRow& r : grid.rows) CHECK(r.p == table.value_at(Config{r.m, 40 - r.m - r.l, r.l}));
  const PhaseGrid streamed = phase_diagram(path_graph(4), 40, VertexWeights::uniform(4));
  REQUIRE(streamed.rows.size() == grid.rows.size());
  for (std::size_t i = 0; i < grid.rows.size(); ++i) CHECK(streamed.rows[i].p == grid.rows[i].p);
  CHECK(spot_verify(grid, table).mismatches == 0);
  CHECK_THROWS_AS(phase_diagram(path_graph(5), 4, VertexWeights::uniform(5)), Error);
}

TEST_CASE("transition scan") {
  const Graph g = path_graph(4);
  const ScanResult in = transition_scan(g, std::vector<double>{0.375, 0.25, 0.375}, {8, 16, 24}, VertexWeights::uniform(4));
  CHECK(in.region == Region::InteriorReachable);
  CHECK(in.successive_diffs.size() == 2);
  CHECK(!in.fit);
  const ScanResult out = transition_scan(g, std::vector<double>{0.15, 0.35, 0.5}, {40, 60, 80, 100}, VertexWeights::uniform(4));
  CHECK(out.region == Region::Inaccessible);
  REQUIRE(out.fit);
  CHECK(out.fit->slope < 0);
  CHECK(out.rows[0].config == Config{6, 14, 20});
  for (const ScanRow& r : out.rows) CHECK(r.p < std::exp(-r.n * 0.01 / 4));
  std::ostringstream csv;
  write_scan(csv, g, out, OutputFormat::Csv);
  CHECK(first_line(csv.str()) == "n,config,p,log_p");
  CHECK(csv.str().find("\n40,6 14 20,") != std::string::npos);
}

TEST_CASE("line fit") {
  const std::vector<double> xs{1, 2, 3, 4}, ys{3, 5, 7, 9};
  const LineFit f = fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.r2 == doctest::Approx(1));
  CHECK(f.points == 4);
}

TEST_CASE("a_star") {
  CHECK(a_star(1, 3) == doctest::Approx(0.5));
  CHECK(a_star(0, 4) == 0.0);
  CHECK(a_star(3, 4) == 1.0);
  CHECK(a_star(1, 4) == doctest::Approx(1.0 - a_star(2, 4)).epsilon(1e-12));
  for (int k = 3; k <= 8; ++k)
    for (int j = 1; j <= k - 2; ++j) {
      CHECK(a_star(j, k) > static_cast<double>(j) / k);
      CHECK(a_star(j, k) < static_cast<double>(j + 1) / k);
    }
  CHECK(a_star(1, 4) == doctest::Approx(0.36907).epsilon(1e-4));
  CHECK_THROWS_AS(a_star(3, 3), Error);
  CHECK_THROWS_AS(a_star(0, 2), Error);
}

TEST_CASE("window collapse rows") {
  const auto rows = window_collapse(path_graph(4), {16, 64}, {0.5, 1.0}, VertexWeights::uniform(4));
  CHECK(rows.size() == 2 * 2 * 3);
  for (const WindowRow& r : rows) CHECK(r.reference == doctest::Approx(std::exp(-r.a * r.a / 8)));
  CHECK(collapse_gap(rows, 16, 64));
  CHECK(!collapse_gap(rows, 16, 32));
  std::ostringstream csv;
  write_window(csv, path_graph(4), rows, OutputFormat::Csv);
  CHECK(first_line(csv.str()) == "n,A,slice,empty,max,argmax,reference");
}

TEST_CASE("json outputs parse and carry the graph hash") {
  const PhaseGrid grid = phase_diagram(path_graph(4), 3, VertexWeights::uniform(4));
  std::ostringstream out;
  write_phase(out, path_graph(4), grid, OutputFormat::Json);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j.contains("graph_hash"));
  CHECK(j["rows"].size() == 10);

  std::ostringstream conj;
  write_conjecture(conj, 4, conjecture_scan(4, {4, 8}), OutputFormat::Csv);
  CHECK(first_line(conj.str()) == "n,j,partial_sum,a_star,gap,mirror_gap");
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3, 0.25832988379072902, 1e-300}) CHECK(std::stod(format_double(v)) == v);
}
