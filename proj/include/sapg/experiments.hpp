#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sapg/region.hpp"
#include "sapg/simulate.hpp"
#include "sapg/strategy.hpp"
#include "sapg/value_engine.hpp"

namespace sapg {

enum class OutputFormat { Csv, Json };

// ---------------------------------------------------------------------------
// Phase diagram for three-edge graphs: p(m, n - m - l, l).

struct PhaseRow {
  int m = 0;
  int l = 0;
  double p = 0;
};

struct PhaseGrid {
  int n = 0;
  std::vector<PhaseRow> rows;  ///< m ascending, then l ascending
  ConfigValue max;             ///< lexicographically smallest maximizer
};

/// Throws InvalidArgument unless the graph has three edges.
PhaseGrid phase_diagram(const Graph& g, int n, const VertexWeights& w, const EngineOptions& options = {});
PhaseGrid phase_diagram(const ValueTable& table, int n);

// ---------------------------------------------------------------------------
// p(round(n x)) along a list of n.

struct ScanRow {
  int n = 0;
  Config config;
  double p = 0;
  double log_p = 0;  ///< -inf when p = 0
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
  int points = 0;
};

struct ScanResult {
  EdgeVector x;
  Region region = Region::InteriorReachable;
  std::vector<ScanRow> rows;
  std::optional<LineFit> fit;              ///< log p vs n, for inaccessible x
  std::vector<double> successive_diffs;    ///< |p(n_{i+1}) - p(n_i)|, for reachable x
};

ScanResult transition_scan(const Graph& g, std::span<const double> x, std::vector<int> n_list,
                           const VertexWeights& w, const EngineOptions& options = {});

/// Least squares over points with finite y.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------

/// a_*(j; k). Throws DomainError unless 0 <= j <= k-1 and k >= 3.
double a_star(int j, int k);

struct ConjectureRow {
  int n = 0;
  int j = 0;
  double partial_sum = 0;  ///< (1/n) sum_{l <= j} n^max_l
  double a_star = 0;
  double gap = 0;          ///< partial_sum - a_star
  double mirror_gap = 0;   ///< same with the reversed argmax (path symmetry)
};

std::vector<ConjectureRow> conjecture_scan(int k, const std::vector<int>& n_list, const EngineOptions& options = {});

// ---------------------------------------------------------------------------

struct WindowRow {
  int n = 0;
  double a = 0;
  SliceKind kind = SliceKind::I;
  bool empty = true;
  double max = 0;
  Config argmax;
  double reference = 0;  ///< exp(-A^2 / 8)
};

std::vector<WindowRow> window_collapse(const Graph& g, const std::vector<int>& n_list, const std::vector<double>& a_grid,
                                       const VertexWeights& w, const EngineOptions& options = {});

/// sup over shared non-empty A of |max_I(n_a) - max_I(n_b)|; nullopt if no
/// A is shared.
std::optional<double> collapse_gap(const std::vector<WindowRow>& rows, int n_a, int n_b,
                                   SliceKind kind = SliceKind::I);

// ---------------------------------------------------------------------------

struct SteeringReport {
  std::string strategy;
  Config start;
  SteerPlan plan;
  Estimate hits;  ///< exact-hit frequency
  TailResult tail;
  TraceSummary trace;  ///< of run 0
  int trace_steps = 0;
};

/// Runs the `steer:` or `steer-k:` strategy `spec` from `start`.
SteeringReport steering_report(std::shared_ptr<const Geometry> geo, const Config& start, const std::string& spec,
                               std::int64_t runs, std::uint64_t seed, const std::vector<double>& q_grid,
                               const PlanOptions& plan_options = {}, int threads = 0);

// ---------------------------------------------------------------------------
// Output. Column sets are fixed per subcommand:
//   phase:      m,l,p
//   scan:       n,config,p,log_p
//   conjecture: n,j,partial_sum,a_star,gap,mirror_gap
//   window:     n,A,slice,empty,max,argmax,reference
//   steer:      q,tail
// Configs in CSV are written as space-separated counts.

std::string format_double(double v);

void write_phase(std::ostream& out, const Graph& g, const PhaseGrid& grid, OutputFormat fmt);
void write_scan(std::ostream& out, const Graph& g, const ScanResult& scan, OutputFormat fmt);
void write_conjecture(std::ostream& out, int k, const std::vector<ConjectureRow>& rows, OutputFormat fmt);
void write_window(std::ostream& out, const Graph& g, const std::vector<WindowRow>& rows, OutputFormat fmt);
void write_steering(std::ostream& out, const Graph& g, const SteeringReport& report, OutputFormat fmt);

/// Re-reads every 100th row (at least one) from the table and compares
/// bit-exactly; returns the number of mismatches.
struct SpotCheck {
  std::int64_t checked = 0;
  std::int64_t mismatches = 0;
};
SpotCheck spot_verify(const PhaseGrid& grid, const ValueTable& table);
SpotCheck spot_verify(const ScanResult& scan, const ValueTable& table);

}  // namespace sapg
