#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sapg/random.hpp"
#include "sapg/region.hpp"
#include "sapg/value_engine.hpp"

namespace sapg {

/// Decision procedure for one game. Instances carry stage state and are not
/// shared between concurrently running games.
class Strategy {
 public:
  virtual ~Strategy() = default;

  /// Called once before the first move with the starting config.
  virtual void reset(std::span<const int> start) { (void)start; }

  /// Edge for drawn vertex v at `state`, or nullopt (forfeit) when v has no
  /// incident edge with positive capacity.
  virtual std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) = 0;

  virtual std::string name() const = 0;

  /// Kernel used for the most recent choice, if the strategy randomizes.
  virtual const MoveKernel* last_kernel() const { return nullptr; }

  /// Stage of the most recent choice for composite strategies (1 = fixed
  /// direction drift); 0 otherwise.
  virtual int stage() const { return 0; }
};

using StrategyFactory = std::function<std::unique_ptr<Strategy>()>;

/// Vertex label drawn from the weights (uniform draws use below(k)).
int draw_vertex(const VertexWeights& w, RandomStream& rng);

/// Lowest-index incident edge of v with positive capacity.
std::optional<int> first_legal(const Graph& g, std::span<const int> state, int v);

// ---------------------------------------------------------------------------
// Table-driven and baseline strategies

class OptimalStrategy final : public Strategy {
 public:
  explicit OptimalStrategy(std::shared_ptr<const ValueTable> table) : table_(std::move(table)) {}
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return "optimal"; }

 private:
  std::shared_ptr<const ValueTable> table_;
};

enum class BaselineKind { UniformIncident, GreedyLargest };

class BaselineStrategy final : public Strategy {
 public:
  BaselineStrategy(Graph g, BaselineKind kind) : g_(std::move(g)), kind_(kind) {}
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return kind_ == BaselineKind::UniformIncident ? "uniform" : "greedy"; }

 private:
  Graph g_;
  BaselineKind kind_;
};

std::unique_ptr<Strategy> optimal_strategy(std::shared_ptr<const ValueTable> table);
std::unique_ptr<Strategy> baseline_strategy(const Graph& g, BaselineKind kind);

// ---------------------------------------------------------------------------
// Steering

/// Samples an edge for vertex v from the kernel restricted to incident edges
/// with positive capacity (and, when `allowed` is given, to edges it marks
/// whenever any such edge is available). Falls back to uniform over legal
/// edges when the kernel puts no mass on them.
std::optional<int> sample_kernel_move(const Graph& g, const MoveKernel& kernel, std::span<const int> state, int v,
                                      RandomStream& rng, const std::vector<bool>* allowed = nullptr);

/// Boundary point reached from x along +u (K_G exit), or the clipped point
/// when that half-line misses K_G.
EdgeVector stage1_steering_point(const Geometry& geo, std::span<const double> x, std::span<const double> u);

/// Steering point of the confinement rule: the exit of the ray from z
/// through x, or nullopt when x coincides with z.
std::optional<EdgeVector> stage2_steering_point(const Geometry& geo, std::span<const double> z,
                                                std::span<const double> x);

/// Normalized state N / total(N).
EdgeVector normalized(std::span<const int> state);

/// Fixed-direction drift toward z: plays the kernel of the K_G boundary
/// point Y with Y - X a positive multiple of u = unit(x0 - z). Reports
/// `done()` once |X - z| <= eps0 or X has passed z along u.
class SteerStage1 final : public Strategy {
 public:
  SteerStage1(std::shared_ptr<const Geometry> geo, EdgeVector z, std::optional<double> eps0 = std::nullopt);
  void reset(std::span<const int> start) override;
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return "steer-stage1"; }
  const MoveKernel* last_kernel() const override { return kernel_ ? &*kernel_ : nullptr; }
  int stage() const override { return done_ ? 0 : 1; }

  bool done() const noexcept { return done_; }
  const EdgeVector& direction() const noexcept { return u_; }
  const EdgeVector& target() const noexcept { return z_; }
  double eps0() const noexcept { return eps0_; }
  /// Updates done() for `state` without moving.
  bool check_done(std::span<const int> state);
  /// The steering point Y for the current normalized state.
  EdgeVector steering_point(std::span<const double> x) const;

 private:
  std::shared_ptr<const Geometry> geo_;
  EdgeVector z_;
  std::optional<double> eps0_override_;
  double eps0_ = 0;
  EdgeVector u_;
  bool done_ = false;
  std::optional<MoveKernel> kernel_;
};

/// Confinement around z: outside radius d0 (in counts) plays the kernel of
/// the exit of the ray from z through X; inside it plays z's own kernel.
class SteerStage2 final : public Strategy {
 public:
  SteerStage2(std::shared_ptr<const Geometry> geo, EdgeVector z, std::optional<double> d0 = std::nullopt);
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return "steer-stage2"; }
  const MoveKernel* last_kernel() const override { return last_; }

  double d0() const noexcept { return d0_; }
  const MoveKernel& target_kernel() const noexcept { return z_kernel_; }
  /// Kernel chosen at `state` (deterministic; no draw).
  const MoveKernel& kernel_at(std::span<const int> state);

 private:
  std::shared_ptr<const Geometry> geo_;
  EdgeVector z_;
  double d0_;
  MoveKernel z_kernel_;
  MoveKernel ray_kernel_;
  const MoveKernel* last_ = nullptr;
};

/// Default confinement radius sqrt(2) + 4/delta + 1.
double default_d0(double delta);

/// Largest-remainder rounding of n x to an integer config of total n, ties
/// to the lowest index.
Config round_config(std::span<const double> x, int n);

struct SteerPlan {
  EdgeVector z;
  int n1 = 0;
  Config target;      ///< round_config(z, n1)
  double d0 = 0;
  int M = 1;          ///< ceil(1 / min_e z_e)
  int q0 = 2;
  int finish_total() const { return n1 + M * q0; }
};

struct PlanOptions {
  std::optional<double> d0;
  std::optional<int> q0;       ///< skip calibration when set
  int calibration_runs = 200;
  std::uint64_t calibration_seed = 0x5eed;
};

/// Builds a plan for steering from `start` to n1 z, calibrating q0 by doubling
/// until the measured confinement deviation tail at q0/4 is at most 1/2.
SteerPlan make_steer_plan(std::shared_ptr<const Geometry> geo, std::span<const int> start, EdgeVector z, int n1,
                          const PlanOptions& options = {});

/// Three-stage exact-hit steering: stage 1, confinement until the remaining
/// total reaches n1 + M q0, then largest-excess-first greedy toward the
/// target config. After reaching n1 it plays greedy-largest.
class SteerExact final : public Strategy {
 public:
  SteerExact(std::shared_ptr<const Geometry> geo, SteerPlan plan);
  void reset(std::span<const int> start) override;
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return "steer"; }
  const MoveKernel* last_kernel() const override;

  const SteerPlan& plan() const noexcept { return plan_; }
  /// 1, 2, or 3 (finishing); 0 after the target total.
  int stage() const override { return stage_; }

 private:
  std::shared_ptr<const Geometry> geo_;
  SteerPlan plan_;
  SteerStage1 stage1_;
  SteerStage2 stage2_;
  int stage_ = 1;
  bool last_random_ = false;
};

/// Largest-excess-first finishing move toward `target`; nullopt when no
/// incident edge has positive excess.
std::optional<int> finishing_move(const Graph& g, std::span<const int> state, std::span<const int> target, int v);

/// Target anywhere in K_G: steer to x'' = (x0 + z)/2 until 2 n1 remain, then
/// confine the shifted process N - T (T the rounded target) around its own
/// normalized position w and finish greedily on the excess over T.
/// Phases: 1 approach, 2 shifted confinement, 3 finishing, 0 after n1.
class SteerToK final : public Strategy {
 public:
  SteerToK(std::shared_ptr<const Geometry> geo, SteerPlan plan);
  void reset(std::span<const int> start) override;
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return "steer-k"; }
  const MoveKernel* last_kernel() const override { return last_; }

  const EdgeVector& midpoint() const noexcept { return midpoint_; }
  /// Direction of the shifted process fixed at the hand-over (empty before).
  const EdgeVector& shifted_target() const noexcept { return w_; }
  int phase() const noexcept { return phase_; }

 private:
  std::shared_ptr<const Geometry> geo_;
  SteerPlan plan_;
  EdgeVector midpoint_;
  std::optional<SteerStage1> approach1_;
  std::optional<SteerStage2> approach2_;
  EdgeVector w_;
  int finish_shifted_ = 0;  // shifted total at which finishing starts
  std::optional<SteerStage2> shifted_;
  int phase_ = 1;
  const MoveKernel* last_ = nullptr;
};

/// Outward cascade: from a start near the boundary, steers through
/// y(i) = y + (3/2)^i (x0 - y), where y is the boundary point on the ray
/// from x* through x0, until the boundary distance reaches c5. After that it
/// plays drift-neutral moves.
class SteerOutward final : public Strategy {
 public:
  struct Options {
    std::optional<double> c5;  ///< default boundary_distance(x*) / 4
    double eps = 0.25;
  };
  SteerOutward(std::shared_ptr<const Geometry> geo, Options options);
  void reset(std::span<const int> start) override;
  std::optional<int> choose(std::span<const int> state, int v, RandomStream& rng) override;
  std::string name() const override { return "outward"; }
  const MoveKernel* last_kernel() const override { return kernel_ ? &*kernel_ : nullptr; }

  bool stopped() const noexcept { return stopped_; }
  /// Moves played before the clearance was reached (-1 while running).
  int stop_step() const noexcept { return stop_step_; }
  double c5() const noexcept { return c5_; }
  const std::vector<EdgeVector>& cascade() const noexcept { return targets_; }

 private:
  void begin_leg(std::span<const double> x);

  std::shared_ptr<const Geometry> geo_;
  Options options_;
  double c5_ = 0;
  std::vector<EdgeVector> targets_;  // y(0) = x0, y(1), ..., y(r)
  double d_ = 0;
  std::size_t leg_ = 0;
  EdgeVector u_;
  bool stopped_ = false;
  int steps_ = 0;
  int stop_step_ = -1;
  std::optional<MoveKernel> kernel_;
};

/// Parses a CLI strategy name: optimal, uniform, greedy,
/// steer:<z-spec>:<n1>, steer-k:<z-spec>:<n1>, outward:<A>. A z-spec is
/// `xstar` or comma-separated edge proportions. The factory builds a fresh
/// instance per game; steering plans are calibrated once, up front.
struct StrategyContext {
  std::shared_ptr<const Geometry> geo;
  std::shared_ptr<const ValueTable> table;  ///< required by `optimal`
  Config start;                             ///< required by steering plans
  PlanOptions plan;
};
StrategyFactory make_strategy_factory(const std::string& spec, const StrategyContext& ctx);
/// `xstar` or comma-separated entries (decimals or p/q fractions) summing
/// to 1.
EdgeVector parse_z_spec(const std::string& spec, const Geometry& geo);

/// Point on the segment from x* toward the first simplex corner whose
/// minimum face slack is a / sqrt(n); the default start for `outward:<A>`.
EdgeVector outward_start(const Geometry& geo, double a, int n);

// ---------------------------------------------------------------------------
// Deterministic controlled ODE dx/dt = x - u(t), u(t) in K_G.

struct OdePath {
  std::vector<double> times;
  std::vector<EdgeVector> points;
  std::vector<std::vector<double>> slacks;  ///< all face slacks per sample
  std::vector<double> min_slack;
};

using OdeControl = std::function<EdgeVector(double t, std::span<const double> x)>;

/// Explicit Euler with a caller-supplied control (clipped into K_G). Throws
/// StepTooLarge if a step moves farther than half of boundary_distance(x*).
OdePath ode_trajectory(const Geometry& geo, std::span<const double> x0, const OdeControl& control, double dt,
                       double horizon);

/// Exit-point control toward `target`: u is taken on the segment from x to
/// the exit of the ray from target through x, scaled so a step never
/// overshoots the target. Outside K_G, u is the clipped point.
OdePath ode_trajectory(const Geometry& geo, std::span<const double> x0, std::span<const double> target, double dt,
                       double horizon);

}  // namespace sapg
