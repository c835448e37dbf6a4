#include "sapg/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "sapg/error.hpp"

namespace sapg {

namespace {

EdgeVector unit(EdgeVector v) {
  const double len = norm2(v);
  if (len > 0)
    for (double& x : v) x /= len;
  return v;
}

EdgeVector minus(std::span<const double> a, std::span<const double> b) {
  EdgeVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// |N - r z| in counts.
double deviation(std::span<const int> state, std::span<const double> z, double r) {
  double s = 0;
  for (std::size_t e = 0; e < state.size(); ++e) {
    const double d = state[e] - r * z[e];
    s += d * d;
  }
  return std::sqrt(s);
}

int ceil_inverse_min(std::span<const double> z) {
  double lo = std::numeric_limits<double>::infinity();
  for (double v : z)
    if (v > 1e-12) lo = std::min(lo, v);
  return static_cast<int>(std::ceil(1.0 / lo - 1e-9));
}

double parse_number(const std::string& tok) {
  std::size_t used = 0;
  const auto slash = tok.find('/');
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw Error(Errc::ParseError, "bad number '" + tok + "'");
      return v;
    }
    const std::string num = tok.substr(0, slash), den = tok.substr(slash + 1);
    std::size_t u2 = 0;
    const double a = std::stod(num, &used);
    const double b = std::stod(den, &u2);
    if (used != num.size() || u2 != den.size() || b == 0) throw Error(Errc::ParseError, "bad fraction '" + tok + "'");
    return a / b;
  } catch (const std::logic_error&) {
    throw Error(Errc::ParseError, "bad number '" + tok + "'");
  }
}

}  // namespace

int draw_vertex(const VertexWeights& w, RandomStream& rng) {
  if (w.is_uniform()) return rng.below(w.size()) + 1;
  return rng.pick(w.values()) + 1;
}

std::optional<int> first_legal(const Graph& g, std::span<const int> state, int v) {
  for (int e : g.incident(v))
    if (state[static_cast<std::size_t>(e)] > 0) return e;
  return std::nullopt;
}

EdgeVector normalized(std::span<const int> state) {
  const int t = total(state);
  EdgeVector x(state.size(), 0.0);
  if (t == 0) return x;
  for (std::size_t e = 0; e < state.size(); ++e) x[e] = static_cast<double>(state[e]) / t;
  return x;
}

// ---------------------------------------------------------------------------

std::optional<int> OptimalStrategy::choose(std::span<const int> state, int v, RandomStream&) {
  return optimal_move(*table_, state, v);
}

std::optional<int> BaselineStrategy::choose(std::span<const int> state, int v, RandomStream& rng) {
  std::vector<int> legal;
  for (int e : g_.incident(v))
    if (state[static_cast<std::size_t>(e)] > 0) legal.push_back(e);
  if (legal.empty()) return std::nullopt;
  if (kind_ == BaselineKind::UniformIncident) return legal[static_cast<std::size_t>(rng.below(static_cast<int>(legal.size())))];
  int best = legal.front();
  for (int e : legal)
    if (state[static_cast<std::size_t>(e)] > state[static_cast<std::size_t>(best)]) best = e;
  return best;
}

std::unique_ptr<Strategy> optimal_strategy(std::shared_ptr<const ValueTable> table) {
  return std::make_unique<OptimalStrategy>(std::move(table));
}

std::unique_ptr<Strategy> baseline_strategy(const Graph& g, BaselineKind kind) {
  return std::make_unique<BaselineStrategy>(g, kind);
}

// ---------------------------------------------------------------------------

std::optional<int> sample_kernel_move(const Graph& g, const MoveKernel& kernel, std::span<const int> state, int v,
                                      RandomStream& rng, const std::vector<bool>* allowed) {
  const auto inc = g.incident(v);
  std::vector<int> legal;
  for (int e : inc)
    if (state[static_cast<std::size_t>(e)] > 0) legal.push_back(e);
  if (legal.empty()) return std::nullopt;
  if (allowed) {
    std::vector<int> narrowed;
    for (int e : legal)
      if ((*allowed)[static_cast<std::size_t>(e)]) narrowed.push_back(e);
    if (!narrowed.empty()) legal = std::move(narrowed);
  }
  std::vector<double> w(legal.size());
  double mass = 0;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    w[i] = std::max(0.0, kernel.prob(v, legal[i]));
    mass += w[i];
  }
  if (legal.size() == 1) return legal.front();
  if (mass <= 0) return legal[static_cast<std::size_t>(rng.below(static_cast<int>(legal.size())))];
  return legal[static_cast<std::size_t>(rng.pick(w))];
}

EdgeVector stage1_steering_point(const Geometry& geo, std::span<const double> x, std::span<const double> u) {
  if (auto y = geo.exit_along(x, u)) return *y;
  return geo.clip_to_region(x);
}

std::optional<EdgeVector> stage2_steering_point(const Geometry& geo, std::span<const double> z,
                                                std::span<const double> x) {
  const EdgeVector dir = minus(x, z);
  if (norm2(dir) < 1e-15) return std::nullopt;
  return geo.exit_along(z, dir);
}

// ---------------------------------------------------------------------------

SteerStage1::SteerStage1(std::shared_ptr<const Geometry> geo, EdgeVector z, std::optional<double> eps0)
    : geo_(std::move(geo)), z_(std::move(z)), eps0_override_(eps0) {
  if (static_cast<int>(z_.size()) != geo_->edge_count()) throw Error(Errc::InvalidArgument, "target length mismatch");
}

void SteerStage1::reset(std::span<const int> start) {
  const EdgeVector x0 = normalized(start);
  u_ = unit(minus(x0, z_));
  if (eps0_override_) {
    eps0_ = *eps0_override_;
  } else {
    const double delta = std::min(geo_->boundary_distance(x0), geo_->boundary_distance(z_));
    eps0_ = std::max(delta, 0.0) / 8;
  }
  done_ = false;
  kernel_.reset();
  check_done(start);
}

bool SteerStage1::check_done(std::span<const int> state) {
  if (done_) return true;
  const EdgeVector x = normalized(state);
  const EdgeVector d = minus(x, z_);
  if (norm2(d) <= eps0_ || dot(d, u_) <= 0) done_ = true;
  return done_;
}

EdgeVector SteerStage1::steering_point(std::span<const double> x) const { return stage1_steering_point(*geo_, x, u_); }

std::optional<int> SteerStage1::choose(std::span<const int> state, int v, RandomStream& rng) {
  if (u_.empty()) reset(state);
  check_done(state);
  const EdgeVector x = normalized(state);
  kernel_ = geo_->kernel_for(done_ ? geo_->clip_to_region(x) : steering_point(x));
  return sample_kernel_move(geo_->graph(), *kernel_, state, v, rng);
}

// ---------------------------------------------------------------------------

double default_d0(double delta) { return std::sqrt(2.0) + 4.0 / delta + 1.0; }

SteerStage2::SteerStage2(std::shared_ptr<const Geometry> geo, EdgeVector z, std::optional<double> d0)
    : geo_(std::move(geo)), z_(std::move(z)) {
  if (static_cast<int>(z_.size()) != geo_->edge_count()) throw Error(Errc::InvalidArgument, "target length mismatch");
  d0_ = d0 ? *d0 : default_d0(std::max(geo_->boundary_distance(z_), 1e-3));
  z_kernel_ = geo_->kernel_for(z_);
}

const MoveKernel& SteerStage2::kernel_at(std::span<const int> state) {
  const double r = total(state);
  if (deviation(state, z_, r) < d0_) return z_kernel_;
  const EdgeVector x = normalized(state);
  auto y = stage2_steering_point(*geo_, z_, x);
  if (!y) return z_kernel_;
  ray_kernel_ = geo_->kernel_for(*y);
  return ray_kernel_;
}

std::optional<int> SteerStage2::choose(std::span<const int> state, int v, RandomStream& rng) {
  last_ = &kernel_at(state);
  return sample_kernel_move(geo_->graph(), *last_, state, v, rng);
}

// ---------------------------------------------------------------------------

Config round_config(std::span<const double> x, int n) {
  if (n < 0) throw Error(Errc::InvalidArgument, "negative total");
  const std::size_t m = x.size();
  Config c(m, 0);
  std::vector<double> frac(m, 0.0);
  long assigned = 0;
  for (std::size_t e = 0; e < m; ++e) {
    if (x[e] < -kRegionTol) throw Error(Errc::OutsideSimplex, "negative entry");
    const double f = std::max(0.0, x[e]) * n;
    const double base = std::floor(f + 1e-9);
    c[e] = static_cast<int>(base);
    frac[e] = f - base;
    assigned += c[e];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  long rem = n - assigned;
  if (rem > 0) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b] + 1e-12; });
    for (std::size_t i = 0; rem > 0; i = (i + 1) % m, --rem) ++c[order[i]];
  } else if (rem < 0) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] + 1e-12 < frac[b]; });
    for (std::size_t i = 0; rem < 0; i = (i + 1) % m) {
      if (c[order[i]] > 0) {
        --c[order[i]];
        ++rem;
      }
    }
  }
  return c;
}

namespace {

// Plays stages 1 and 2 from `start` until `stop_total` remain; returns the
// final state, or nullopt on forfeit.
std::optional<Config> run_approach(const std::shared_ptr<const Geometry>& geo, std::span<const int> start,
                                   const EdgeVector& z, double d0, int stop_total, RandomStream& rng) {
  SteerStage1 s1(geo, z);
  SteerStage2 s2(geo, z, d0);
  Config state(start.begin(), start.end());
  s1.reset(state);
  while (total(state) > stop_total) {
    const int v = draw_vertex(geo->weights(), rng);
    std::optional<int> e;
    if (!s1.check_done(state))
      e = s1.choose(state, v, rng);
    else
      e = s2.choose(state, v, rng);
    if (!e) return std::nullopt;
    --state[static_cast<std::size_t>(*e)];
  }
  return state;
}

}  // namespace

SteerPlan make_steer_plan(std::shared_ptr<const Geometry> geo, std::span<const int> start, EdgeVector z, int n1,
                          const PlanOptions& options) {
  const int n = total(start);
  if (n1 < 0 || n1 > n) throw Error(Errc::InvalidArgument, "target total outside [0, n]");
  if (static_cast<int>(z.size()) != geo->edge_count()) throw Error(Errc::InvalidArgument, "target length mismatch");
  SteerPlan plan;
  plan.n1 = n1;
  plan.target = round_config(z, n1);
  plan.M = ceil_inverse_min(z);
  const double delta = geo->boundary_distance(z);
  plan.d0 = options.d0 ? *options.d0 : default_d0(std::max(delta, 1e-3));
  plan.z = std::move(z);

  // Largest q0 the horizon allows.
  const int q_cap = std::max(1, (n - 1 - n1) / plan.M);
  if (options.q0) {
    plan.q0 = std::clamp(*options.q0, 1, q_cap);
    return plan;
  }
  int q0 = std::min(2, q_cap);
  while (true) {
    const int handover = n1 + plan.M * q0;
    int bad = 0;
    for (int i = 0; i < options.calibration_runs; ++i) {
      RandomStream rng(child_seed(options.calibration_seed, static_cast<std::uint64_t>(i)));
      auto s = run_approach(geo, start, plan.z, plan.d0, handover, rng);
      if (!s || deviation(*s, plan.z, handover) > q0 / 4.0) ++bad;
    }
    if (2 * bad <= options.calibration_runs || q0 >= q_cap) break;
    q0 = std::min(2 * q0, q_cap);
  }
  plan.q0 = q0;
  return plan;
}

std::optional<int> finishing_move(const Graph& g, std::span<const int> state, std::span<const int> target, int v) {
  std::optional<int> best;
  int best_excess = 0;
  for (int e : g.incident(v)) {
    const auto i = static_cast<std::size_t>(e);
    const int excess = state[i] - target[i];
    if (state[i] > 0 && excess > best_excess) {
      best = e;
      best_excess = excess;
    }
  }
  return best;
}

namespace {

std::optional<int> greedy_largest(const Graph& g, std::span<const int> state, int v) {
  std::optional<int> best;
  for (int e : g.incident(v)) {
    const auto i = static_cast<std::size_t>(e);
    if (state[i] > 0 && (!best || state[i] > state[static_cast<std::size_t>(*best)])) best = e;
  }
  return best;
}

}  // namespace

SteerExact::SteerExact(std::shared_ptr<const Geometry> geo, SteerPlan plan)
    : geo_(geo), plan_(std::move(plan)), stage1_(geo, plan_.z), stage2_(geo, plan_.z, plan_.d0) {}

void SteerExact::reset(std::span<const int> start) {
  stage1_.reset(start);
  stage_ = 1;
  last_random_ = false;
}

const MoveKernel* SteerExact::last_kernel() const {
  if (!last_random_) return nullptr;
  return stage_ == 1 ? stage1_.last_kernel() : stage2_.last_kernel();
}

std::optional<int> SteerExact::choose(std::span<const int> state, int v, RandomStream& rng) {
  const int r = total(state);
  const Graph& g = geo_->graph();
  if (r <= plan_.n1) {
    stage_ = 0;
    last_random_ = false;
    return greedy_largest(g, state, v);
  }
  if (r <= plan_.finish_total()) {
    stage_ = 3;
    last_random_ = false;
    if (auto e = finishing_move(g, state, plan_.target, v)) return e;
    return greedy_largest(g, state, v);
  }
  if (stage_ == 1 && stage1_.check_done(state)) stage_ = 2;
  last_random_ = true;
  if (stage_ == 1) return stage1_.choose(state, v, rng);
  return stage2_.choose(state, v, rng);
}

// ---------------------------------------------------------------------------

SteerToK::SteerToK(std::shared_ptr<const Geometry> geo, SteerPlan plan) : geo_(std::move(geo)), plan_(std::move(plan)) {}

void SteerToK::reset(std::span<const int> start) {
  const EdgeVector x0 = normalized(start);
  midpoint_.assign(x0.size(), 0.0);
  for (std::size_t e = 0; e < x0.size(); ++e) midpoint_[e] = 0.5 * x0[e] + 0.5 * plan_.z[e];
  approach1_.emplace(geo_, midpoint_);
  approach1_->reset(start);
  approach2_.emplace(geo_, midpoint_);
  w_.clear();
  shifted_.reset();
  finish_shifted_ = 0;
  phase_ = 1;
  last_ = nullptr;
}

std::optional<int> SteerToK::choose(std::span<const int> state, int v, RandomStream& rng) {
  if (!approach1_) reset(state);
  const Graph& g = geo_->graph();
  const int r = total(state);
  const int shifted_total = r - plan_.n1;
  std::vector<bool> positive(state.size());
  for (std::size_t e = 0; e < state.size(); ++e) positive[e] = state[e] > plan_.target[e];

  if (shifted_total <= 0) {
    phase_ = 0;
    last_ = nullptr;
    return greedy_largest(g, state, v);
  }
  if (phase_ == 1 && r <= 2 * plan_.n1) {
    // Hand over: the shifted process N - T should sit near n1 x0.
    EdgeVector w(state.size());
    for (std::size_t e = 0; e < state.size(); ++e)
      w[e] = std::max(0.0, static_cast<double>(state[e] - plan_.target[e])) / shifted_total;
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (s > 0)
      for (double& x : w) x /= s;
    else
      w = geo_->x_star();
    w_ = geo_->clip_to_region(w);
    const int M = ceil_inverse_min(w_);
    finish_shifted_ = std::min(shifted_total, M * plan_.q0);
    shifted_.emplace(geo_, w_, default_d0(std::max(geo_->boundary_distance(w_), 0.01)));
    phase_ = 2;
  }
  if (phase_ == 2 && shifted_total <= finish_shifted_) phase_ = 3;

  switch (phase_) {
    case 1: {
      auto& s = approach1_->check_done(state) ? static_cast<Strategy&>(*approach2_) : *approach1_;
      auto e = s.choose(state, v, rng);
      last_ = s.last_kernel();
      return e;
    }
    case 2: {
      Config shifted(state.size());
      for (std::size_t e = 0; e < state.size(); ++e) shifted[e] = std::max(0, state[e] - plan_.target[e]);
      if (total(shifted) == 0) shifted.assign(state.begin(), state.end());
      last_ = &shifted_->kernel_at(shifted);
      // Edges whose target is already met are only played when nothing else is legal.
      return sample_kernel_move(g, *last_, state, v, rng, &positive);
    }
    default: {
      last_ = nullptr;
      if (auto e = finishing_move(g, state, plan_.target, v)) return e;
      return greedy_largest(g, state, v);
    }
  }
}

// ---------------------------------------------------------------------------

SteerOutward::SteerOutward(std::shared_ptr<const Geometry> geo, Options options)
    : geo_(std::move(geo)), options_(options) {
  c5_ = options_.c5 ? *options_.c5 : geo_->boundary_distance(geo_->x_star()) / 4;
}

void SteerOutward::reset(std::span<const int> start) {
  const EdgeVector x0 = normalized(start);
  const EdgeVector center = geo_->x_star();
  targets_.clear();
  stopped_ = false;
  steps_ = 0;
  stop_step_ = -1;
  leg_ = 0;
  kernel_.reset();
  if (geo_->boundary_distance(x0) >= c5_) {
    stopped_ = true;
    stop_step_ = 0;
    targets_.push_back(x0);
    return;
  }
  EdgeVector y = x0;
  if (distance(x0, center) > 1e-12) {
    if (auto exit = geo_->exit_along(center, minus(x0, center))) y = *exit;
  }
  d_ = distance(x0, y);
  const double half = 0.5 * distance(center, y);
  int r = 0;
  while (d_ > 0 && std::pow(1.5, r) * d_ < half) ++r;
  for (int i = 0; i <= r; ++i) {
    EdgeVector p(x0.size());
    const double f = std::pow(1.5, i);
    for (std::size_t e = 0; e < p.size(); ++e) p[e] = y[e] + f * (x0[e] - y[e]);
    targets_.push_back(std::move(p));
  }
  begin_leg(x0);
}

void SteerOutward::begin_leg(std::span<const double> x) {
  // Leg i heads for targets_[i + 1]; past the cascade it heads for x*.
  const EdgeVector goal = leg_ + 1 < targets_.size() ? targets_[leg_ + 1] : geo_->x_star();
  u_ = unit(minus(x, goal));
}

std::optional<int> SteerOutward::choose(std::span<const int> state, int v, RandomStream& rng) {
  if (targets_.empty()) reset(state);
  const EdgeVector x = normalized(state);
  if (!stopped_ && geo_->boundary_distance(x) >= c5_) {
    stopped_ = true;
    stop_step_ = steps_;
  }
  ++steps_;
  if (stopped_) {
    kernel_ = geo_->kernel_for(x);
    return sample_kernel_move(geo_->graph(), *kernel_, state, v, rng);
  }
  // Advance legs whose neighborhood has been reached.
  while (leg_ + 1 < targets_.size() &&
         distance(x, targets_[leg_ + 1]) < options_.eps * std::pow(1.5, static_cast<double>(leg_ + 1)) * d_) {
    ++leg_;
    begin_leg(x);
  }
  const EdgeVector goal = leg_ + 1 < targets_.size() ? targets_[leg_ + 1] : geo_->x_star();
  if (dot(minus(x, goal), u_) <= 0) begin_leg(x);
  kernel_ = geo_->kernel_for(stage1_steering_point(*geo_, x, u_));
  return sample_kernel_move(geo_->graph(), *kernel_, state, v, rng);
}

// ---------------------------------------------------------------------------

EdgeVector parse_z_spec(const std::string& spec, const Geometry& geo) {
  if (spec == "xstar" || spec == "x*") return geo.x_star();
  EdgeVector z;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) z.push_back(parse_number(tok));
  if (static_cast<int>(z.size()) != geo.edge_count())
    throw Error(Errc::InvalidArgument, "z-spec has " + std::to_string(z.size()) + " entries, graph has " +
                                           std::to_string(geo.edge_count()) + " edges");
  double s = 0;
  for (double v : z) {
    if (v < 0) throw Error(Errc::OutsideSimplex, "negative entry in z-spec");
    s += v;
  }
  if (std::abs(s - 1) > 1e-6) throw Error(Errc::OutsideSimplex, "z-spec entries do not sum to 1");
  for (double& v : z) v /= s;
  return z;
}

EdgeVector outward_start(const Geometry& geo, double a, int n) {
  if (n <= 0 || a < 0) throw Error(Errc::InvalidArgument, "outward start needs n > 0 and A >= 0");
  const EdgeVector center = geo.x_star();
  EdgeVector corner(center.size(), 0.0);
  corner[0] = 1.0;
  const double want = a / std::sqrt(static_cast<double>(n));
  if (geo.min_slack(center) <= want) return center;
  auto at = [&](double lam) {
    EdgeVector p(center.size());
    for (std::size_t e = 0; e < p.size(); ++e) p[e] = center[e] + lam * (corner[e] - center[e]);
    return p;
  };
  double lo = 0, hi = 1;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (geo.min_slack(at(mid)) > want ? lo : hi) = mid;
  }
  return at(lo);
}

StrategyFactory make_strategy_factory(const std::string& spec, const StrategyContext& ctx) {
  if (!ctx.geo) throw Error(Errc::InvalidArgument, "strategy needs a geometry");
  auto geo = ctx.geo;
  if (spec == "optimal") {
    if (!ctx.table) throw Error(Errc::InvalidArgument, "strategy 'optimal' needs a value table");
    auto table = ctx.table;
    return [table] { return optimal_strategy(table); };
  }
  if (spec == "uniform") return [geo] { return baseline_strategy(geo->graph(), BaselineKind::UniformIncident); };
  if (spec == "greedy") return [geo] { return baseline_strategy(geo->graph(), BaselineKind::GreedyLargest); };

  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  if (colon != std::string::npos && head == "outward") {
    (void)parse_number(spec.substr(colon + 1));
    return [geo] { return std::make_unique<SteerOutward>(geo, SteerOutward::Options{}); };
  }
  if (colon != std::string::npos && (head == "steer" || head == "steer-k")) {
    const auto last = spec.rfind(':');
    if (last == colon) throw Error(Errc::ParseError, "expected " + head + ":<z-spec>:<n1>");
    const EdgeVector z = parse_z_spec(spec.substr(colon + 1, last - colon - 1), *geo);
    int n1 = 0;
    try {
      std::size_t used = 0;
      const std::string tok = spec.substr(last + 1);
      n1 = std::stoi(tok, &used);
      if (used != tok.size()) throw Error(Errc::ParseError, "bad n1 '" + tok + "'");
    } catch (const std::logic_error&) {
      throw Error(Errc::ParseError, "bad n1 in '" + spec + "'");
    }
    if (ctx.start.empty()) throw Error(Errc::InvalidArgument, "steering needs a start config");
    if (n1 < 1 || n1 >= total(ctx.start))
      throw Error(Errc::InvalidArgument, "n1 must be in [1, n) for the start config");
    const RegionClass rc = geo->classify(z);
    if (head == "steer" && rc.region != Region::InteriorReachable)
      throw Error(Errc::InvalidArgument, "steer target must lie in the open region; use steer-k");
    if (rc.region == Region::Inaccessible) throw Error(Errc::InvalidArgument, "target lies outside K_G");
    auto plan = std::make_shared<const SteerPlan>(make_steer_plan(geo, ctx.start, z, n1, ctx.plan));
    if (head == "steer") return [geo, plan]() -> std::unique_ptr<Strategy> { return std::make_unique<SteerExact>(geo, *plan); };
    return [geo, plan]() -> std::unique_ptr<Strategy> { return std::make_unique<SteerToK>(geo, *plan); };
  }
  throw Error(Errc::ParseError, "unknown strategy '" + spec + "'");
}

// ---------------------------------------------------------------------------

namespace {

void record(OdePath& path, const Geometry& geo, double t, const EdgeVector& x) {
  path.times.push_back(t);
  path.points.push_back(x);
  auto s = geo.slacks(x);
  path.min_slack.push_back(s.empty() ? 0.0 : *std::min_element(s.begin(), s.end()));
  path.slacks.push_back(std::move(s));
}

template <class Control>
OdePath integrate(const Geometry& geo, std::span<const double> x0, Control&& control, double dt, double horizon) {
  if (!(dt > 0) || !(horizon > 0)) throw Error(Errc::InvalidArgument, "dt and T must be positive");
  const double limit = 0.5 * geo.boundary_distance(geo.x_star());
  OdePath path;
  EdgeVector x(x0.begin(), x0.end());
  record(path, geo, 0.0, x);
  const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  for (long i = 1; i <= steps; ++i) {
    const double t = (i - 1) * dt;
    const EdgeVector u = control(t, x);
    EdgeVector dx(x.size());
    for (std::size_t e = 0; e < x.size(); ++e) dx[e] = dt * (x[e] - u[e]);
    if (norm2(dx) > limit) throw Error(Errc::StepTooLarge, "Euler step exceeds half the boundary scale");
    for (std::size_t e = 0; e < x.size(); ++e) x[e] += dx[e];
    record(path, geo, i * dt, x);
  }
  return path;
}

}  // namespace

OdePath ode_trajectory(const Geometry& geo, std::span<const double> x0, const OdeControl& control, double dt,
                       double horizon) {
  return integrate(
      geo, x0, [&](double t, const EdgeVector& x) { return geo.clip_to_region(control(t, x)); }, dt, horizon);
}

OdePath ode_trajectory(const Geometry& geo, std::span<const double> x0, std::span<const double> target, double dt,
                       double horizon) {
  const EdgeVector goal(target.begin(), target.end());
  return integrate(
      geo, x0,
      [&](double, const EdgeVector& x) -> EdgeVector {
        if (!geo.in_region(x)) return geo.clip_to_region(x);
        const double gap = distance(x, goal);
        if (gap < 1e-15) return x;
        auto y = geo.exit_along(goal, minus(x, goal));
        if (!y) return x;
        // y = goal + s (x - goal) with s >= 1; drift (s - 1)(goal - x).
        const double s = distance(*y, goal) / gap;
        if (s <= 1) return x;
        const double alpha = std::min(1.0, 1.0 / (dt * (s - 1)));
        EdgeVector u(x.size());
        for (std::size_t e = 0; e < x.size(); ++e) u[e] = x[e] + alpha * ((*y)[e] - x[e]);
        return u;
      },
      dt, horizon);
}

}  // namespace sapg
