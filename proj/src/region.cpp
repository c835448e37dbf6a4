#include "sapg/region.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sapg/error.hpp"
#include "sapg/maxflow.hpp"

namespace sapg {

namespace {

// Above this edge count Geometry keeps no face table (2^20 faces ~ 40 MB).
constexpr int kFaceTableCap = 20;

std::vector<std::uint64_t> incidence_masks(const Graph& g) {
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(g.vertex_count()), 0);
  for (int v = 1; v <= g.vertex_count(); ++v)
    for (int e : g.incident(v)) masks[static_cast<std::size_t>(v - 1)] |= std::uint64_t{1} << e;
  return masks;
}

double face_scale(int size, int m) {
  return std::sqrt(static_cast<double>(m) / (static_cast<double>(size) * static_cast<double>(m - size)));
}

}  // namespace

VertexWeights VertexWeights::uniform(int k) {
  VertexWeights w;
  w.p_.assign(static_cast<std::size_t>(k), 1.0 / k);
  w.uniform_ = true;
  return w;
}

VertexWeights VertexWeights::from(std::vector<double> p) {
  if (p.empty()) throw Error(Errc::InvalidArgument, "empty vertex weights");
  double sum = 0;
  for (double x : p) {
    if (!(x > 0)) throw Error(Errc::InvalidArgument, "vertex weights must be positive");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kRegionTol) throw Error(Errc::InvalidArgument, "vertex weights must sum to 1");
  VertexWeights w;
  w.uniform_ = std::all_of(p.begin(), p.end(), [&](double x) { return x == p.front(); });
  w.p_ = std::move(p);
  return w;
}

std::string_view region_name(Region r) noexcept {
  switch (r) {
    case Region::InteriorReachable: return "InteriorReachable";
    case Region::BoundaryK: return "BoundaryK";
    case Region::Inaccessible: return "Inaccessible";
    case Region::OutsideSimplex: return "OutsideSimplex";
  }
  return "?";
}

EdgeVector MoveKernel::mean(const VertexWeights& w) const {
  EdgeVector y(static_cast<std::size_t>(m), 0.0);
  for (int v = 1; v <= k; ++v)
    for (int e = 0; e < m; ++e) y[static_cast<std::size_t>(e)] += w(v) * prob(v, e);
  return y;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Geometry::Geometry(Graph g) : Geometry(g, VertexWeights::uniform(g.vertex_count())) {}

Geometry::Geometry(Graph g, VertexWeights w) : g_(std::move(g)), w_(std::move(w)) {
  if (w_.size() != g_.vertex_count())
    throw Error(Errc::InvalidArgument, "vertex weight count does not match graph");
  const int m = g_.edge_count();
  if (m > kFaceTableCap) return;
  const auto inc = incidence_masks(g_);
  const std::uint64_t full = (std::uint64_t{1} << m) - 1;
  faces_.reserve(static_cast<std::size_t>(full - 1));
  for (std::uint64_t bits = 1; bits < full; ++bits) {
    Face f;
    f.set = EdgeSubset(bits);
    f.size = std::popcount(bits);
    for (int v = 1; v <= g_.vertex_count(); ++v) {
      if ((inc[static_cast<std::size_t>(v - 1)] & ~bits) == 0) {
        ++f.full_degree;
        f.demand += w_(v);
      }
    }
    f.scale = face_scale(f.size, m);
    faces_.push_back(f);
    if (f.full_degree > 0 && f.full_degree < g_.vertex_count()) critical_.push_back(f);
  }
  enumerated_ = true;
}

std::span<const Face> Geometry::faces() const {
  if (!enumerated_)
    throw Error(Errc::SubsetCapExceeded, std::to_string(g_.edge_count()) + " edges exceed the face table cap");
  return faces_;
}

std::span<const Face> Geometry::critical_faces() const {
  faces();
  return critical_;
}

std::vector<double> Geometry::slacks(std::span<const double> x) const {
  const auto fs = faces();
  std::vector<double> out;
  out.reserve(fs.size());
  for (const Face& f : fs) {
    double s = 0;
    for (std::uint64_t b = f.set.bits(); b != 0; b &= b - 1) s += x[static_cast<std::size_t>(std::countr_zero(b))];
    out.push_back(s - f.demand);
  }
  return out;
}

double Geometry::min_slack(std::span<const double> x) const {
  const auto s = slacks(x);
  return *std::min_element(s.begin(), s.end());
}

void Geometry::check_simplex(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != g_.edge_count())
    throw Error(Errc::InvalidArgument, "edge vector length does not match graph");
  double sum = 0;
  for (double v : x) {
    if (v < -kRegionTol) throw Error(Errc::OutsideSimplex, "negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRegionTol) throw Error(Errc::OutsideSimplex, "entries do not sum to 1");
}

RegionClass Geometry::classify(std::span<const double> x) const {
  check_simplex(x);
  const auto fs = faces();
  const auto s = slacks(x);
  const auto it = std::min_element(s.begin(), s.end());
  RegionClass rc;
  rc.face = fs[static_cast<std::size_t>(it - s.begin())].set;
  rc.slack = *it;
  if (rc.slack > kRegionTol)
    rc.region = Region::InteriorReachable;
  else if (rc.slack >= -kRegionTol)
    rc.region = Region::BoundaryK;
  else
    rc.region = Region::Inaccessible;
  return rc;
}

FlowMembership Geometry::membership_flow(std::span<const double> x) const {
  check_simplex(x);
  const int k = g_.vertex_count();
  const int m = g_.edge_count();
  // nodes: 0 = source, 1..k = vertices, k+1..k+m = edge nodes, k+m+1 = sink
  FlowNetwork net(k + m + 2);
  const int source = 0, sink = k + m + 1;
  for (int v = 1; v <= k; ++v) net.add_arc(source, v, w_(v));
  std::vector<int> mid(static_cast<std::size_t>(k * m), -1);
  for (int v = 1; v <= k; ++v)
    for (int e : g_.incident(v)) mid[static_cast<std::size_t>((v - 1) * m + e)] = net.add_arc(v, k + 1 + e, 2.0);
  for (int e = 0; e < m; ++e) net.add_arc(k + 1 + e, sink, std::max(0.0, x[static_cast<std::size_t>(e)]));

  FlowMembership result;
  result.value = net.max_flow(source, sink);
  if (std::abs(result.value - 1.0) > kRegionTol) return result;

  MoveKernel kernel;
  kernel.k = k;
  kernel.m = m;
  kernel.q.assign(static_cast<std::size_t>(k * m), 0.0);
  kernel.target.assign(x.begin(), x.end());
  for (int v = 1; v <= k; ++v) {
    double row = 0;
    for (int e : g_.incident(v)) {
      const double f = std::max(0.0, net.flow_on(mid[static_cast<std::size_t>((v - 1) * m + e)]));
      kernel.prob(v, e) = f / w_(v);
      row += kernel.prob(v, e);
    }
    if (row > 0)
      for (int e : g_.incident(v)) kernel.prob(v, e) /= row;
  }
  result.kernel = std::move(kernel);
  return result;
}

EdgeVector Geometry::x_star() const {
  EdgeVector x(static_cast<std::size_t>(g_.edge_count()), 0.0);
  for (int e = 0; e < g_.edge_count(); ++e) {
    const Edge& ed = g_.edge(e);
    x[static_cast<std::size_t>(e)] = w_(ed.u) / g_.degree(ed.u) + w_(ed.v) / g_.degree(ed.v);
  }
  return x;
}

double Geometry::boundary_distance(std::span<const double> x) const {
  check_simplex(x);
  const auto fs = faces();
  const auto s = slacks(x);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fs.size(); ++i) best = std::min(best, fs[i].scale * s[i]);
  return best;
}

std::optional<EdgeVector> Geometry::exit_along(std::span<const double> origin,
                                               std::span<const double> dir) const {
  const auto fs = faces();
  const auto s = slacks(origin);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double rate = 0;
    for (std::uint64_t b = fs[i].set.bits(); b != 0; b &= b - 1) rate += dir[static_cast<std::size_t>(std::countr_zero(b))];
    if (rate < -1e-15) {
      hi = std::min(hi, s[i] / -rate);
    } else if (rate > 1e-15) {
      lo = std::max(lo, -s[i] / rate);
    } else if (s[i] < -kRegionTol) {
      return std::nullopt;
    }
  }
  if (!std::isfinite(hi) || hi < lo - kRegionTol) return std::nullopt;
  hi = std::max(hi, lo);
  EdgeVector y(origin.begin(), origin.end());
  for (std::size_t e = 0; e < y.size(); ++e) y[e] += hi * dir[e];
  return y;
}

EdgeVector Geometry::ray_exit_point(std::span<const double> z, std::span<const double> x) const {
  EdgeVector dir(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) dir[e] = x[e] - z[e];
  if (norm2(dir) < 1e-15) throw Error(Errc::DegenerateRay, "x equals z");
  auto y = exit_along(z, dir);
  if (!y) throw Error(Errc::NoExit, "ray does not meet the region boundary");
  return *y;
}

EdgeVector Geometry::clip_to_region(std::span<const double> x) const {
  if (min_slack(x) >= -kRegionTol) return EdgeVector(x.begin(), x.end());
  const EdgeVector center = x_star();
  EdgeVector dir(x.size());
  for (std::size_t e = 0; e < x.size(); ++e) dir[e] = x[e] - center[e];
  auto y = exit_along(center, dir);
  if (!y) return center;
  return *y;
}

MoveKernel Geometry::kernel_for(std::span<const double> y) const {
  EdgeVector target = clip_to_region(y);
  // Renormalize so tiny drift off the sum-one plane does not fail the simplex check.
  const double sum = std::accumulate(target.begin(), target.end(), 0.0);
  for (double& v : target) v = std::max(0.0, v) / sum;
  auto flow = membership_flow(target);
  if (flow.kernel) return std::move(*flow.kernel);
  // Numerically just outside: pull slightly toward x_star and retry.
  const EdgeVector center = x_star();
  for (double lambda = 1e-9; lambda < 1.0; lambda *= 10) {
    EdgeVector t2(target.size());
    for (std::size_t e = 0; e < t2.size(); ++e) t2[e] = (1 - lambda) * target[e] + lambda * center[e];
    flow = membership_flow(t2);
    if (flow.kernel) return std::move(*flow.kernel);
  }
  return std::move(*membership_flow(center).kernel);
}

double Geometry::min_critical_l(std::span<const double> counts, double n) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Face& f : critical_faces()) {
    double s = 0;
    for (std::uint64_t b = f.set.bits(); b != 0; b &= b - 1) s += counts[static_cast<std::size_t>(std::countr_zero(b))];
    best = std::min(best, f.scale * (s - n * f.demand));
  }
  return best;
}

// ---------------------------------------------------------------------------

RegionClass classify_point(const Graph& g, std::span<const double> x, const VertexWeights& w) {
  const int m = g.edge_count();
  if (m > kSubsetEnumerationCap) throw Error(Errc::SubsetCapExceeded, std::to_string(m) + " edges > 24");
  if (m <= kFaceTableCap) return Geometry(g, w).classify(x);

  // Streaming enumeration for 20 < |E| <= 24.
  if (static_cast<int>(x.size()) != m) throw Error(Errc::InvalidArgument, "edge vector length does not match graph");
  double sum = 0;
  for (double v : x) {
    if (v < -kRegionTol) throw Error(Errc::OutsideSimplex, "negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kRegionTol) throw Error(Errc::OutsideSimplex, "entries do not sum to 1");
  const auto inc = incidence_masks(g);
  RegionClass rc;
  rc.slack = std::numeric_limits<double>::infinity();
  for (EdgeSubset F : proper_subsets(g)) {
    double s = 0;
    for (std::uint64_t b = F.bits(); b != 0; b &= b - 1) s += x[static_cast<std::size_t>(std::countr_zero(b))];
    for (int v = 1; v <= g.vertex_count(); ++v)
      if ((inc[static_cast<std::size_t>(v - 1)] & ~F.bits()) == 0) s -= w(v);
    if (s < rc.slack) {
      rc.slack = s;
      rc.face = F;
    }
  }
  rc.region = rc.slack > kRegionTol ? Region::InteriorReachable
              : rc.slack >= -kRegionTol ? Region::BoundaryK
                                        : Region::Inaccessible;
  return rc;
}

FlowMembership membership_flow(const Graph& g, std::span<const double> x, const VertexWeights& w) {
  return Geometry(g, w).membership_flow(x);
}

EdgeVector x_star(const Graph& g) {
  EdgeVector x(static_cast<std::size_t>(g.edge_count()), 0.0);
  const double k = g.vertex_count();
  for (int e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    x[static_cast<std::size_t>(e)] = (1.0 / g.degree(ed.u) + 1.0 / g.degree(ed.v)) / k;
  }
  return x;
}

FaceFunctional face_functional(const Graph& g, EdgeSubset F) {
  const int m = g.edge_count();
  const int f = F.size();
  if (f == 0 || f >= m || !F.is_subset_of(EdgeSubset::full(m)))
    throw Error(Errc::EmptyOrFullSubset, "face must be a proper non-empty edge subset");
  const double s = 1.0 / std::sqrt(static_cast<double>(f) * (m - f) * m);
  return FaceFunctional{F, (m - f) * s, f * s};
}

double kappa(const Graph& g) {
  const int m = g.edge_count();
  double best = std::numeric_limits<double>::infinity();
  for (int f = 1; f < m; ++f) best = std::min(best, face_scale(f, m));
  return best;
}

double l_value(const Graph& g, EdgeSubset F, double n, std::span<const double> counts) {
  const FaceFunctional u = face_functional(g, F);
  double s = 0;
  for (int e : F.indices()) s += counts[static_cast<std::size_t>(e)];
  return u.scale() * (s - n * full_degree_count(g, F) / static_cast<double>(g.vertex_count()));
}

double boundary_distance(const Graph& g, std::span<const double> x) {
  return Geometry(g).boundary_distance(x);
}

EdgeVector ray_exit_point(const Graph& g, std::span<const double> z, std::span<const double> x) {
  Geometry geo(g);
  if (geo.min_slack(z) <= kRegionTol) throw Error(Errc::InvalidArgument, "ray origin must be interior");
  return geo.ray_exit_point(z, x);
}

double kernel_violation(const Graph& g, const MoveKernel& kernel, const VertexWeights& w,
                        std::span<const double> target) {
  double worst = 0;
  for (int v = 1; v <= g.vertex_count(); ++v) {
    double row = 0;
    for (int e = 0; e < g.edge_count(); ++e) {
      const double q = kernel.prob(v, e);
      worst = std::max(worst, -q);
      if (!g.edge(e).touches(v)) worst = std::max(worst, std::abs(q));
      row += q;
    }
    worst = std::max(worst, std::abs(row - 1.0));
  }
  const EdgeVector y = kernel.mean(w);
  for (std::size_t e = 0; e < y.size(); ++e) worst = std::max(worst, std::abs(y[e] - target[e]));
  return worst;
}

}  // namespace sapg
