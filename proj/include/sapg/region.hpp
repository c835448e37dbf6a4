#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sapg/graph.hpp"

namespace sapg {

/// One real per edge, in graph edge order.
using EdgeVector = std::vector<double>;

/// Comparison tolerance for slacks, simplex sums, and flow values.
inline constexpr double kRegionTol = 1e-9;

/// Vertex draw probabilities p_v (index v-1). Uniform unless overridden.
class VertexWeights {
 public:
  static VertexWeights uniform(int k);
  /// Throws InvalidArgument unless every p_v > 0 and the sum is 1 within 1e-9.
  static VertexWeights from(std::vector<double> p);

  int size() const noexcept { return static_cast<int>(p_.size()); }
  double operator()(int v) const { return p_[static_cast<std::size_t>(v - 1)]; }
  std::span<const double> values() const noexcept { return p_; }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  std::vector<double> p_;
  bool uniform_ = true;
};

enum class Region { InteriorReachable, BoundaryK, Inaccessible, OutsideSimplex };
std::string_view region_name(Region r) noexcept;

struct RegionClass {
  Region region = Region::InteriorReachable;
  EdgeSubset face;   ///< minimizing face
  double slack = 0;  ///< its slack
};

/// u^F = a on F, -b off F; zero-sum and unit norm.
struct FaceFunctional {
  EdgeSubset F;
  double a = 0;
  double b = 0;
  double scale() const noexcept { return a + b; }
};

/// q^{(v)}(e) for every vertex, stored densely as k rows of |E| entries.
struct MoveKernel {
  int k = 0;
  int m = 0;
  std::vector<double> q;
  EdgeVector target;

  double prob(int v, int e) const { return q[static_cast<std::size_t>((v - 1) * m + e)]; }
  double& prob(int v, int e) { return q[static_cast<std::size_t>((v - 1) * m + e)]; }
  /// Sum_v p_v q^{(v)}(e).
  EdgeVector mean(const VertexWeights& w) const;
};

struct FlowMembership {
  double value = 0;
  std::optional<MoveKernel> kernel;  ///< present iff value == 1 within tolerance
};

/// Precomputed face data for one proper non-empty edge subset.
struct Face {
  EdgeSubset set;
  int size = 0;
  int full_degree = 0;  ///< d(F)
  double demand = 0;    ///< total weight of full-degree vertices
  double scale = 0;     ///< a_F + b_F
};

/// Region geometry of a graph under fixed vertex weights.
///
/// Faces are enumerated eagerly when |E| <= 20; with more edges only the
/// flow-based membership test and x_star are available.
class Geometry {
 public:
  explicit Geometry(Graph g);
  Geometry(Graph g, VertexWeights w);

  const Graph& graph() const noexcept { return g_; }
  const VertexWeights& weights() const noexcept { return w_; }
  int edge_count() const noexcept { return g_.edge_count(); }

  /// All proper non-empty faces (throws SubsetCapExceeded above the cap).
  std::span<const Face> faces() const;
  /// Faces with 0 < d(F) < k, the ones bounding the critical surface.
  std::span<const Face> critical_faces() const;

  /// Sum_{e in F} x_e - demand(F), for every face in faces() order.
  std::vector<double> slacks(std::span<const double> x) const;
  double min_slack(std::span<const double> x) const;

  RegionClass classify(std::span<const double> x) const;
  bool in_region(std::span<const double> x) const { return min_slack(x) >= -kRegionTol; }
  FlowMembership membership_flow(std::span<const double> x) const;

  EdgeVector x_star() const;
  double boundary_distance(std::span<const double> x) const;

  /// z + t (x - z) for the smallest t > 0 at which a face becomes tight.
  EdgeVector ray_exit_point(std::span<const double> z, std::span<const double> x) const;

  /// Farthest point of K_G on the half-line origin + t*dir, t >= 0, or
  /// nullopt if the half-line misses K_G.
  std::optional<EdgeVector> exit_along(std::span<const double> origin, std::span<const double> dir) const;

  /// Radial projection onto K_G toward x_star: identity on K_G, otherwise the
  /// boundary point of the segment from x_star to x.
  EdgeVector clip_to_region(std::span<const double> x) const;

  /// Kernel realizing a point of K_G; points outside are clipped first.
  MoveKernel kernel_for(std::span<const double> y) const;

  /// min over critical faces of L^{F,n}(counts).
  double min_critical_l(std::span<const double> counts, double n) const;

 private:
  void check_simplex(std::span<const double> x) const;

  Graph g_;
  VertexWeights w_;
  std::vector<Face> faces_;
  std::vector<Face> critical_;
  bool enumerated_ = false;
};

// Free-function forms. Unless weights are passed, vertex draws are uniform.
RegionClass classify_point(const Graph& g, std::span<const double> x,
                           const VertexWeights& w);
FlowMembership membership_flow(const Graph& g, std::span<const double> x,
                               const VertexWeights& w);
EdgeVector x_star(const Graph& g);
FaceFunctional face_functional(const Graph& g, EdgeSubset F);
double kappa(const Graph& g);
/// (a_F + b_F) (Sum_{e in F} v_e - n d(F)/k).
double l_value(const Graph& g, EdgeSubset F, double n, std::span<const double> counts);
double boundary_distance(const Graph& g, std::span<const double> x);
EdgeVector ray_exit_point(const Graph& g, std::span<const double> z, std::span<const double> x);

/// Checks Sum_e q = 1 per vertex, support on incident edges, and the mean
/// condition against `target`; returns the largest violation.
double kernel_violation(const Graph& g, const MoveKernel& kernel, const VertexWeights& w,
                        std::span<const double> target);

double norm2(std::span<const double> x);
double distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace sapg
