#pragma once

#include "kf/geometry.hpp"
#include "kf/mesh.hpp"

#include <optional>
#include <vector>

namespace kf {

struct RegionSelector {
  enum class Mode { ExtrinsicBall, FaceSubset };
  Mode mode = Mode::ExtrinsicBall;
  Vec4 center = Vec4::Zero();
  double radius = 0.0;
  std::vector<int> face_subset;

  static RegionSelector ball(const Vec4& center, double radius);
  static RegionSelector faces(std::vector<int> subset);
};

struct TotalCurvature {
  double a2_integral = 0.0;        // integral of |A|^2
  double gauss_integral = 0.0;     // integral of K
  double neg_gauss_integral = 0.0; // -integral of K
  double minimal_ratio = 0.0;      // a2_integral / (-2 gauss_integral), 0 if undefined
  bool empty_region = false;
};

TotalCurvature total_curvature(const SurfaceMesh& mesh, const GeometryField& geom,
                               const RegionSelector& region);

// Shortest path along mesh edges (Dijkstra). With steiner_level 1 the graph
// also carries edge midpoints joined across each face, tightening the upper
// bound on the geodesic distance; every path stays on the surface either way.
std::optional<double> intrinsic_distance(const SurfaceMesh& mesh, int from, int to,
                                         int steiner_level = 1);

// Connected components of the faces whose barycenter lies in B_R(center),
// filtered to components that reach B_{R/2}(center); ordered by smallest
// contained vertex index.
std::vector<std::vector<int>> components_in_ball(const SurfaceMesh& mesh,
                                                 const Vec4& center, double radius);

struct IsoperimetricResult {
  double ratio = 0.0;  // area / boundary_length^2
  double area = 0.0;
  double boundary_length = 0.0;
  bool closed_subdomain = false;
};

IsoperimetricResult isoperimetric_ratio(const SurfaceMesh& mesh,
                                        const std::vector<int>& face_subset);

// Area(mesh within B_R(center)) / R^2. Crossing faces contribute the sampled
// inside fraction on a 16-fold barycentric subdivision.
double area_ratio(const SurfaceMesh& mesh, const Vec4& center, double radius);
double ball_area(const SurfaceMesh& mesh, const Vec4& center, double radius);

// Total curvature of a submesh by angle defects, with the discrete
// Gauss-Bonnet bookkeeping needed for truncated pieces:
//   sum_int (2pi - angles) + sum_bdry (pi - angles) = 2 pi chi  (identity)
// neg_total_k = -sum of interior defects = boundary turning - 2 pi chi.
struct GaussBonnetTotals {
  double neg_total_k = 0.0;
  double boundary_turning = 0.0;
  int chi = 0;
  int faces = 0;
};
GaussBonnetTotals total_curvature_gb(const SurfaceMesh& mesh,
                                     const std::vector<int>& face_subset);

// Quantization estimate N = -total K / 2pi on a truncated minimal candidate:
// evaluates the Gauss-Bonnet channel on B_R(center) truncations for each R
// and extrapolates the tail with the model c(R) = N - a/R.
struct QuantizationEstimate {
  double n_hat = 0.0;
  double nearest_integer_distance = 0.0;
  std::vector<double> radii;
  std::vector<double> c_of_r;  // -total K / 2pi at each radius
  bool ok = false;
};
QuantizationEstimate quantization_estimate(const SurfaceMesh& mesh, const Vec4& center,
                                           const std::vector<double>& radii);

}  // namespace kf
