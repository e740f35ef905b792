#pragma once

#include "kf/mesh.hpp"

#include <cstdint>
#include <vector>

namespace kf {

// Per-vertex flags in GeometryField.
enum : std::uint8_t {
  kGeomBoundary = 1,   // boundary vertex, excluded from fitting
  kGeomImputed = 2,    // rank-deficient stencil, values copied from 1-ring
};

// Differential-geometry quantities of one mesh snapshot. The mean curvature
// vector is the cotangent Laplacian of the position map; the second
// fundamental form comes from a quadratic fit of the two normal coordinates
// over the 2-ring stencil; the primary Gauss-curvature channel is the
// flat-ambient Gauss equation evaluated on the fitted form, with the angle
// defect kept as an independent cross-check.
struct GeometryField {
  // per face
  std::vector<double> face_area;
  std::vector<Vec4> face_e1, face_e2;  // oriented orthonormal frame

  // per vertex
  std::vector<double> dual_area;          // barycentric lumping, sums to total area
  std::vector<Vec4> mean_curvature;       // H, cotan Laplacian of positions
  std::vector<Vec4> mean_curvature_fit;   // trace of the fitted form (diagnostic channel)
  std::vector<double> a2;                 // |A|^2
  std::vector<double> gauss;              // K = sum_nu det h^nu
  std::vector<double> gauss_defect;       // angle defect / dual area
  std::vector<Vec4> vert_e1, vert_e2;     // orthonormal tangent frame
  std::vector<Vec4> vert_n1, vert_n2;     // orthonormal normal frame
  std::vector<std::uint8_t> flags;

  double total_area = 0.0;
  double min_edge_length = 0.0;
  double mean_edge_length = 0.0;

  bool interior(int v) const { return (flags[v] & (kGeomBoundary | kGeomImputed)) == 0; }

  double max_a2() const;                   // over interior vertices
  double max_mean_curvature_norm() const;  // over interior vertices
};

GeometryField geometry(const SurfaceMesh& mesh);

// Cotangent Laplacian of a per-vertex scalar field, same stencil and sign
// convention as the mean curvature vector (Laplacian of each coordinate).
std::vector<double> cotan_laplacian(const SurfaceMesh& mesh, const GeometryField& geom,
                                    const std::vector<double>& values);

// P1 gradient of a per-vertex scalar inside each face (a vector in the face
// plane), and its area-weighted per-vertex average.
std::vector<Vec4> face_gradient(const SurfaceMesh& mesh, const GeometryField& geom,
                                const std::vector<double>& values);
std::vector<Vec4> vertex_gradient(const SurfaceMesh& mesh, const GeometryField& geom,
                                  const std::vector<double>& values);

// Vertices whose extrinsic distance to the nearest boundary vertex is at
// least margin_frac times the bounding radius; all vertices when closed.
std::vector<int> interior_vertices(const SurfaceMesh& mesh, double margin_frac);

}  // namespace kf
