#include "kf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kf {

namespace {

double min_corner_angle(const Vec4& a, const Vec4& b, const Vec4& c) {
  const Vec4* p[3] = {&a, &b, &c};
  const double area2 = 2.0 * triangle_area(a, b, c);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const Vec4 u = *p[(k + 1) % 3] - *p[k];
    const Vec4 w = *p[(k + 2) % 3] - *p[k];
    best = std::min(best, std::atan2(area2, u.dot(w)));
  }
  return best;
}

double mesh_min_angle(const std::vector<Vec4>& pos, const std::vector<FaceTri>& faces) {
  double best = std::numeric_limits<double>::infinity();
  for (const FaceTri& f : faces) {
    best = std::min(best, min_corner_angle(pos[f[0]], pos[f[1]], pos[f[2]]));
  }
  return best;
}

double cot_opposite(const Vec4& apex, const Vec4& a, const Vec4& b) {
  const Vec4 u = a - apex;
  const Vec4 w = b - apex;
  const double cross = 2.0 * triangle_area(apex, a, b);
  return cross > 0 ? u.dot(w) / cross : 0.0;
}

}  // namespace

RemeshResult remesh(const SurfaceMesh& mesh) {
  const std::vector<Vec4>& pos = mesh.positions();
  std::vector<FaceTri> faces = mesh.faces();
  const double floor = 1e-14 * mesh.bbox_scale() * mesh.bbox_scale();

  RemeshResult out{mesh, 0, 0, 0.0, 0.0, 0.0};
  out.min_angle_before = mesh_min_angle(pos, faces);

  // Lawson passes: flip edge (i, j) when the opposite angles sum past pi,
  // guarded so the flip is manifold, non-degenerate, and improves the local
  // minimum angle.
  auto topo = MeshTopology::build(faces, mesh.vertex_count());
  for (int pass = 0; pass < 10; ++pass) {
    int flips_this_pass = 0;
    for (const auto& e : topo->edges()) {
      if (e.f1 < 0) continue;
      const FaceTri f0 = topo->faces()[e.f0];
      const FaceTri f1 = topo->faces()[e.f1];
      auto opposite = [](const FaceTri& f, int a, int b) {
        for (int k = 0; k < 3; ++k) {
          if (f[k] != a && f[k] != b) return f[k];
        }
        return -1;
      };
      const int k0 = opposite(f0, e.a, e.b);
      const int k1 = opposite(f1, e.a, e.b);
      if (k0 < 0 || k1 < 0 || k0 == k1) continue;

      const double criterion = cot_opposite(pos[k0], pos[e.a], pos[e.b]) +
                               cot_opposite(pos[k1], pos[e.a], pos[e.b]);
      if (criterion >= -1e-12) continue;  // already Delaunay

      if (topo->find_edge(k0, k1) >= 0) {
        ++out.skipped_flips;  // would create a duplicate edge
        continue;
      }
      const double area_a = triangle_area(pos[k0], pos[k1], pos[e.a]);
      const double area_b = triangle_area(pos[k0], pos[k1], pos[e.b]);
      if (area_a < floor || area_b < floor) {
        ++out.skipped_flips;
        continue;
      }
      const double old_min =
          std::min(min_corner_angle(pos[f0[0]], pos[f0[1]], pos[f0[2]]),
                   min_corner_angle(pos[f1[0]], pos[f1[1]], pos[f1[2]]));
      // Orientation-preserving replacement. With f0 = (.., i, j, ..) and
      // f1 = (.., j, i, ..) on the shared edge, the flipped pair keeps every
      // rim edge direction.
      auto oriented = [](const FaceTri& f, int a, int b) {
        for (int k = 0; k < 3; ++k) {
          if (f[k] == a && f[(k + 1) % 3] == b) return true;
        }
        return false;
      };
      const int i = oriented(f0, e.a, e.b) ? e.a : e.b;
      const int j = i == e.a ? e.b : e.a;
      const FaceTri nf0 = {k0, i, k1};
      const FaceTri nf1 = {k1, j, k0};
      const double new_min =
          std::min(min_corner_angle(pos[nf0[0]], pos[nf0[1]], pos[nf0[2]]),
                   min_corner_angle(pos[nf1[0]], pos[nf1[1]], pos[nf1[2]]));
      if (new_min <= old_min) {
        ++out.skipped_flips;
        continue;
      }
      faces[e.f0] = nf0;
      faces[e.f1] = nf1;
      ++flips_this_pass;
    }
    out.flips += flips_this_pass;
    if (flips_this_pass == 0) break;
    topo = MeshTopology::build(faces, mesh.vertex_count());
  }

  // One pass of tangential smoothing: move interior vertices toward the
  // 1-ring centroid with the motion projected onto the fitted tangent plane,
  // so the normal component stays at curvature-quadratic size.
  SurfaceMesh flipped(pos, faces, mesh.boundary_policy(), mesh.tags());
  const GeometryField geom = geometry(flipped);
  std::vector<Vec4> smoothed = pos;
  const auto& off = flipped.topology().vertex_neighbor_offsets();
  const auto& nbr = flipped.topology().vertex_neighbors();
  for (int v = 0; v < flipped.vertex_count(); ++v) {
    if (flipped.topology().vertex_on_boundary(v)) continue;
    const int begin = off[v], end = off[v + 1];
    if (end == begin) continue;
    Vec4 centroid = Vec4::Zero();
    for (int i = begin; i < end; ++i) centroid += pos[nbr[i]];
    centroid /= (end - begin);
    const Vec4 delta = centroid - pos[v];
    const Vec4 tangential = geom.vert_e1[v] * delta.dot(geom.vert_e1[v]) +
                            geom.vert_e2[v] * delta.dot(geom.vert_e2[v]);
    smoothed[v] = pos[v] + 0.5 * tangential;
    out.max_drift = std::max(out.max_drift, (smoothed[v] - pos[v]).norm());
  }

  out.mesh = SurfaceMesh(std::move(smoothed), std::move(faces), mesh.boundary_policy(),
                         mesh.tags());
  out.min_angle_after = mesh_min_angle(out.mesh.positions(), out.mesh.faces());
  return out;
}

}  // namespace kf
