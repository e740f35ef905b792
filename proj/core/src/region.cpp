#include "kf/region.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>
#include <set>
#include <stdexcept>

namespace kf {

RegionSelector RegionSelector::ball(const Vec4& center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("RegionSelector: radius must be > 0");
  RegionSelector r;
  r.mode = Mode::ExtrinsicBall;
  r.center = center;
  r.radius = radius;
  return r;
}

RegionSelector RegionSelector::faces(std::vector<int> subset) {
  RegionSelector r;
  r.mode = Mode::FaceSubset;
  r.face_subset = std::move(subset);
  return r;
}

TotalCurvature total_curvature(const SurfaceMesh& mesh, const GeometryField& geom,
                               const RegionSelector& region) {
  TotalCurvature out;
  const int nv = mesh.vertex_count();

  if (region.mode == RegionSelector::Mode::ExtrinsicBall) {
    const double r2 = region.radius * region.radius;
    bool any = false;
    for (int v = 0; v < nv; ++v) {
      if ((mesh.position(v) - region.center).squaredNorm() > r2) continue;
      any = true;
      out.a2_integral += geom.a2[v] * geom.dual_area[v];
      out.gauss_integral += geom.gauss[v] * geom.dual_area[v];
    }
    out.empty_region = !any;
  } else {
    // Dual areas restricted to the subset so disjoint subsets stay additive.
    std::vector<double> restricted(nv, 0.0);
    for (int f : region.face_subset) {
      const FaceTri& tri = mesh.faces()[f];
      const double third = geom.face_area[f] / 3.0;
      for (int k = 0; k < 3; ++k) restricted[tri[k]] += third;
    }
    bool any = false;
    for (int v = 0; v < nv; ++v) {
      if (restricted[v] <= 0) continue;
      any = true;
      out.a2_integral += geom.a2[v] * restricted[v];
      out.gauss_integral += geom.gauss[v] * restricted[v];
    }
    out.empty_region = !any;
  }

  out.neg_gauss_integral = -out.gauss_integral;
  if (out.gauss_integral < 0) {
    out.minimal_ratio = out.a2_integral / (-2.0 * out.gauss_integral);
  }
  return out;
}

std::optional<double> intrinsic_distance(const SurfaceMesh& mesh, int from, int to,
                                         int steiner_level) {
  const MeshTopology& topo = mesh.topology();
  const int nv = mesh.vertex_count();
  if (from < 0 || from >= nv || to < 0 || to >= nv) {
    throw std::invalid_argument("intrinsic_distance: vertex out of range");
  }
  if (from == to) return 0.0;

  // Graph nodes: vertices [0, nv), then one node per edge midpoint.
  const int ne = static_cast<int>(topo.edges().size());
  const bool steiner = steiner_level > 0;
  const int nodes = steiner ? nv + ne : nv;

  auto node_pos = [&](int n) -> Vec4 {
    if (n < nv) return mesh.position(n);
    const auto& e = topo.edges()[n - nv];
    return 0.5 * (mesh.position(e.a) + mesh.position(e.b));
  };

  std::vector<std::vector<std::pair<int, double>>> adj(nodes);
  auto link = [&](int a, int b) {
    const double len = (node_pos(a) - node_pos(b)).norm();
    adj[a].push_back({b, len});
    adj[b].push_back({a, len});
  };

  if (!steiner) {
    for (const auto& e : topo.edges()) link(e.a, e.b);
  } else {
    // Half edges through the midpoint.
    for (int e = 0; e < ne; ++e) {
      link(topo.edges()[e].a, nv + e);
      link(topo.edges()[e].b, nv + e);
    }
    // In-face segments: midpoints pairwise, and each vertex to the opposite
    // midpoint. All lie inside the flat triangle, so on the surface.
    for (int f = 0; f < mesh.face_count(); ++f) {
      const auto& fe = topo.face_edges()[f];
      if (fe[0] < 0 || fe[1] < 0 || fe[2] < 0) continue;
      const int m0 = nv + fe[0], m1 = nv + fe[1], m2 = nv + fe[2];
      link(m0, m1);
      link(m1, m2);
      link(m0, m2);
      const FaceTri& tri = topo.faces()[f];
      // Edge k joins tri[k], tri[k+1]; its midpoint is opposite tri[k+2].
      link(tri[2], m0);
      link(tri[0], m1);
      link(tri[1], m2);
    }
  }

  std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
  using QItem = std::pair<double, int>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
  dist[from] = 0.0;
  queue.push({0.0, from});
  while (!queue.empty()) {
    const auto [d, n] = queue.top();
    queue.pop();
    if (d > dist[n]) continue;
    if (n == to) return d;
    for (const auto& [m, len] : adj[n]) {
      const double nd = d + len;
      if (nd < dist[m]) {
        dist[m] = nd;
        queue.push({nd, m});
      }
    }
  }
  return std::nullopt;  // disconnected
}

std::vector<std::vector<int>> components_in_ball(const SurfaceMesh& mesh,
                                                 const Vec4& center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("components_in_ball: radius must be > 0");
  const MeshTopology& topo = mesh.topology();
  const int nf = mesh.face_count();
  const double r2 = radius * radius;
  const double half2 = 0.25 * radius * radius;

  std::vector<char> in_ball(nf, 0);
  for (int f = 0; f < nf; ++f) {
    if ((mesh.face_barycenter(f) - center).squaredNorm() <= r2) in_ball[f] = 1;
  }

  std::vector<int> comp(nf, -1);
  std::vector<std::vector<int>> groups;
  for (int seed = 0; seed < nf; ++seed) {
    if (!in_ball[seed] || comp[seed] >= 0) continue;
    const int id = static_cast<int>(groups.size());
    groups.emplace_back();
    std::vector<int> stack{seed};
    comp[seed] = id;
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      groups[id].push_back(f);
      for (int k = 0; k < 3; ++k) {
        const int eid = topo.face_edges()[f][k];
        if (eid < 0) continue;
        const auto& e = topo.edges()[eid];
        const int other = (e.f0 == f) ? e.f1 : e.f0;
        if (other >= 0 && in_ball[other] && comp[other] < 0) {
          comp[other] = id;
          stack.push_back(other);
        }
      }
    }
  }

  // Keep components that reach the half ball; order by smallest vertex index.
  std::vector<std::pair<int, std::vector<int>>> kept;
  for (auto& group : groups) {
    bool reaches = false;
    int min_vertex = std::numeric_limits<int>::max();
    for (int f : group) {
      const FaceTri& tri = topo.faces()[f];
      for (int k = 0; k < 3; ++k) {
        min_vertex = std::min(min_vertex, tri[k]);
        if ((mesh.position(tri[k]) - center).squaredNorm() <= half2) reaches = true;
      }
      if ((mesh.face_barycenter(f) - center).squaredNorm() <= half2) reaches = true;
    }
    if (reaches) {
      std::sort(group.begin(), group.end());
      kept.emplace_back(min_vertex, std::move(group));
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<int>> out;
  out.reserve(kept.size());
  for (auto& [mv, group] : kept) out.push_back(std::move(group));
  return out;
}

IsoperimetricResult isoperimetric_ratio(const SurfaceMesh& mesh,
                                        const std::vector<int>& face_subset) {
  IsoperimetricResult out;
  const MeshTopology& topo = mesh.topology();
  std::vector<char> inside(mesh.face_count(), 0);
  for (int f : face_subset) {
    inside[f] = 1;
    out.area += triangle_area(mesh.position(topo.faces()[f][0]),
                              mesh.position(topo.faces()[f][1]),
                              mesh.position(topo.faces()[f][2]));
  }
  for (const auto& e : topo.edges()) {
    const bool a = e.f0 >= 0 && inside[e.f0];
    const bool b = e.f1 >= 0 && inside[e.f1];
    if (a != b) {
      out.boundary_length += (mesh.position(e.a) - mesh.position(e.b)).norm();
    }
  }
  if (out.boundary_length <= 0) {
    out.closed_subdomain = true;
    return out;
  }
  out.ratio = out.area / (out.boundary_length * out.boundary_length);
  return out;
}

double ball_area(const SurfaceMesh& mesh, const Vec4& center, double radius) {
  const double r2 = radius * radius;
  double area = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceTri& tri = mesh.faces()[f];
    const Vec4& a = mesh.position(tri[0]);
    const Vec4& b = mesh.position(tri[1]);
    const Vec4& c = mesh.position(tri[2]);
    const bool ia = (a - center).squaredNorm() <= r2;
    const bool ib = (b - center).squaredNorm() <= r2;
    const bool ic = (c - center).squaredNorm() <= r2;
    const double fa = triangle_area(a, b, c);
    if (ia && ib && ic) {
      area += fa;
      continue;
    }
    if (!ia && !ib && !ic) {
      // The triangle may still clip the ball; the barycentric samples below
      // resolve grazing cases, so only skip when clearly outside.
      const double closest = std::min({(a - center).norm(), (b - center).norm(),
                                       (c - center).norm()});
      if (closest > radius + (a - b).norm() + (b - c).norm()) continue;
    }
    // Sampled fraction on a 4x4 barycentric refinement.
    int hit = 0, total = 0;
    constexpr int n = 4;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        // Two sub-triangles per lattice cell, sampled at their centroids.
        const double u0 = static_cast<double>(i) / n;
        const double v0 = static_cast<double>(j) / n;
        const double s = 1.0 / n;
        const Vec4 p_up = a + (u0 + s / 3.0) * (b - a) + (v0 + s / 3.0) * (c - a);
        ++total;
        if ((p_up - center).squaredNorm() <= r2) ++hit;
        if (i + j < n - 1) {
          const Vec4 p_dn = a + (u0 + 2.0 * s / 3.0) * (b - a) + (v0 + 2.0 * s / 3.0) * (c - a);
          ++total;
          if ((p_dn - center).squaredNorm() <= r2) ++hit;
        }
      }
    }
    area += fa * static_cast<double>(hit) / static_cast<double>(total);
  }
  return area;
}

double area_ratio(const SurfaceMesh& mesh, const Vec4& center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("area_ratio: radius must be > 0");
  return ball_area(mesh, center, radius) / (radius * radius);
}

GaussBonnetTotals total_curvature_gb(const SurfaceMesh& mesh,
                                     const std::vector<int>& face_subset) {
  GaussBonnetTotals out;
  out.faces = static_cast<int>(face_subset.size());
  if (face_subset.empty()) return out;
  const MeshTopology& topo = mesh.topology();

  std::vector<char> inside(mesh.face_count(), 0);
  for (int f : face_subset) inside[f] = 1;

  // Submesh counts; vertices split into fans where the subset pinches.
  std::set<int> verts;
  std::map<int, double> angle_sum;
  for (int f : face_subset) {
    const FaceTri& tri = topo.faces()[f];
    const Vec4* p[3] = {&mesh.position(tri[0]), &mesh.position(tri[1]),
                        &mesh.position(tri[2])};
    const double area2 = 2.0 * triangle_area(*p[0], *p[1], *p[2]);
    for (int k = 0; k < 3; ++k) {
      const Vec4 u = *p[(k + 1) % 3] - *p[k];
      const Vec4 w = *p[(k + 2) % 3] - *p[k];
      angle_sum[tri[k]] += std::atan2(area2, u.dot(w));
      verts.insert(tri[k]);
    }
  }

  long edge_count = 0;
  std::map<int, int> boundary_degree;  // vertex -> incident submesh boundary edges
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const auto& edge = topo.edges()[e];
    const bool a = edge.f0 >= 0 && inside[edge.f0];
    const bool b = edge.f1 >= 0 && inside[edge.f1];
    if (a || b) ++edge_count;
    if (a != b) {
      boundary_degree[edge.a] += 1;
      boundary_degree[edge.b] += 1;
    }
  }

  long vertex_count_eff = 0;
  double interior_defect = 0.0;
  double turning = 0.0;
  for (int v : verts) {
    auto bd = boundary_degree.find(v);
    const int fans = (bd == boundary_degree.end()) ? 1 : bd->second / 2;
    vertex_count_eff += std::max(1, fans);
    if (bd == boundary_degree.end()) {
      interior_defect += 2.0 * std::numbers::pi - angle_sum[v];
    } else {
      // Each fan of a pinched rim vertex turns independently.
      turning += std::max(1, fans) * std::numbers::pi - angle_sum[v];
    }
  }

  out.chi = static_cast<int>(vertex_count_eff - edge_count + face_subset.size());
  out.boundary_turning = turning;
  out.neg_total_k = -interior_defect;
  return out;
}

QuantizationEstimate quantization_estimate(const SurfaceMesh& mesh, const Vec4& center,
                                           const std::vector<double>& radii) {
  QuantizationEstimate out;
  for (double r : radii) {
    std::vector<int> subset;
    const double r2 = r * r;
    for (int f = 0; f < mesh.face_count(); ++f) {
      if ((mesh.face_barycenter(f) - center).squaredNorm() <= r2) subset.push_back(f);
    }
    if (subset.empty()) continue;
    const GaussBonnetTotals gb = total_curvature_gb(mesh, subset);
    out.radii.push_back(r);
    out.c_of_r.push_back(gb.neg_total_k / (2.0 * std::numbers::pi));
  }
  if (out.radii.size() < 2) return out;

  // Least squares for c(R) = N - a / R.
  const int m = static_cast<int>(out.radii.size());
  Eigen::MatrixXd M(m, 2);
  Eigen::VectorXd y(m);
  for (int i = 0; i < m; ++i) {
    M(i, 0) = 1.0;
    M(i, 1) = -1.0 / out.radii[i];
    y(i) = out.c_of_r[i];
  }
  const Eigen::Vector2d sol = M.colPivHouseholderQr().solve(y);
  out.n_hat = sol[0];
  out.nearest_integer_distance = std::abs(out.n_hat - std::round(out.n_hat));
  out.ok = true;
  return out;
}

}  // namespace kf
