#include "kf/geometry.hpp"

#include "kf/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kf {

double GeometryField::max_a2() const {
  double m = 0.0;
  for (std::size_t v = 0; v < a2.size(); ++v) {
    if (interior(static_cast<int>(v))) m = std::max(m, a2[v]);
  }
  return m;
}

double GeometryField::max_mean_curvature_norm() const {
  double m = 0.0;
  for (std::size_t v = 0; v < mean_curvature.size(); ++v) {
    if (interior(static_cast<int>(v))) m = std::max(m, mean_curvature[v].norm());
  }
  return m;
}

namespace {

// Orthonormal tangent frame of a face, oriented by the vertex order.
void face_frame(const Vec4& p0, const Vec4& p1, const Vec4& p2, Vec4& e1, Vec4& e2) {
  const Vec4 u = p1 - p0;
  const Vec4 v = p2 - p0;
  e1 = u.normalized();
  e2 = v - v.dot(e1) * e1;
  const double n = e2.norm();
  e2 = n > 0 ? Vec4(e2 / n) : Vec4::Zero();
}

struct FitResult {
  double a2 = 0.0;
  double gauss = 0.0;
  Vec4 h_trace = Vec4::Zero();
  bool ok = false;
};

FitResult fit_second_fundamental_form(const SurfaceMesh& mesh, int v, const Vec4& e1,
                                      const Vec4& e2, const Vec4& n1, const Vec4& n2,
                                      const std::vector<int>& stencil) {
  FitResult out;
  const int m = static_cast<int>(stencil.size());
  if (m < 5) return out;

  Eigen::MatrixXd M(m, 5);
  Eigen::MatrixXd rhs(m, 2);
  const Vec4 origin = mesh.position(v);
  for (int i = 0; i < m; ++i) {
    const Vec4 d = mesh.position(stencil[i]) - origin;
    const double s = d.dot(e1);
    const double t = d.dot(e2);
    M(i, 0) = s;
    M(i, 1) = t;
    M(i, 2) = 0.5 * s * s;
    M(i, 3) = s * t;
    M(i, 4) = 0.5 * t * t;
    rhs(i, 0) = d.dot(n1);
    rhs(i, 1) = d.dot(n2);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < 5) return out;
  const Eigen::MatrixXd coef = qr.solve(rhs);  // rows: s, t, ss, st, tt

  double a2 = 0.0, gauss = 0.0;
  double trace[2];
  for (int c = 0; c < 2; ++c) {
    const double h11 = coef(2, c);
    const double h12 = coef(3, c);
    const double h22 = coef(4, c);
    a2 += h11 * h11 + 2.0 * h12 * h12 + h22 * h22;
    gauss += h11 * h22 - h12 * h12;
    trace[c] = h11 + h22;
  }
  out.a2 = a2;
  out.gauss = gauss;
  out.h_trace = trace[0] * n1 + trace[1] * n2;
  out.ok = true;
  return out;
}

}  // namespace

GeometryField geometry(const SurfaceMesh& mesh) {
  const MeshTopology& topo = mesh.topology();
  const int nv = mesh.vertex_count();
  const int nf = mesh.face_count();

  GeometryField g;
  g.face_area.resize(nf);
  g.face_e1.resize(nf);
  g.face_e2.resize(nf);
  g.dual_area.assign(nv, 0.0);
  g.mean_curvature.assign(nv, Vec4::Zero());
  g.mean_curvature_fit.assign(nv, Vec4::Zero());
  g.a2.assign(nv, 0.0);
  g.gauss.assign(nv, 0.0);
  g.gauss_defect.assign(nv, 0.0);
  g.vert_e1.assign(nv, Vec4::Zero());
  g.vert_e2.assign(nv, Vec4::Zero());
  g.vert_n1.assign(nv, Vec4::Zero());
  g.vert_n2.assign(nv, Vec4::Zero());
  g.flags.assign(nv, 0);

  // Face areas, frames, and corner angles.
  std::vector<std::array<double, 3>> corner_angle(nf);
  std::vector<std::array<double, 3>> corner_cot(nf);
  for (int f = 0; f < nf; ++f) {
    const FaceTri& tri = topo.faces()[f];
    const Vec4& p0 = mesh.position(tri[0]);
    const Vec4& p1 = mesh.position(tri[1]);
    const Vec4& p2 = mesh.position(tri[2]);
    g.face_area[f] = triangle_area(p0, p1, p2);
    face_frame(p0, p1, p2, g.face_e1[f], g.face_e2[f]);
    const Vec4* pts[3] = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      const Vec4 u = *pts[(k + 1) % 3] - *pts[k];
      const Vec4 w = *pts[(k + 2) % 3] - *pts[k];
      const double dot = u.dot(w);
      const double cross = 2.0 * g.face_area[f];  // |u||w|sin(theta)
      corner_angle[f][k] = std::atan2(cross, dot);
      corner_cot[f][k] = cross > 0 ? dot / cross : 0.0;
    }
  }

  // Mixed Voronoi lumping (obtuse triangles split 1/2 : 1/4 : 1/4); each
  // face's area is distributed exactly, so the dual areas partition the total.
  g.total_area = 0.0;
  for (int f = 0; f < nf; ++f) {
    g.total_area += g.face_area[f];
    const FaceTri& tri = topo.faces()[f];
    const double area = g.face_area[f];
    if (area <= 0) continue;
    int obtuse = -1;
    for (int k = 0; k < 3; ++k) {
      if (corner_cot[f][k] < 0) obtuse = k;
    }
    if (obtuse >= 0) {
      for (int k = 0; k < 3; ++k) {
        g.dual_area[tri[k]] += (k == obtuse) ? area / 2.0 : area / 4.0;
      }
    } else {
      const Vec4* p[3] = {&mesh.position(tri[0]), &mesh.position(tri[1]),
                          &mesh.position(tri[2])};
      for (int k = 0; k < 3; ++k) {
        const double len_next = (*p[(k + 1) % 3] - *p[k]).squaredNorm();
        const double len_prev = (*p[(k + 2) % 3] - *p[k]).squaredNorm();
        g.dual_area[tri[k]] +=
            (len_next * corner_cot[f][(k + 2) % 3] + len_prev * corner_cot[f][(k + 1) % 3]) /
            8.0;
      }
    }
  }

  // Edge stats.
  {
    double min_len = std::numeric_limits<double>::infinity();
    double sum_len = 0.0;
    for (const auto& e : topo.edges()) {
      const double len = (mesh.position(e.a) - mesh.position(e.b)).norm();
      min_len = std::min(min_len, len);
      sum_len += len;
    }
    g.min_edge_length = topo.edges().empty() ? 0.0 : min_len;
    g.mean_edge_length = topo.edges().empty() ? 0.0 : sum_len / topo.edges().size();
  }

  // Cotangent mean curvature: H_i = (1 / 2 dual_area_i) sum_j w_ij (x_j - x_i),
  // w_ij summing the cotangents opposite edge (i, j).
  {
    std::vector<double> weight(topo.edges().size(), 0.0);
    for (int f = 0; f < nf; ++f) {
      for (int k = 0; k < 3; ++k) {
        // Face edge k runs tri[k] -> tri[k+1]; the opposite corner is k+2.
        const int eid = topo.face_edges()[f][k];
        if (eid >= 0) weight[eid] += corner_cot[f][(k + 2) % 3];
      }
    }
    for (std::size_t e = 0; e < topo.edges().size(); ++e) {
      const auto& edge = topo.edges()[e];
      const Vec4 d = mesh.position(edge.b) - mesh.position(edge.a);
      g.mean_curvature[edge.a] += weight[e] * d;
      g.mean_curvature[edge.b] -= weight[e] * d;
    }
    for (int v = 0; v < nv; ++v) {
      const double area = g.dual_area[v];
      g.mean_curvature[v] = area > 0 ? Vec4(g.mean_curvature[v] / (2.0 * area)) : Vec4::Zero();
    }
  }

  // Angle defect channel.
  {
    std::vector<double> defect(nv, 2.0 * std::numbers::pi);
    for (int v : topo.boundary_vertices()) defect[v] = std::numbers::pi;
    for (int f = 0; f < nf; ++f) {
      const FaceTri& tri = topo.faces()[f];
      for (int k = 0; k < 3; ++k) defect[tri[k]] -= corner_angle[f][k];
    }
    for (int v = 0; v < nv; ++v) {
      g.gauss_defect[v] = g.dual_area[v] > 0 ? defect[v] / g.dual_area[v] : 0.0;
    }
  }

  // Vertex frames from the area-weighted tangent projector.
  parallel_for(nv, [&](int v) {
    Mat4 proj = Mat4::Zero();
    for (int i = topo.vertex_face_offsets()[v]; i < topo.vertex_face_offsets()[v + 1]; ++i) {
      const int f = topo.vertex_faces()[i];
      const Vec4& e1 = g.face_e1[f];
      const Vec4& e2 = g.face_e2[f];
      proj += g.face_area[f] * (e1 * e1.transpose() + e2 * e2.transpose());
    }
    Eigen::SelfAdjointEigenSolver<Mat4> es(proj);
    // Eigenvalues ascending: last two span the tangent plane.
    g.vert_e1[v] = es.eigenvectors().col(3);
    g.vert_e2[v] = es.eigenvectors().col(2);
    g.vert_n1[v] = es.eigenvectors().col(1);
    g.vert_n2[v] = es.eigenvectors().col(0);
  });

  // Second fundamental form by quadratic fit over the 2-ring.
  std::vector<char> fit_failed(nv, 0);
  parallel_for(nv, [&](int v) {
    if (mesh.boundary_policy() == BoundaryPolicy::PinnedBoundary &&
        topo.vertex_on_boundary(v)) {
      g.flags[v] |= kGeomBoundary;
      return;
    }
    if (topo.vertex_on_boundary(v)) {
      // A boundary vertex in a closed-policy mesh is a validation failure;
      // still avoid fitting on a half stencil.
      g.flags[v] |= kGeomBoundary;
      return;
    }
    // 2-ring stencil.
    std::vector<int> stencil;
    const auto& off = topo.vertex_neighbor_offsets();
    const auto& nbr = topo.vertex_neighbors();
    for (int i = off[v]; i < off[v + 1]; ++i) stencil.push_back(nbr[i]);
    const std::size_t ring1 = stencil.size();
    for (std::size_t r = 0; r < ring1; ++r) {
      const int u = stencil[r];
      for (int i = off[u]; i < off[u + 1]; ++i) {
        const int w = nbr[i];
        if (w == v) continue;
        if (std::find(stencil.begin(), stencil.end(), w) == stencil.end()) {
          stencil.push_back(w);
        }
      }
    }
    const FitResult fit = fit_second_fundamental_form(
        mesh, v, g.vert_e1[v], g.vert_e2[v], g.vert_n1[v], g.vert_n2[v], stencil);
    if (!fit.ok) {
      fit_failed[v] = 1;
      return;
    }
    g.a2[v] = fit.a2;
    g.gauss[v] = fit.gauss;
    g.mean_curvature_fit[v] = fit.h_trace;
  });

  // Impute flagged vertices from their successful 1-ring neighbors.
  for (int v = 0; v < nv; ++v) {
    if (!fit_failed[v] && !(g.flags[v] & kGeomBoundary)) continue;
    if (fit_failed[v]) g.flags[v] |= kGeomImputed;
    const auto& off = topo.vertex_neighbor_offsets();
    const auto& nbr = topo.vertex_neighbors();
    double a2_sum = 0.0, k_sum = 0.0;
    int count = 0;
    for (int i = off[v]; i < off[v + 1]; ++i) {
      const int u = nbr[i];
      if (fit_failed[u] || (g.flags[u] & kGeomBoundary)) continue;
      a2_sum += g.a2[u];
      k_sum += g.gauss[u];
      ++count;
    }
    if (count > 0) {
      g.a2[v] = a2_sum / count;
      g.gauss[v] = k_sum / count;
    }
  }

  return g;
}

std::vector<double> cotan_laplacian(const SurfaceMesh& mesh, const GeometryField& geom,
                                    const std::vector<double>& values) {
  const MeshTopology& topo = mesh.topology();
  const int nv = mesh.vertex_count();
  if (static_cast<int>(values.size()) != nv) {
    throw std::invalid_argument("cotan_laplacian: field size mismatch");
  }
  std::vector<double> weight(topo.edges().size(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceTri& tri = topo.faces()[f];
    const Vec4& p0 = mesh.position(tri[0]);
    const Vec4& p1 = mesh.position(tri[1]);
    const Vec4& p2 = mesh.position(tri[2]);
    const Vec4* pts[3] = {&p0, &p1, &p2};
    for (int k = 0; k < 3; ++k) {
      const int eid = topo.face_edges()[f][k];
      if (eid < 0) continue;
      const int opp = (k + 2) % 3;
      const Vec4 u = *pts[(opp + 1) % 3] - *pts[opp];
      const Vec4 w = *pts[(opp + 2) % 3] - *pts[opp];
      const double cross = 2.0 * geom.face_area[f];
      weight[eid] += cross > 0 ? u.dot(w) / cross : 0.0;
    }
  }
  std::vector<double> lap(nv, 0.0);
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const auto& edge = topo.edges()[e];
    const double d = values[edge.b] - values[edge.a];
    lap[edge.a] += weight[e] * d;
    lap[edge.b] -= weight[e] * d;
  }
  for (int v = 0; v < nv; ++v) {
    lap[v] = geom.dual_area[v] > 0 ? lap[v] / (2.0 * geom.dual_area[v]) : 0.0;
  }
  return lap;
}

std::vector<Vec4> face_gradient(const SurfaceMesh& mesh, const GeometryField& geom,
                                const std::vector<double>& values) {
  const int nf = mesh.face_count();
  std::vector<Vec4> grad(nf, Vec4::Zero());
  for (int f = 0; f < nf; ++f) {
    const FaceTri& tri = mesh.faces()[f];
    const Vec4& p0 = mesh.position(tri[0]);
    const Vec4& e1 = geom.face_e1[f];
    const Vec4& e2 = geom.face_e2[f];
    // 2D coordinates of the triangle in its own frame.
    Mat2 J;
    const Vec4 d1 = mesh.position(tri[1]) - p0;
    const Vec4 d2 = mesh.position(tri[2]) - p0;
    J << d1.dot(e1), d1.dot(e2), d2.dot(e1), d2.dot(e2);
    const Vec2 dv(values[tri[1]] - values[tri[0]], values[tri[2]] - values[tri[0]]);
    const double det = J.determinant();
    if (std::abs(det) < 1e-300) continue;
    const Vec2 gl = J.inverse().transpose() * dv;  // gradient in frame coordinates
    grad[f] = gl[0] * e1 + gl[1] * e2;
  }
  return grad;
}

std::vector<Vec4> vertex_gradient(const SurfaceMesh& mesh, const GeometryField& geom,
                                  const std::vector<double>& values) {
  const auto fgrad = face_gradient(mesh, geom, values);
  const int nv = mesh.vertex_count();
  std::vector<Vec4> out(nv, Vec4::Zero());
  std::vector<double> wsum(nv, 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceTri& tri = mesh.faces()[f];
    for (int k = 0; k < 3; ++k) {
      out[tri[k]] += geom.face_area[f] * fgrad[f];
      wsum[tri[k]] += geom.face_area[f];
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (wsum[v] > 0) out[v] /= wsum[v];
  }
  return out;
}

std::vector<int> interior_vertices(const SurfaceMesh& mesh, double margin_frac) {
  const int nv = mesh.vertex_count();
  std::vector<int> out;
  const auto& bdry = mesh.topology().boundary_vertices();
  if (bdry.empty()) {
    out.resize(nv);
    for (int v = 0; v < nv; ++v) out[v] = v;
    return out;
  }
  Vec4 centroid = Vec4::Zero();
  for (const Vec4& p : mesh.positions()) centroid += p;
  centroid /= std::max(1, nv);
  double radius = 0.0;
  for (const Vec4& p : mesh.positions()) radius = std::max(radius, (p - centroid).norm());
  const double margin = margin_frac * radius;

  for (int v = 0; v < nv; ++v) {
    if (mesh.topology().vertex_on_boundary(v)) continue;
    double d = std::numeric_limits<double>::infinity();
    for (int b : bdry) {
      d = std::min(d, (mesh.position(v) - mesh.position(b)).norm());
      if (d < margin) break;
    }
    if (d >= margin) out.push_back(v);
  }
  return out;
}

}  // namespace kf
