#include "kf/kahler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kf {

namespace {

Form2 wedge(int i, int j) {
  Form2 w;
  w.m(i, j) = 1.0;
  w.m(j, i) = -1.0;
  return w;
}

double wrap_to_pi(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x < 0) x += two_pi;
  return x - std::numbers::pi;
}

}  // namespace

double ComplexStructure::complex_defect() const {
  return (J * J + Mat4::Identity()).norm();
}

ComplexStructure standard_structure() {
  ComplexStructure cs;
  cs.label = "standard";
  cs.J(kAxisY1, kAxisX1) = 1.0;
  cs.J(kAxisX1, kAxisY1) = -1.0;
  cs.J(kAxisY2, kAxisX2) = 1.0;
  cs.J(kAxisX2, kAxisY2) = -1.0;
  cs.omega.m = cs.J.transpose();  // w(u,v) = (J u) . v = u^T J^T v
  cs.orthogonality_defect = (cs.J.transpose() * cs.J - Mat4::Identity()).norm();
  return cs;
}

HolomorphicVolumeForm standard_volume_form() {
  // dz1 ^ dz2 = (dx1 ^ dx2 - dy1 ^ dy2) + i (dx1 ^ dy2 + dy1 ^ dx2)
  HolomorphicVolumeForm f;
  f.re.m = wedge(kAxisX1, kAxisX2).m - wedge(kAxisY1, kAxisY2).m;
  f.im.m = wedge(kAxisX1, kAxisY2).m + wedge(kAxisY1, kAxisX2).m;
  return f;
}

AngleField kahler_angle(const SurfaceMesh& mesh, const GeometryField& geom,
                        const ComplexStructure& J) {
  const int nf = mesh.face_count();
  const int nv = mesh.vertex_count();
  AngleField out;
  out.face_cos_alpha.resize(nf);
  for (int f = 0; f < nf; ++f) {
    out.face_cos_alpha[f] = J.omega(geom.face_e1[f], geom.face_e2[f]);
  }

  out.vert_cos_alpha.assign(nv, 0.0);
  {
    std::vector<double> wsum(nv, 0.0);
    for (int f = 0; f < nf; ++f) {
      const FaceTri& tri = mesh.faces()[f];
      for (int k = 0; k < 3; ++k) {
        out.vert_cos_alpha[tri[k]] += geom.face_area[f] * out.face_cos_alpha[f];
        wsum[tri[k]] += geom.face_area[f];
      }
    }
    for (int v = 0; v < nv; ++v) {
      if (wsum[v] > 0) out.vert_cos_alpha[v] /= wsum[v];
    }
  }

  out.min_cos_alpha = nf ? *std::min_element(out.face_cos_alpha.begin(),
                                             out.face_cos_alpha.end())
                         : 0.0;
  out.max_cos_alpha = nf ? *std::max_element(out.face_cos_alpha.begin(),
                                             out.face_cos_alpha.end())
                         : 0.0;

  out.vert_grad_cos_alpha = vertex_gradient(mesh, geom, out.vert_cos_alpha);
  out.vert_grad_alpha_sq.assign(nv, 0.0);
  out.vert_grad_alpha_valid.assign(nv, 0);
  for (int v = 0; v < nv; ++v) {
    const double c = out.vert_cos_alpha[v];
    const double sin_sq = 1.0 - c * c;
    if (sin_sq > out.sin_floor) {
      out.vert_grad_alpha_sq[v] = out.vert_grad_cos_alpha[v].squaredNorm() / sin_sq;
      out.vert_grad_alpha_valid[v] = 1;
    }
  }
  return out;
}

void lagrangian_angle(const SurfaceMesh& mesh, const GeometryField& geom,
                      const HolomorphicVolumeForm& form, AngleField& angles,
                      double cos_alpha_tol, double modulus_tol) {
  const int nf = mesh.face_count();
  for (int f = 0; f < nf; ++f) {
    if (std::abs(angles.face_cos_alpha[f]) > cos_alpha_tol) {
      throw std::invalid_argument(
          "lagrangian_angle: mesh is not Lagrangian (|cos alpha| = " +
          std::to_string(std::abs(angles.face_cos_alpha[f])) + " on face " +
          std::to_string(f) + ")");
    }
  }

  angles.face_beta_raw.resize(nf);
  angles.face_branch_flag.assign(nf, 0);
  for (int f = 0; f < nf; ++f) {
    const std::complex<double> w = form(geom.face_e1[f], geom.face_e2[f]);
    if (std::abs(std::abs(w) - 1.0) > modulus_tol) {
      throw std::invalid_argument("angle undefined: |Omega(e1,e2)| != 1 (got " +
                                  std::to_string(std::abs(w)) + " on face " +
                                  std::to_string(f) + ")");
    }
    angles.face_beta_raw[f] = std::arg(w);
  }

  // Unwrap along a BFS spanning tree of the face adjacency graph, then scan
  // the cross edges for 2pi winding defects.
  const MeshTopology& topo = mesh.topology();
  angles.face_beta.assign(nf, 0.0);
  std::vector<char> seen(nf, 0);
  std::vector<char> tree_edge(topo.edges().size(), 0);
  std::vector<int> order;
  order.reserve(nf);
  for (int seed = 0; seed < nf; ++seed) {
    if (seen[seed]) continue;
    seen[seed] = 1;
    angles.face_beta[seed] = angles.face_beta_raw[seed];
    std::vector<int> queue{seed};
    std::size_t head = 0;
    while (head < queue.size()) {
      const int f = queue[head++];
      for (int k = 0; k < 3; ++k) {
        const int eid = topo.face_edges()[f][k];
        if (eid < 0) continue;
        const auto& e = topo.edges()[eid];
        const int other = (e.f0 == f) ? e.f1 : e.f0;
        if (other < 0 || seen[other]) continue;
        seen[other] = 1;
        tree_edge[eid] = 1;
        angles.face_beta[other] =
            angles.face_beta[f] + wrap_to_pi(angles.face_beta_raw[other] - angles.face_beta_raw[f]);
        queue.push_back(other);
      }
    }
  }

  angles.winding_defect_edges = 0;
  for (std::size_t eid = 0; eid < topo.edges().size(); ++eid) {
    const auto& e = topo.edges()[eid];
    if (e.f1 < 0 || tree_edge[eid]) continue;
    const double jump = angles.face_beta[e.f1] - angles.face_beta[e.f0] -
                        wrap_to_pi(angles.face_beta_raw[e.f1] - angles.face_beta_raw[e.f0]);
    const long defect = std::lround(jump / (2.0 * std::numbers::pi));
    if (defect != 0) {
      ++angles.winding_defect_edges;
      angles.face_branch_flag[e.f0] = 1;
      angles.face_branch_flag[e.f1] = 1;
    }
  }
  angles.mean_curvature_form_exact = angles.winding_defect_edges == 0;

  const int nv = mesh.vertex_count();
  angles.vert_beta.assign(nv, 0.0);
  std::vector<double> wsum(nv, 0.0);
  for (int f = 0; f < nf; ++f) {
    const FaceTri& tri = mesh.faces()[f];
    for (int k = 0; k < 3; ++k) {
      angles.vert_beta[tri[k]] += geom.face_area[f] * angles.face_beta[f];
      wsum[tri[k]] += geom.face_area[f];
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (wsum[v] > 0) angles.vert_beta[v] /= wsum[v];
  }

  angles.beta_min = *std::min_element(angles.face_beta.begin(), angles.face_beta.end());
  angles.beta_max = *std::max_element(angles.face_beta.begin(), angles.face_beta.end());
  angles.min_cos_beta = 1.0;
  for (double b : angles.face_beta) {
    angles.min_cos_beta = std::min(angles.min_cos_beta, std::cos(b));
  }
  angles.has_beta = true;
}

double winding_along(const AngleField& angles, std::span<const int> face_loop) {
  if (!angles.has_beta || face_loop.size() < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < face_loop.size(); ++i) {
    const int a = face_loop[i];
    const int b = face_loop[(i + 1) % face_loop.size()];
    total += wrap_to_pi(angles.face_beta_raw[b] - angles.face_beta_raw[a]);
  }
  return total / (2.0 * std::numbers::pi);
}

std::string to_string(SurfaceClass c) {
  switch (c) {
    case SurfaceClass::Symplectic: return "symplectic";
    case SurfaceClass::Lagrangian: return "lagrangian";
    case SurfaceClass::AlmostCalibrated: return "almost-calibrated";
    case SurfaceClass::None: return "none";
  }
  return "none";
}

Classification classify(const SurfaceMesh& mesh, const AngleField& angles,
                        const ClassifyTolerances& tol) {
  (void)mesh;
  Classification out;
  if (angles.min_cos_alpha >= tol.eps_symplectic) {
    out.cls = SurfaceClass::Symplectic;
    out.eps0 = angles.min_cos_alpha;
    return out;
  }
  const double max_abs = std::max(std::abs(angles.min_cos_alpha),
                                  std::abs(angles.max_cos_alpha));
  if (max_abs <= tol.eps_lagrangian) {
    out.cls = SurfaceClass::Lagrangian;
    if (angles.has_beta && angles.min_cos_beta > 0.0) {
      out.cls = SurfaceClass::AlmostCalibrated;
      out.delta0 = angles.min_cos_beta;
    }
    return out;
  }
  out.cls = SurfaceClass::None;
  return out;
}

EdgeFormResidual mean_curvature_form_residual(const SurfaceMesh& mesh,
                                              const GeometryField& geom,
                                              const AngleField& angles,
                                              const ComplexStructure& J) {
  if (!angles.has_beta) {
    throw std::invalid_argument("mean_curvature_form_residual: beta channel missing");
  }
  const MeshTopology& topo = mesh.topology();
  EdgeFormResidual out;
  double num = 0.0, num_scaled = 0.0, den = 0.0;

  // Per-edge vertex values of beta from a patch-local unwrap around the edge,
  // so the residual is immune to the global branch structure (the one-form
  // d(beta) is well defined even when beta itself winds).
  const auto& vf_off = topo.vertex_face_offsets();
  const auto& vf = topo.vertex_faces();
  for (const auto& e : topo.edges()) {
    if (e.f0 < 0 || e.f1 < 0) continue;
    if (angles.face_branch_flag[e.f0] || angles.face_branch_flag[e.f1]) continue;
    const Vec4 seg = mesh.position(e.b) - mesh.position(e.a);
    const double len = seg.norm();
    if (len <= 0) continue;

    const int ref = e.f0;
    auto local_vertex_beta = [&](int v) {
      double acc = 0.0, wsum = 0.0;
      for (int i = vf_off[v]; i < vf_off[v + 1]; ++i) {
        const int f = vf[i];
        const double local = angles.face_beta_raw[ref] +
                             wrap_to_pi(angles.face_beta_raw[f] - angles.face_beta_raw[ref]);
        acc += geom.face_area[f] * local;
        wsum += geom.face_area[f];
      }
      return wsum > 0 ? acc / wsum : angles.face_beta_raw[ref];
    };

    const Vec4 h_mid = 0.5 * (geom.mean_curvature[e.a] + geom.mean_curvature[e.b]);
    const double lhs = local_vertex_beta(e.b) - local_vertex_beta(e.a);
    const double rhs = J.omega(h_mid, seg);
    const double r = lhs - rhs;
    num += len * r * r;
    num_scaled += len * (r / len) * (r / len);
    den += len;
    out.max_abs = std::max(out.max_abs, std::abs(r));
    ++out.edges_used;
  }
  if (den > 0) {
    out.l2 = std::sqrt(num / den);
    out.l2_per_length = std::sqrt(num_scaled / den);
  }
  return out;
}

RotatedStructure rotate_structure(double theta0) {
  if (!(theta0 > 0.0) || theta0 > 1.0) {
    throw std::domain_error("rotate_structure: theta0 must lie in (0, 1]");
  }
  RotatedStructure out;
  out.theta0 = theta0;
  Mat4& J = out.cs.J;
  J.setZero();
  J(kAxisY1, kAxisX1) = theta0;
  J(kAxisX1, kAxisY1) = -1.0 / theta0;
  J(kAxisY2, kAxisX2) = 1.0 / theta0;
  J(kAxisX2, kAxisY2) = -theta0;
  out.cs.omega.m = J.transpose();
  out.cs.label = "rotated";
  out.cs.orthogonality_defect = (J.transpose() * J - Mat4::Identity()).norm();
  const ComplexStructure std_cs = standard_structure();
  out.kahler_form.m = std_cs.omega.m / theta0;
  return out;
}

std::vector<double> normalized_face_angle(const SurfaceMesh& mesh,
                                          const GeometryField& geom,
                                          const RotatedStructure& rot) {
  std::vector<double> out(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    out[f] = rot.kahler_form(geom.face_e1[f], geom.face_e2[f]);
  }
  return out;
}

}  // namespace kf
