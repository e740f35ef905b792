#include "kf/singularity.hpp"

#include "kf/kahler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace kf {

std::string to_string(SingularityType t) {
  switch (t) {
    case SingularityType::I: return "I";
    case SingularityType::II: return "II";
    case SingularityType::Undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

struct WindowSup {
  double max_a2 = 0.0;
  double t_at_max = 0.0;
  int vertex = -1;
  bool any = false;
};

// sup of |A|^2 over snapshots with t in [t_lo, t_hi] and vertices inside
// B_rad(center). Ties resolved toward earliest time, then smallest vertex.
WindowSup window_sup(const FlowTrajectory& traj,
                     const std::vector<GeometryField>& geoms, double t_lo, double t_hi,
                     const Vec4& center, double rad) {
  WindowSup out;
  const double rad2 = rad * rad;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const Snapshot& snap = traj.snapshots[i];
    if (snap.t < t_lo - 1e-12 || snap.t > t_hi + 1e-12) continue;
    const GeometryField& g = geoms[i];
    for (int v = 0; v < snap.mesh.vertex_count(); ++v) {
      if (!g.interior(v)) continue;
      if ((snap.mesh.position(v) - center).squaredNorm() > rad2) continue;
      const double a2 = g.a2[v];
      const bool better =
          a2 > out.max_a2 + 1e-15 ||
          (std::abs(a2 - out.max_a2) <= 1e-15 && out.any &&
           (snap.t < out.t_at_max - 1e-15 ||
            (std::abs(snap.t - out.t_at_max) <= 1e-15 && v < out.vertex)));
      if (!out.any || better) {
        out.any = true;
        out.max_a2 = std::max(out.max_a2, a2);
        if (a2 >= out.max_a2 - 1e-15) {
          out.t_at_max = snap.t;
          out.vertex = v;
        }
      }
    }
  }
  return out;
}

}  // namespace

RescalingSequence select_rescaling(const FlowTrajectory& traj,
                                   const RescalingParams& params) {
  if (traj.snapshots.empty()) {
    throw std::invalid_argument("select_rescaling: empty trajectory");
  }
  if (params.count < 1 || params.sigma_grid < 2 || !(params.r0 > 0)) {
    throw std::invalid_argument("select_rescaling: bad parameters");
  }

  std::vector<GeometryField> geoms;
  geoms.reserve(traj.snapshots.size());
  for (const Snapshot& snap : traj.snapshots) geoms.push_back(geometry(snap.mesh));

  RescalingSequence seq;
  seq.params = params;
  seq.source = traj.config.scenario;

  const int n_snap = static_cast<int>(traj.snapshots.size());
  std::string first_error;
  for (int k = 0; k < params.count; ++k) {
    double r;
    double t_ref;
    if (params.mode == RescaleMode::FiniteTime) {
      r = params.r0 * std::pow(2.0, -k);
      t_ref = traj.t_final();
    } else {
      r = params.r0;
      const int idx = n_snap - 1 - (params.count - 1 - k) * params.at_infinity_stride;
      if (idx < 0) {
        first_error = "at-infinity schedule needs more snapshots";
        continue;
      }
      t_ref = traj.snapshots[idx].t;
    }

    // Brute-force sigma maximization over the grid of (0, r/2].
    double best_obj = -1.0;
    double best_sigma = 0.0;
    WindowSup best_sup;
    for (int i = 1; i <= params.sigma_grid; ++i) {
      const double sigma = 0.5 * r * static_cast<double>(i) / params.sigma_grid;
      const double t_lo = t_ref - (r - sigma) * (r - sigma);
      const WindowSup sup =
          window_sup(traj, geoms, t_lo, t_ref, params.center, r - sigma);
      if (!sup.any) continue;
      const double obj = sigma * sigma * sup.max_a2;
      if (obj > best_obj + 1e-15) {
        best_obj = obj;
        best_sigma = sigma;
        best_sup = sup;
      }
    }
    if (best_obj <= 0.0 || !best_sup.any || best_sup.max_a2 <= 0.0) {
      if (first_error.empty()) {
        first_error = "no blow-up in window (k = " + std::to_string(k) + ")";
      }
      continue;
    }

    RescalingEntry entry;
    entry.r = r;
    entry.sigma = best_sigma;
    entry.t_k = best_sup.t_at_max;
    entry.vertex = best_sup.vertex;
    entry.lambda = std::sqrt(best_sup.max_a2);
    // X_k from the snapshot where the max was attained.
    for (const Snapshot& snap : traj.snapshots) {
      if (std::abs(snap.t - entry.t_k) <= 1e-15) {
        entry.X_k = snap.mesh.position(entry.vertex);
        break;
      }
    }
    seq.entries.push_back(std::move(entry));
  }

  if (seq.entries.size() < 2) {
    throw std::runtime_error("insufficient sequence: " +
                             (first_error.empty() ? std::string("fewer than 2 valid entries")
                                                  : first_error));
  }
  return seq;
}

void rescale(const FlowTrajectory& traj, RescalingSequence& seq) {
  for (RescalingEntry& entry : seq.entries) {
    entry.stack.clear();
    const double lambda = entry.lambda;
    const double s_min = -lambda * lambda * entry.sigma * entry.sigma / 4.0;
    const double t_lo = entry.t_k + s_min / (lambda * lambda);

    for (const Snapshot& snap : traj.snapshots) {
      if (snap.t < t_lo - 1e-12 || snap.t > entry.t_k + 1e-12) continue;
      std::vector<Vec4> pos(snap.mesh.vertex_count());
      for (int v = 0; v < snap.mesh.vertex_count(); ++v) {
        pos[v] = lambda * (snap.mesh.position(v) - entry.X_k);
      }
      Snapshot rescaled;
      rescaled.t = lambda * lambda * (snap.t - entry.t_k);
      rescaled.mesh = snap.mesh.with_positions(std::move(pos));
      rescaled.summary = snap.summary;
      rescaled.summary.t = rescaled.t;
      entry.stack.push_back(std::move(rescaled));
    }
    if (entry.stack.empty()) {
      throw std::runtime_error("rescale: no snapshots in the s-window");
    }

    // Normalization readout on the rescaled stack: |A_k|(0, 0) = 1 and
    // |A_k|^2 <= 4 over the selection ball (radius lambda sigma / 2).
    const Snapshot& last = entry.stack.back();
    const GeometryField g0 = geometry(last.mesh);
    entry.a2_at_marked = g0.a2[entry.vertex];

    const double ball = lambda * entry.sigma / 2.0;
    double max_a2 = 0.0;
    for (const Snapshot& snap : entry.stack) {
      const GeometryField g = geometry(snap.mesh);
      for (int v = 0; v < snap.mesh.vertex_count(); ++v) {
        if (!g.interior(v)) continue;
        if (snap.mesh.position(v).norm() > ball) continue;
        max_a2 = std::max(max_a2, g.a2[v]);
      }
    }
    entry.max_a2_window = max_a2;
    entry.normalization_ok = std::abs(std::sqrt(entry.a2_at_marked) - 1.0) <= seq.params.norm_tol &&
                             max_a2 <= 4.0 + seq.params.norm_tol;
  }
}

namespace {

SurfaceMesh restrict_to_ball(const SurfaceMesh& mesh, double radius) {
  std::vector<int> faces;
  const double r2 = radius * radius;
  for (int f = 0; f < mesh.face_count(); ++f) {
    if (mesh.face_barycenter(f).squaredNorm() <= r2) faces.push_back(f);
  }
  // Compact the vertex set.
  std::vector<int> remap(mesh.vertex_count(), -1);
  std::vector<Vec4> pos;
  std::vector<FaceTri> out_faces;
  for (int f : faces) {
    FaceTri tri = mesh.faces()[f];
    for (int k = 0; k < 3; ++k) {
      if (remap[tri[k]] < 0) {
        remap[tri[k]] = static_cast<int>(pos.size());
        pos.push_back(mesh.position(tri[k]));
      }
      tri[k] = remap[tri[k]];
    }
    out_faces.push_back(tri);
  }
  return SurfaceMesh(std::move(pos), std::move(out_faces), BoundaryPolicy::PinnedBoundary);
}

double point_triangle_distance(const Vec4& p, const Vec4& a, const Vec4& b, const Vec4& c) {
  // Barycentric projection onto the triangle plane, clamped to the triangle.
  const Vec4 ab = b - a;
  const Vec4 ac = c - a;
  const Vec4 ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  const double a11 = ab.squaredNorm(), a12 = ab.dot(ac), a22 = ac.squaredNorm();
  const double det = a11 * a22 - a12 * a12;
  double u = 0, v = 0;
  if (det > 1e-300) {
    u = (a22 * d1 - a12 * d2) / det;
    v = (a11 * d2 - a12 * d1) / det;
  }
  if (u >= 0 && v >= 0 && u + v <= 1) {
    return (p - (a + u * ab + v * ac)).norm();
  }
  // Closest point on one of the edges.
  auto seg = [&](const Vec4& s0, const Vec4& s1) {
    const Vec4 d = s1 - s0;
    const double len2 = d.squaredNorm();
    const double tt = len2 > 0 ? std::clamp((p - s0).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (s0 + tt * d)).norm();
  };
  return std::min({seg(a, b), seg(b, c), seg(a, c)});
}

double one_sided_hausdorff(const SurfaceMesh& from, const SurfaceMesh& to) {
  double worst = 0.0;
  for (const Vec4& p : from.positions()) {
    double best = std::numeric_limits<double>::infinity();
    for (const FaceTri& tri : to.faces()) {
      best = std::min(best, point_triangle_distance(p, to.position(tri[0]),
                                                    to.position(tri[1]),
                                                    to.position(tri[2])));
      if (best == 0.0) break;
    }
    if (std::isfinite(best)) worst = std::max(worst, best);
  }
  return worst;
}

double normal_deviation(const SurfaceMesh& from, const GeometryField& gf,
                        const SurfaceMesh& to, const GeometryField& gt) {
  // Mean Frobenius gap between tangent projectors at nearest vertices.
  double total = 0.0;
  int count = 0;
  for (int v = 0; v < from.vertex_count(); ++v) {
    double best = std::numeric_limits<double>::infinity();
    int best_w = -1;
    for (int w = 0; w < to.vertex_count(); ++w) {
      const double d = (from.position(v) - to.position(w)).squaredNorm();
      if (d < best) {
        best = d;
        best_w = w;
      }
    }
    if (best_w < 0) continue;
    const Mat4 pa = gf.vert_e1[v] * gf.vert_e1[v].transpose() +
                    gf.vert_e2[v] * gf.vert_e2[v].transpose();
    const Mat4 pb = gt.vert_e1[best_w] * gt.vert_e1[best_w].transpose() +
                    gt.vert_e2[best_w] * gt.vert_e2[best_w].transpose();
    total += (pa - pb).norm();
    ++count;
  }
  return count > 0 ? total / count : 0.0;
}

}  // namespace

LimitExtraction extract_limit(const RescalingSequence& seq, double radius,
                              double conv_tol) {
  std::vector<const RescalingEntry*> usable;
  for (const RescalingEntry& e : seq.entries) {
    if (e.stack.empty()) continue;
    const SurfaceMesh& final_mesh = e.stack.back().mesh;
    bool intersects = false;
    for (const Vec4& p : final_mesh.positions()) {
      if (p.norm() <= radius) {
        intersects = true;
        break;
      }
    }
    if (intersects) usable.push_back(&e);
  }
  if (usable.size() < 3) {
    throw std::runtime_error("extract_limit: need >= 3 entries intersecting the ball");
  }

  std::vector<SurfaceMesh> restrictions;
  restrictions.reserve(usable.size());
  for (const RescalingEntry* e : usable) {
    restrictions.push_back(restrict_to_ball(e->stack.back().mesh, radius));
  }

  LimitExtraction out{restrictions.back(), {}, false, radius};
  for (std::size_t i = 0; i + 1 < restrictions.size(); ++i) {
    const GeometryField ga = geometry(restrictions[i]);
    const GeometryField gb = geometry(restrictions[i + 1]);
    const double h = one_sided_hausdorff(restrictions[i], restrictions[i + 1]);
    const double nd = normal_deviation(restrictions[i], ga, restrictions[i + 1], gb);
    out.gauges.push_back(h + nd);
  }
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < out.gauges.size(); ++i) {
    if (out.gauges[i + 1] > out.gauges[i] + 1e-12) decreasing = false;
  }
  out.converged = decreasing && !out.gauges.empty() && out.gauges.back() < conv_tol;
  return out;
}

TypeVerdict classify_type(const FlowTrajectory& traj, double t_hat,
                          const TypeVerdictOptions& opts) {
  TypeVerdict out;
  for (const Snapshot& snap : traj.snapshots) {
    if (snap.t >= t_hat) continue;
    out.t.push_back(snap.t);
    out.m.push_back((t_hat - snap.t) * snap.summary.max_a2);
  }
  const int n = static_cast<int>(out.m.size());
  if (n < 5) {
    throw std::invalid_argument("classify_type: need >= 5 snapshots before t_hat");
  }

  // Median of the first half as the early reference scale.
  std::vector<double> early(out.m.begin(), out.m.begin() + n / 2);
  std::nth_element(early.begin(), early.begin() + early.size() / 2, early.end());
  out.early_median = early[early.size() / 2];
  out.final_m = out.m.back();

  const int begin = std::max(0, n - std::max(5, static_cast<int>(opts.window_frac * n)));
  double st = 0, sy = 0, stt = 0, sty = 0;
  const int m_count = n - begin;
  for (int i = begin; i < n; ++i) {
    st += out.t[i];
    sy += out.m[i];
    stt += out.t[i] * out.t[i];
    sty += out.t[i] * out.m[i];
  }
  const double det = m_count * stt - st * st;
  const double slope = det != 0 ? (m_count * sty - st * sy) / det : 0.0;
  out.trailing_slope = slope * (t_hat - out.t[begin]);

  double window_max = 0.0;
  for (int i = begin; i < n; ++i) window_max = std::max(window_max, out.m[i]);

  const bool bounded = out.early_median <= 0
                           ? true
                           : window_max <= opts.ratio_tol * out.early_median;
  if (bounded && std::abs(out.trailing_slope) <= opts.slope_tol) {
    out.type = SingularityType::I;
  } else if (!bounded && out.trailing_slope > opts.slope_tol) {
    out.type = SingularityType::II;
  } else {
    out.type = SingularityType::Undetermined;
  }
  return out;
}

BlowupReport verify_limit(const SurfaceMesh& limit, const VerifyOptions& opts) {
  if (limit.vertex_count() == 0 || limit.face_count() == 0) {
    throw std::invalid_argument("verify_limit: empty limit mesh");
  }
  BlowupReport report;
  report.mode = opts.mode;

  const GeometryField geom = geometry(limit);
  const ComplexStructure J0 = standard_structure();
  AngleField angles = kahler_angle(limit, geom, J0);

  // Residuals over the interior region, away from the truncation rim.
  std::vector<int> interior = interior_vertices(limit, opts.interior_margin);
  if (interior.empty()) {
    for (int v = 0; v < limit.vertex_count(); ++v) {
      if (geom.interior(v)) interior.push_back(v);
    }
  }

  double max_h = 0.0, max_a2 = 0.0;
  double min_k = std::numeric_limits<double>::infinity();
  double max_k = -std::numeric_limits<double>::infinity();
  for (int v : interior) {
    if (!geom.interior(v)) continue;
    max_h = std::max(max_h, geom.mean_curvature[v].norm());
    max_a2 = std::max(max_a2, geom.a2[v]);
    min_k = std::min(min_k, geom.gauss[v]);
    max_k = std::max(max_k, geom.gauss[v]);
  }
  report.max_mean_curvature = max_h;
  report.max_a2 = max_a2;
  report.min_gauss = std::isfinite(min_k) ? min_k : 0.0;
  report.max_gauss = std::isfinite(max_k) ? max_k : 0.0;
  report.minimal = max_h <= 0.25;  // residual threshold in rescaled units
  report.curvature_window_ok = report.min_gauss >= -2.0 - opts.curvature_tol &&
                               report.max_gauss <= opts.curvature_tol;
  report.nontrivial = max_a2 >= opts.nontrivial_a2;

  // |A| at the vertex nearest the origin of the rescaled coordinates.
  {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int v = 0; v < limit.vertex_count(); ++v) {
      const double d = limit.position(v).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
    report.a2_at_origin = geom.a2[best];
  }

  if (opts.mode == VerifyMode::Symplectic) {
    double min_cos = std::numeric_limits<double>::infinity();
    double max_cos = -std::numeric_limits<double>::infinity();
    double sum_cos = 0.0;
    std::vector<char> keep_face(limit.face_count(), 0);
    int kept = 0;
    // Faces whose vertices are all interior.
    {
      std::vector<char> interior_mask(limit.vertex_count(), 0);
      for (int v : interior) interior_mask[v] = 1;
      for (int f = 0; f < limit.face_count(); ++f) {
        const FaceTri& tri = limit.faces()[f];
        if (interior_mask[tri[0]] && interior_mask[tri[1]] && interior_mask[tri[2]]) {
          keep_face[f] = 1;
          ++kept;
        }
      }
      if (kept == 0) {
        for (int f = 0; f < limit.face_count(); ++f) keep_face[f] = 1;
        kept = limit.face_count();
      }
    }
    for (int f = 0; f < limit.face_count(); ++f) {
      if (!keep_face[f]) continue;
      const double c = angles.face_cos_alpha[f];
      min_cos = std::min(min_cos, c);
      max_cos = std::max(max_cos, c);
      sum_cos += c;
    }
    report.holomorphicity_gap = 1.0 - min_cos;
    report.cos_alpha_spread = max_cos - min_cos;
    report.cos_alpha_level = sum_cos / kept;
    if (report.cos_alpha_spread < opts.spread_tol && report.cos_alpha_level > 0.0 &&
        report.cos_alpha_level < 1.0 - opts.spread_tol) {
      const RotatedStructure rot = rotate_structure(std::min(1.0, report.cos_alpha_level));
      const std::vector<double> normalized = normalized_face_angle(limit, geom, rot);
      double err = 0.0;
      for (int f = 0; f < limit.face_count(); ++f) {
        if (keep_face[f]) err = std::max(err, std::abs(1.0 - normalized[f]));
      }
      report.jstar_reported = true;
      report.jstar_angle_error = err;
    }
  } else {
    lagrangian_angle(limit, geom, standard_volume_form(), angles,
                     opts.beta_cos_alpha_tol);
    double mean_beta = 0.0;
    for (double b : angles.face_beta) mean_beta += b;
    mean_beta /= std::max<std::size_t>(1, angles.face_beta.size());
    double spread = 0.0;
    for (double b : angles.face_beta) spread = std::max(spread, std::abs(b - mean_beta));
    report.beta_spread = spread;
  }

  // Structure equation (e1) on vertices away from the holomorphic locus.
  {
    const std::vector<double> lap = cotan_laplacian(limit, geom, angles.vert_cos_alpha);
    double l2 = 0.0, wsum = 0.0, worst = 0.0;
    int used = 0;
    for (int v : interior) {
      if (!geom.interior(v) || !angles.vert_grad_alpha_valid[v]) continue;
      const double c = angles.vert_cos_alpha[v];
      const double r = -lap[v] - 2.0 * angles.vert_grad_alpha_sq[v] * c;
      l2 += geom.dual_area[v] * r * r;
      wsum += geom.dual_area[v];
      worst = std::max(worst, std::abs(r));
      ++used;
    }
    report.e1_residual_l2 = wsum > 0 ? std::sqrt(l2 / wsum) : 0.0;
    report.e1_residual_max = worst;
    report.e1_vertices = used;
  }

  // Quantization via Gauss-Bonnet truncations.
  {
    double extent = 0.0;
    for (const Vec4& p : limit.positions()) extent = std::max(extent, p.norm());
    std::vector<double> radii;
    for (double frac : {0.45, 0.6, 0.75, 0.9}) radii.push_back(frac * extent);
    report.quantization = quantization_estimate(limit, Vec4::Zero(), radii);
  }

  // Components and the simplicity ratio sup rho(x, y) / |x - y|.
  {
    double extent = 0.0;
    for (const Vec4& p : limit.positions()) extent = std::max(extent, p.norm());
    const auto comps = components_in_ball(limit, Vec4::Zero(), 2.0 * extent + 1e-9);
    for (const auto& comp : comps) {
      ComponentCheck check;
      check.faces = static_cast<int>(comp.size());
      std::set<int> verts;
      for (int f : comp) {
        for (int k = 0; k < 3; ++k) verts.insert(limit.faces()[f][k]);
      }
      std::vector<int> vlist(verts.begin(), verts.end());
      const int stride =
          std::max<std::size_t>(1, vlist.size() / opts.simplicity_samples);
      std::vector<int> sampled;
      for (std::size_t i = 0; i < vlist.size(); i += stride) sampled.push_back(vlist[i]);
      double worst = 0.0;
      for (std::size_t i = 0; i < sampled.size(); ++i) {
        for (std::size_t j = i + 1; j < sampled.size(); ++j) {
          const double ext = (limit.position(sampled[i]) - limit.position(sampled[j])).norm();
          if (ext < 1e-12) continue;
          const auto rho = intrinsic_distance(limit, sampled[i], sampled[j]);
          if (rho) worst = std::max(worst, *rho / ext);
        }
      }
      check.simplicity_ratio = worst;
      report.components.push_back(check);
    }
  }

  // Area-ratio boundedness.
  {
    bool ok = true;
    for (double R : {1.0, 2.0, 4.0, 8.0}) {
      const double ratio = area_ratio(limit, Vec4::Zero(), R);
      report.area_ratios.push_back(ratio);
      if (ratio > 4.0 * std::numbers::pi * 1.1) ok = false;
    }
    report.area_ratio_bounded = ok;
  }

  return report;
}

double integral_curvature_window(const FlowTrajectory& traj, const Vec4& X0, double r) {
  if (!(r > 0)) throw std::invalid_argument("integral_curvature_window: r must be > 0");
  const double t_end = traj.t_final();
  const double t_lo = t_end - r * r;
  if (traj.t_begin() > t_lo + 1e-12) {
    throw std::runtime_error("integral_curvature_window: trajectory does not cover [t - r^2, t]");
  }

  std::vector<double> times;
  std::vector<double> spatial;  // int_{Sigma_t cap B_r} |A|^2 dmu at each time
  const double r2 = r * r;
  for (const Snapshot& snap : traj.snapshots) {
    if (snap.t < t_lo - 1e-12) continue;
    const GeometryField g = geometry(snap.mesh);
    double acc = 0.0;
    for (int v = 0; v < snap.mesh.vertex_count(); ++v) {
      if ((snap.mesh.position(v) - X0).squaredNorm() > r2) continue;
      acc += g.a2[v] * g.dual_area[v];
    }
    times.push_back(snap.t);
    spatial.push_back(acc);
  }
  if (times.size() < 2) {
    throw std::runtime_error("integral_curvature_window: not enough snapshots in window");
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    integral += 0.5 * (spatial[i] + spatial[i + 1]) * (times[i + 1] - times[i]);
  }
  return integral / r2;
}

}  // namespace kf
