#include "kf/flow.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kf {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::TEnd: return "t_end";
    case Termination::BlowupThreshold: return "blow-up-threshold";
    case Termination::MeshFailure: return "mesh-failure";
  }
  return "t_end";
}

void FlowConfig::validate() const {
  if (!(cfl_safety > 0.0) || cfl_safety > 1.0) {
    throw std::invalid_argument("FlowConfig: cfl_safety must lie in (0, 1]");
  }
  if (dt_policy == DtPolicy::Fixed && !(fixed_dt > 0.0)) {
    throw std::invalid_argument("FlowConfig: fixed_dt must be > 0");
  }
  if (!(blowup_factor > 0.0) && !(a2_stop_absolute > 0.0)) {
    throw std::invalid_argument("FlowConfig: blow-up threshold must be > 0");
  }
  if (snapshot_stride < 1) {
    throw std::invalid_argument("FlowConfig: snapshot_stride must be >= 1");
  }
}

double cfl_dt(const SurfaceMesh& mesh, double safety) {
  if (!(safety > 0.0) || safety > 1.0) {
    throw std::invalid_argument("cfl_dt: safety must lie in (0, 1]");
  }
  double min_len2 = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.topology().edges()) {
    min_len2 = std::min(min_len2, (mesh.position(e.a) - mesh.position(e.b)).squaredNorm());
  }
  if (!std::isfinite(min_len2) || min_len2 <= 0.0) {
    throw std::invalid_argument("cfl_dt: degenerate mesh (zero-length edge or no edges)");
  }
  return safety * min_len2 / 4.0;
}

namespace {

std::vector<Vec4> explicit_rk2_positions(const SurfaceMesh& mesh, double dt) {
  const GeometryField g1 = geometry(mesh);
  const int nv = mesh.vertex_count();
  std::vector<Vec4> half(nv);
  for (int v = 0; v < nv; ++v) {
    half[v] = mesh.position(v);
    if (!mesh.vertex_pinned(v)) half[v] += 0.5 * dt * g1.mean_curvature[v];
  }
  const SurfaceMesh mid = mesh.with_positions(std::move(half));
  const GeometryField g2 = geometry(mid);
  std::vector<Vec4> out(nv);
  for (int v = 0; v < nv; ++v) {
    out[v] = mesh.position(v);
    if (!mesh.vertex_pinned(v)) out[v] += dt * g2.mean_curvature[v];
  }
  return out;
}

// Backward Euler on the frozen-metric Laplacian: (M + dt S) x' = M x, with the
// cotangent stiffness S and lumped mass M assembled from the current mesh.
// Pinned vertices are eliminated into the right-hand side.
std::vector<Vec4> semi_implicit_positions(const SurfaceMesh& mesh, double dt) {
  const GeometryField g = geometry(mesh);
  const MeshTopology& topo = mesh.topology();
  const int nv = mesh.vertex_count();

  std::vector<int> index(nv, -1);
  std::vector<int> free_list;
  for (int v = 0; v < nv; ++v) {
    if (!mesh.vertex_pinned(v)) {
      index[v] = static_cast<int>(free_list.size());
      free_list.push_back(v);
    }
  }
  const int n = static_cast<int>(free_list.size());
  if (n == 0) return mesh.positions();

  std::vector<double> weight(topo.edges().size(), 0.0);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceTri& tri = topo.faces()[f];
    const Vec4* p[3] = {&mesh.position(tri[0]), &mesh.position(tri[1]),
                        &mesh.position(tri[2])};
    for (int k = 0; k < 3; ++k) {
      const int eid = topo.face_edges()[f][k];
      if (eid < 0) continue;
      const int opp = (k + 2) % 3;
      const Vec4 u = *p[(opp + 1) % 3] - *p[opp];
      const Vec4 w = *p[(opp + 2) % 3] - *p[opp];
      const double cross = 2.0 * g.face_area[f];
      weight[eid] += cross > 0 ? u.dot(w) / cross : 0.0;
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(free_list.size() * 8);
  Eigen::MatrixX4d rhs = Eigen::MatrixX4d::Zero(n, 4);
  for (int i = 0; i < n; ++i) {
    const int v = free_list[i];
    trip.emplace_back(i, i, g.dual_area[v]);
    rhs.row(i) = g.dual_area[v] * mesh.position(v).transpose();
  }
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const auto& edge = topo.edges()[e];
    const double w = 0.5 * dt * weight[e];
    const int ia = index[edge.a];
    const int ib = index[edge.b];
    if (ia >= 0) trip.emplace_back(ia, ia, w);
    if (ib >= 0) trip.emplace_back(ib, ib, w);
    if (ia >= 0 && ib >= 0) {
      trip.emplace_back(ia, ib, -w);
      trip.emplace_back(ib, ia, -w);
    } else if (ia >= 0) {
      rhs.row(ia) += w * mesh.position(edge.b).transpose();
    } else if (ib >= 0) {
      rhs.row(ib) += w * mesh.position(edge.a).transpose();
    }
  }

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) {
    throw MeshFailure("semi-implicit solve: factorization failed");
  }
  const Eigen::MatrixX4d sol = solver.solve(rhs);

  std::vector<Vec4> out = mesh.positions();
  for (int i = 0; i < n; ++i) out[free_list[i]] = sol.row(i).transpose();
  return out;
}

SnapshotSummary summarize(double t, const SurfaceMesh& mesh, const GeometryField& geom,
                          const FlowConfig& config, bool remesh_event) {
  SnapshotSummary s;
  s.t = t;
  s.area = geom.total_area;
  s.max_a2 = geom.max_a2();
  s.max_mean_curvature = geom.max_mean_curvature_norm();
  const AngleField angles = kahler_angle(mesh, geom, standard_structure());
  s.min_cos_alpha = angles.min_cos_alpha;
  s.remesh_event = remesh_event;
  if (config.track_beta) {
    AngleField beta_field = angles;
    try {
      lagrangian_angle(mesh, geom, standard_volume_form(), beta_field,
                       config.beta_cos_alpha_tol);
      s.has_beta = true;
      s.beta_min = beta_field.beta_min;
      s.beta_max = beta_field.beta_max;
    } catch (const std::invalid_argument&) {
      s.has_beta = false;  // drifted off the Lagrangian locus; range not defined
    }
  }
  return s;
}

}  // namespace

SurfaceMesh step(const SurfaceMesh& mesh, double dt, const StepOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  std::vector<Vec4> next = opts.integrator == Integrator::Rk2Explicit
                               ? explicit_rk2_positions(mesh, dt)
                               : semi_implicit_positions(mesh, dt);
  SurfaceMesh out = mesh.with_positions(std::move(next));
  if (opts.check_validity) {
    const ValidationReport report = validate_mesh(out);
    if (!report.valid()) {
      throw MeshFailure("mesh invariant violated after step: " +
                        report.violations.front().message);
    }
  }
  return out;
}

FlowTrajectory run(const SurfaceMesh& mesh, const FlowConfig& config) {
  config.validate();
  FlowTrajectory traj;
  traj.config = config;

  SurfaceMesh current = mesh;
  double t = 0.0;
  GeometryField geom = geometry(current);
  const double initial_max_a2 = geom.max_a2();
  const double a2_stop = config.a2_stop_absolute > 0
                             ? config.a2_stop_absolute
                             : config.blowup_factor * std::max(initial_max_a2, 1e-300);

  traj.snapshots.push_back({t, current, summarize(t, current, geom, config, false)});

  StepOptions sopts;
  sopts.integrator = config.integrator;

  long step_count = 0;
  bool pending_remesh_event = false;
  while (t < config.t_end && step_count < config.max_steps) {
    double dt = config.dt_policy == DtPolicy::ExplicitCfl
                    ? cfl_dt(current, config.cfl_safety)
                    : config.fixed_dt;
    dt = std::min(dt, config.t_end - t);
    try {
      current = step(current, dt, sopts);
    } catch (const MeshFailure& failure) {
      traj.termination = Termination::MeshFailure;
      traj.failure_detail = failure.what();
      geom = geometry(current);
      traj.snapshots.push_back({t, current, summarize(t, current, geom, config, false)});
      return traj;
    }
    t += dt;
    ++step_count;

    if (config.remesh == RemeshPolicy::EdgeFlipSmooth && config.remesh_every > 0 &&
        step_count % config.remesh_every == 0) {
      RemeshResult rr = remesh(current);
      current = std::move(rr.mesh);
      pending_remesh_event = true;
    }

    const bool record = step_count % config.snapshot_stride == 0 || t >= config.t_end;
    if (!record) continue;

    geom = geometry(current);
    traj.snapshots.push_back(
        {t, current, summarize(t, current, geom, config, pending_remesh_event)});
    pending_remesh_event = false;

    if (geom.max_a2() >= a2_stop) {
      traj.termination = Termination::BlowupThreshold;
      return traj;
    }
  }
  traj.termination = Termination::TEnd;
  return traj;
}

ExtremaSeries track_extrema(const FlowTrajectory& traj, double tol_mp) {
  if (traj.snapshots.size() < 2) {
    throw std::invalid_argument("track_extrema: need at least 2 snapshots");
  }
  ExtremaSeries out;
  for (const Snapshot& s : traj.snapshots) {
    out.t.push_back(s.t);
    out.min_cos_alpha.push_back(s.summary.min_cos_alpha);
    out.max_a2.push_back(s.summary.max_a2);
    out.max_mean_curvature.push_back(s.summary.max_mean_curvature);
    out.area.push_back(s.summary.area);
  }
  for (std::size_t i = 1; i < out.t.size(); ++i) {
    const double dt = out.t[i] - out.t[i - 1];
    if (dt <= 0) continue;
    const double drop = out.min_cos_alpha[i - 1] - out.min_cos_alpha[i];
    out.worst_drop_rate = std::max(out.worst_drop_rate, drop / dt);
  }
  out.min_cos_alpha_monotone = out.worst_drop_rate <= tol_mp;
  return out;
}

SingularTimeEstimate estimate_singular_time(const FlowTrajectory& traj,
                                            double window_frac) {
  SingularTimeEstimate out;
  const auto& snaps = traj.snapshots;
  const int n = static_cast<int>(snaps.size());
  if (n < 5) {
    out.reason = "no blow-up detected: fewer than 5 snapshots";
    return out;
  }
  int begin = std::max(0, n - std::max(5, static_cast<int>(window_frac * n)));
  out.window_begin = begin;

  bool increasing = true;
  for (int i = begin + 1; i < n; ++i) {
    if (snaps[i].summary.max_a2 < snaps[i - 1].summary.max_a2 * (1.0 - 1e-9)) {
      increasing = false;
      break;
    }
  }
  if (!increasing || snaps[n - 1].summary.max_a2 <= snaps[begin].summary.max_a2 * 1.001) {
    out.reason = "no blow-up detected: max|A|^2 not increasing over the fit window";
    return out;
  }

  // Linear fit of y = 1/max|A|^2 against t.
  double st = 0, sy = 0, stt = 0, sty = 0;
  const int m = n - begin;
  for (int i = begin; i < n; ++i) {
    const double x = snaps[i].t;
    const double y = 1.0 / snaps[i].summary.max_a2;
    st += x;
    sy += y;
    stt += x * x;
    sty += x * y;
  }
  const double det = m * stt - st * st;
  if (std::abs(det) < 1e-300) {
    out.reason = "no blow-up detected: degenerate fit window";
    return out;
  }
  const double slope = (m * sty - st * sy) / det;
  const double intercept = (sy * stt - st * sty) / det;
  if (!(slope < 0)) {
    out.reason = "no blow-up detected: 1/max|A|^2 not decreasing";
    return out;
  }
  out.detected = true;
  out.slope = slope;
  out.r2_rate = 2.0 * slope;
  out.t_hat = -intercept / slope;
  double ss = 0;
  for (int i = begin; i < n; ++i) {
    const double y = 1.0 / snaps[i].summary.max_a2;
    const double r = y - (intercept + slope * snaps[i].t);
    ss += r * r;
  }
  out.residual_rms = std::sqrt(ss / m);
  return out;
}

}  // namespace kf
