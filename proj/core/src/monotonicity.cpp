#include "kf/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kf {

double backward_heat_kernel(const Vec4& X, const Vec4& X0, double t, double t0) {
  if (!(t < t0)) throw std::domain_error("backward_heat_kernel: requires t < t0");
  const double tau = t0 - t;
  const double arg = (X - X0).squaredNorm() / (4.0 * tau);
  if (arg > 700.0) return 0.0;  // underflow clamp
  return std::exp(-arg) / (4.0 * std::numbers::pi * tau);
}

namespace {

double vertex_weight(DensityWeight mode, const AngleField* angles, int v, double eps_sym) {
  switch (mode) {
    case DensityWeight::Unweighted:
      return 1.0;
    case DensityWeight::InvCosAlpha: {
      const double c = angles->vert_cos_alpha[v];
      if (c <= eps_sym) {
        throw std::runtime_error("weight singular: cos alpha <= eps_sym at vertex " +
                                 std::to_string(v));
      }
      return 1.0 / c;
    }
    case DensityWeight::BetaSquared: {
      const double b = angles->vert_beta[v];
      return b * b;
    }
  }
  return 1.0;
}

// Distance from X0 to the truncation rim, for the plane-comparison tail bound.
double boundary_clearance(const SurfaceMesh& mesh, const Vec4& X0) {
  const auto& bdry = mesh.topology().boundary_vertices();
  if (bdry.empty()) return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (int v : bdry) d = std::min(d, (mesh.position(v) - X0).norm());
  return d;
}

}  // namespace

DensityValue gaussian_density(const SurfaceMesh& mesh, const GeometryField& geom,
                              const AngleField* angles, double s, double s0,
                              const Vec4& X0, DensityWeight weight, double eps_sym) {
  if (!(s < s0)) throw std::domain_error("gaussian_density: requires s < s0");
  if (weight != DensityWeight::Unweighted && angles == nullptr) {
    throw std::invalid_argument("gaussian_density: weighted mode needs an angle field");
  }
  if (weight == DensityWeight::BetaSquared && (!angles || !angles->has_beta)) {
    throw std::invalid_argument("gaussian_density: beta channel missing");
  }
  const double tau = s0 - s;
  const double sigma = std::sqrt(tau);
  const int nv = mesh.vertex_count();

  DensityValue out;
  const double support_radius = 8.0 * sigma;

  // Vertex-lumped sums (serial accumulation keeps results deterministic).
  for (int v = 0; v < nv; ++v) {
    const double rho = backward_heat_kernel(mesh.position(v), X0, s, s0);
    if (rho == 0.0) continue;
    const double contribution = rho * geom.dual_area[v];
    out.unweighted += contribution;
    out.weighted += vertex_weight(weight, angles, v, eps_sym) * contribution;
  }

  // Face-midpoint quadrature of the same integrand estimates the lumping error.
  double mid_unweighted = 0.0;
  double max_edge_in_support = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec4 bary = mesh.face_barycenter(f);
    const double r = (bary - X0).norm();
    if (r > support_radius) continue;
    mid_unweighted += backward_heat_kernel(bary, X0, s, s0) * geom.face_area[f];
    const FaceTri& tri = mesh.faces()[f];
    for (int k = 0; k < 3; ++k) {
      const double len =
          (mesh.position(tri[k]) - mesh.position(tri[(k + 1) % 3])).norm();
      max_edge_in_support = std::max(max_edge_in_support, len);
    }
  }
  out.quad_error_est = std::abs(mid_unweighted - out.unweighted);
  out.under_resolved = max_edge_in_support > sigma;

  const double clearance = boundary_clearance(mesh, X0);
  if (std::isfinite(clearance)) {
    out.truncation_bias = std::exp(-std::min(700.0, clearance * clearance / (4.0 * tau)));
  }
  return out;
}

DensityTrace density_trace(const std::vector<Snapshot>& stack, double s0, const Vec4& X0,
                           const DensityTraceOptions& opts) {
  DensityTrace trace;
  trace.X0 = X0;
  trace.s0 = s0;
  trace.mode = opts.mode;

  const ComplexStructure J0 = standard_structure();
  const HolomorphicVolumeForm omega0 = standard_volume_form();

  double max_quad_err = 0.0;
  for (const Snapshot& snap : stack) {
    if (!(snap.t < s0)) continue;
    const double s = snap.t;
    const double tau = s0 - s;
    const GeometryField geom = geometry(snap.mesh);

    AngleField angles = kahler_angle(snap.mesh, geom, J0);
    if (opts.mode == DensityWeight::BetaSquared) {
      lagrangian_angle(snap.mesh, geom, omega0, angles, opts.beta_cos_alpha_tol);
    }
    const AngleField* angle_ptr =
        opts.mode == DensityWeight::Unweighted ? nullptr : &angles;

    DensityTraceSample sample;
    sample.s = s;
    const DensityValue value = gaussian_density(snap.mesh, geom, angle_ptr, s, s0, X0,
                                                opts.mode, opts.eps_sym);
    sample.phi = value.weighted;
    sample.unweighted = value.unweighted;
    sample.quad_error_est = value.quad_error_est;
    sample.under_resolved = value.under_resolved;

    // Dissipation terms, vertex lumped like the density itself. F_perp is the
    // normal projection of the position relative to X0.
    const int nv = snap.mesh.vertex_count();
    for (int v = 0; v < nv; ++v) {
      const double rho = backward_heat_kernel(snap.mesh.position(v), X0, s, s0);
      if (rho == 0.0) continue;
      const double area = geom.dual_area[v];
      const Vec4 rel = snap.mesh.position(v) - X0;
      const Vec4 f_perp = geom.vert_n1[v] * rel.dot(geom.vert_n1[v]) +
                          geom.vert_n2[v] * rel.dot(geom.vert_n2[v]);
      const Vec4 shrinker = geom.mean_curvature[v] + f_perp / (2.0 * tau);
      const double w = opts.mode == DensityWeight::Unweighted
                           ? 1.0
                           : vertex_weight(opts.mode, &angles, v, opts.eps_sym);
      sample.term_shrinker += w * rho * shrinker.squaredNorm() * area;
    }
    if (opts.mode == DensityWeight::InvCosAlpha || opts.mode == DensityWeight::Unweighted) {
      for (int v = 0; v < nv; ++v) {
        const double rho = backward_heat_kernel(snap.mesh.position(v), X0, s, s0);
        if (rho == 0.0) continue;
        const double c = angles.vert_cos_alpha[v];
        if (opts.mode == DensityWeight::InvCosAlpha && c > opts.eps_sym) {
          sample.term_grad += (2.0 / (c * c * c)) *
                              angles.vert_grad_cos_alpha[v].squaredNorm() * rho *
                              geom.dual_area[v];
        }
      }
    } else {
      const std::vector<Vec4> grad_beta = vertex_gradient(snap.mesh, geom, angles.vert_beta);
      for (int v = 0; v < nv; ++v) {
        const double rho = backward_heat_kernel(snap.mesh.position(v), X0, s, s0);
        if (rho == 0.0) continue;
        sample.term_grad += grad_beta[v].squaredNorm() * rho * geom.dual_area[v];
      }
    }

    max_quad_err = std::max(max_quad_err, sample.quad_error_est);
    trace.samples.push_back(sample);
  }

  std::sort(trace.samples.begin(), trace.samples.end(),
            [](const DensityTraceSample& a, const DensityTraceSample& b) { return a.s < b.s; });

  trace.mono_tol_used = opts.mono_tol_base + 3.0 * max_quad_err;
  trace.monotone = true;
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    if (trace.samples[i].under_resolved) continue;
    for (std::size_t j = i + 1; j < trace.samples.size(); ++j) {
      if (trace.samples[j].under_resolved) continue;
      const double increase = trace.samples[j].phi - trace.samples[i].phi;
      trace.worst_increase = std::max(trace.worst_increase, increase);
    }
  }
  trace.monotone = trace.worst_increase <= trace.mono_tol_used;

  // Deepest dyadic interval [4t, 2t] (t < 0 relative to s0) covered by samples.
  if (!trace.samples.empty()) {
    const double s_min = trace.samples.front().s;
    const double t_dyadic = (s_min - s0) / 4.0;
    if (t_dyadic < 0) {
      const double lo = s0 + 4.0 * t_dyadic;
      const double hi = s0 + 2.0 * t_dyadic;
      const DensityTraceSample* at_lo = nullptr;
      const DensityTraceSample* at_hi = nullptr;
      double integral = 0.0;
      const DensityTraceSample* prev = nullptr;
      for (const auto& sample : trace.samples) {
        if (sample.s < lo - 1e-12 || sample.s > hi + 1e-12) {
          prev = &sample;
          continue;
        }
        if (!at_lo) at_lo = &sample;
        at_hi = &sample;
        if (prev && prev->s >= lo - 1e-12) {
          integral += 0.5 * (prev->term_shrinker + sample.term_shrinker) * (sample.s - prev->s);
        }
        prev = &sample;
      }
      if (at_lo && at_hi && at_lo != at_hi) {
        trace.has_dyadic = true;
        trace.dyadic_drop = at_lo->phi - at_hi->phi;
        trace.dyadic_dissipation = integral;
        trace.accounting_tol = 3.0 * max_quad_err;
        trace.dissipation_ok =
            trace.dyadic_drop >= trace.dyadic_dissipation - trace.accounting_tol;
      }
    }
  }
  return trace;
}

}  // namespace kf
