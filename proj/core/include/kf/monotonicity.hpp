#pragma once

#include "kf/flow.hpp"
#include "kf/geometry.hpp"
#include "kf/kahler.hpp"
#include "kf/mesh.hpp"

#include <vector>

namespace kf {

// rho(X, X0, t, t0) = exp(-|X - X0|^2 / 4(t0 - t)) / (4 pi (t0 - t)).
// Normalized so a flat 2-plane through X0 integrates to 1. Throws on t >= t0.
double backward_heat_kernel(const Vec4& X, const Vec4& X0, double t, double t0);

enum class DensityWeight { Unweighted, InvCosAlpha, BetaSquared };

struct DensityValue {
  double weighted = 0.0;
  double unweighted = 0.0;
  double quad_error_est = 0.0;   // |vertex-lumped - face-midpoint| estimate
  double truncation_bias = 0.0;  // plane-comparison bound on the missing tail
  bool under_resolved = false;   // local edge length exceeds sqrt(t0 - t)
};

// Vertex-lumped quadrature of w rho dmu. InvCosAlpha requires the angle
// field and throws "weight singular" when cos alpha dips to eps_sym at a
// contributing vertex; BetaSquared requires the beta channel.
DensityValue gaussian_density(const SurfaceMesh& mesh, const GeometryField& geom,
                              const AngleField* angles, double s, double s0,
                              const Vec4& X0, DensityWeight weight,
                              double eps_sym = 1e-3);

struct DensityTraceSample {
  double s = 0.0;
  double phi = 0.0;
  double unweighted = 0.0;
  double term_shrinker = 0.0;  // int w rho |H + F_perp / 2(s0 - s)|^2 dmu
  double term_grad = 0.0;      // int (2/cos^3 a)|grad cos a|^2 rho dmu, or int |grad b|^2 rho dmu
  double quad_error_est = 0.0;
  bool under_resolved = false;
};

struct DensityTrace {
  Vec4 X0 = Vec4::Zero();
  double s0 = 0.0;
  DensityWeight mode = DensityWeight::Unweighted;
  std::vector<DensityTraceSample> samples;

  bool monotone = false;          // over resolved sample pairs, within mono_tol
  double mono_tol_used = 0.0;
  double worst_increase = 0.0;

  // Deepest dyadic pair [4t, 2t]: dissipation integral vs density drop.
  bool has_dyadic = false;
  double dyadic_drop = 0.0;        // phi(4t) - phi(2t)
  double dyadic_dissipation = 0.0; // integral of term_shrinker over [4t, 2t]
  bool dissipation_ok = false;     // drop >= dissipation - accounting_tol
  double accounting_tol = 0.0;
};

struct DensityTraceOptions {
  DensityWeight mode = DensityWeight::Unweighted;
  double mono_tol_base = 1e-2;  // tol = base + 3 x quadrature error estimate
  double eps_sym = 1e-3;
  double beta_cos_alpha_tol = 0.05;
};

// Trace of the weighted density and both dissipation terms over a snapshot
// stack (times strictly below s0).
DensityTrace density_trace(const std::vector<Snapshot>& stack, double s0, const Vec4& X0,
                           const DensityTraceOptions& opts);

}  // namespace kf
