#pragma once

#include "kf/flow.hpp"
#include "kf/mesh.hpp"
#include "kf/region.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kf {

enum class RescaleMode { FiniteTime, AtInfinity };

struct RescalingParams {
  RescaleMode mode = RescaleMode::FiniteTime;
  Vec4 center = Vec4::Zero();  // X0
  double r0 = 0.5;             // finite-time: r_k = r0 2^-k; at-infinity: fixed r
  int count = 3;               // number of sequence entries
  int sigma_grid = 64;         // samples of (0, r/2]
  int at_infinity_stride = 4;  // snapshots between successive t_k
  double norm_tol = 0.05;      // |A_k|(0,0) = 1 +- tol, max |A_k|^2 <= 4 + tol
};

struct RescalingEntry {
  double r = 0.0;
  double sigma = 0.0;
  double t_k = 0.0;
  int vertex = -1;       // x_k
  Vec4 X_k = Vec4::Zero();
  double lambda = 0.0;   // |A|(x_k, t_k)

  // filled by rescale(): snapshots with positions lambda (F - X_k) and
  // times s = lambda^2 (t - t_k), s in [-lambda^2 sigma^2 / 4, 0]
  std::vector<Snapshot> stack;
  double a2_at_marked = 0.0;   // |A_k|^2 at the marked vertex, s = 0
  double max_a2_window = 0.0;  // over the selection ball, radius lambda sigma / 2
  bool normalization_ok = false;
};

struct RescalingSequence {
  RescalingParams params;
  std::vector<RescalingEntry> entries;
  std::string source;
};

// Point selection per the sigma-maximization rule: sigma_k maximizes
// sigma^2 sup |A|^2 over the window [t_ref - (r - sigma)^2, t_ref] and ball
// B_{r - sigma}(X0); then (t_k, x_k) is the argmax of |A|^2 over the selected
// window, ties broken by earliest time then smallest vertex index.
RescalingSequence select_rescaling(const FlowTrajectory& traj,
                                   const RescalingParams& params);

// Builds the rescaled stacks and checks the curvature normalization.
void rescale(const FlowTrajectory& traj, RescalingSequence& seq);

struct LimitExtraction {
  SurfaceMesh limit;
  std::vector<double> gauges;  // between consecutive entries' restrictions
  bool converged = false;
  double radius = 0.0;
};

// Limit = last entry's s = 0 snapshot restricted to B_R(0); the gauge is the
// one-sided Hausdorff distance plus the vertex-sampled normal deviation
// between consecutive restrictions.
LimitExtraction extract_limit(const RescalingSequence& seq, double radius,
                              double conv_tol = 1e-2);

enum class SingularityType { I, II, Undetermined };
std::string to_string(SingularityType t);

struct TypeVerdictOptions {
  double window_frac = 0.25;
  double slope_tol = 0.2;   // on the dimensionless slope of m over the window
  double ratio_tol = 3.0;   // growth beyond ratio x early median flags Type II
};

struct TypeVerdict {
  SingularityType type = SingularityType::Undetermined;
  std::vector<double> t;
  std::vector<double> m;        // (T_hat - t) max|A|^2
  double trailing_slope = 0.0;  // normalized: dm/dt x (T_hat - window start)
  double early_median = 0.0;
  double final_m = 0.0;
};

TypeVerdict classify_type(const FlowTrajectory& traj, double t_hat,
                          const TypeVerdictOptions& opts = {});

enum class VerifyMode { Symplectic, Lagrangian };

struct VerifyOptions {
  VerifyMode mode = VerifyMode::Symplectic;
  double curvature_tol = 0.25;     // slack on -2 <= K <= 0
  double spread_tol = 0.05;        // cos alpha spread gating the J* report
  double sin_floor = 1e-6;
  double nontrivial_a2 = 0.5;      // non-flat when max |A|^2 >= this
  double interior_margin = 0.2;
  int simplicity_samples = 16;
  double beta_cos_alpha_tol = 0.05;
};

struct ComponentCheck {
  int faces = 0;
  double simplicity_ratio = 0.0;  // max sampled rho(x,y) / |x - y|
};

struct BlowupReport {
  // identification
  std::string source;
  VerifyMode mode = VerifyMode::Symplectic;

  // type verdict (when produced through a trajectory analysis)
  bool has_type = false;
  TypeVerdict type;
  bool no_blowup = false;
  std::string no_blowup_reason;

  // minimality / holomorphicity residuals on the limit
  double max_mean_curvature = 0.0;
  bool minimal = false;
  double holomorphicity_gap = 0.0;   // 1 - min cos alpha (symplectic mode)
  double cos_alpha_spread = 0.0;
  double cos_alpha_level = 0.0;      // mean cos alpha
  bool jstar_reported = false;
  double jstar_angle_error = 0.0;    // max |1 - normalized angle|
  double beta_spread = 0.0;          // max |beta - mean| (lagrangian mode)

  // curvature window and stats
  double min_gauss = 0.0, max_gauss = 0.0;
  bool curvature_window_ok = false;
  double a2_at_origin = 0.0;  // |A| at the vertex nearest the origin, squared
  double max_a2 = 0.0;
  bool nontrivial = false;

  // structure equation (e1): -Delta cos a = 2 |grad a|^2 cos a away from
  // holomorphic points
  double e1_residual_l2 = 0.0;
  double e1_residual_max = 0.0;
  int e1_vertices = 0;

  // quantization
  QuantizationEstimate quantization;

  // components and simplicity
  std::vector<ComponentCheck> components;

  // area-ratio boundedness over R in {1, 2, 4, 8}
  std::vector<double> area_ratios;
  bool area_ratio_bounded = false;

  // rescaling normalization echo (when produced from a sequence)
  bool has_normalization = false;
  double a2_at_marked = 0.0;
  double max_a2_window = 0.0;
  bool normalization_ok = false;

  bool converged_limit = false;
  std::vector<double> convergence_gauges;
};

BlowupReport verify_limit(const SurfaceMesh& limit, const VerifyOptions& opts);

// r^-2 int_{t-r^2}^{t} int_{Sigma_t cap B_r(X0)} |A|^2 dmu dt, trapezoid in
// time over the trailing window ending at the final snapshot. Throws when the
// trajectory does not cover [t - r^2, t].
double integral_curvature_window(const FlowTrajectory& traj, const Vec4& X0, double r);

}  // namespace kf
