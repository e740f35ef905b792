#pragma once

#include "kf/geometry.hpp"
#include "kf/kahler.hpp"
#include "kf/mesh.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace kf {

enum class DtPolicy { ExplicitCfl, Fixed };
enum class Integrator { Rk2Explicit, SemiImplicit };
enum class RemeshPolicy { Off, EdgeFlipSmooth };
enum class Termination { TEnd, BlowupThreshold, MeshFailure };

std::string to_string(Termination t);

struct FlowConfig {
  DtPolicy dt_policy = DtPolicy::ExplicitCfl;
  double cfl_safety = 0.5;      // c in dt = c min_edge^2 / 4
  double fixed_dt = 1e-3;
  Integrator integrator = Integrator::Rk2Explicit;
  double t_end = 0.1;
  int snapshot_stride = 10;     // steps between recorded snapshots
  double blowup_factor = 1e4;   // stop when max|A|^2 >= factor x initial max|A|^2
  double a2_stop_absolute = 0;  // overrides the factor when > 0
  RemeshPolicy remesh = RemeshPolicy::Off;
  int remesh_every = 25;
  bool track_beta = false;      // record the beta range per snapshot
  double beta_cos_alpha_tol = 0.05;  // Lagrangian gate while tracking beta
  std::string scenario;         // provenance string
  long max_steps = 2'000'000;

  void validate() const;
};

struct SnapshotSummary {
  double t = 0.0;
  double area = 0.0;
  double max_a2 = 0.0;
  double min_cos_alpha = 0.0;
  double max_mean_curvature = 0.0;
  bool has_beta = false;
  double beta_min = 0.0, beta_max = 0.0;
  bool remesh_event = false;
};

struct Snapshot {
  double t = 0.0;
  SurfaceMesh mesh;
  SnapshotSummary summary;
};

struct FlowTrajectory {
  std::vector<Snapshot> snapshots;
  Termination termination = Termination::TEnd;
  std::string failure_detail;
  FlowConfig config;

  const Snapshot& back() const { return snapshots.back(); }
  double t_begin() const { return snapshots.front().t; }
  double t_final() const { return snapshots.back().t; }
};

struct MeshFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// dt = safety x (min edge length)^2 / 4. Throws on degenerate meshes.
double cfl_dt(const SurfaceMesh& mesh, double safety = 0.5);

struct StepOptions {
  Integrator integrator = Integrator::Rk2Explicit;
  bool check_validity = true;
};

// One step of dF/dt = H. Explicit: 2-stage Runge-Kutta with H recomputed at
// the half step. Semi-implicit: backward Euler on the frozen-metric cotangent
// Laplacian. Pinned-boundary vertices stay fixed. Throws MeshFailure when the
// updated mesh violates an invariant.
SurfaceMesh step(const SurfaceMesh& mesh, double dt, const StepOptions& opts = {});

FlowTrajectory run(const SurfaceMesh& mesh, const FlowConfig& config);

struct ExtremaSeries {
  std::vector<double> t;
  std::vector<double> min_cos_alpha;
  std::vector<double> max_a2;
  std::vector<double> max_mean_curvature;
  std::vector<double> area;
  // Maximum-principle verdict for min cos alpha on symplectic trajectories:
  // nondecreasing up to tol_mp per unit time.
  bool min_cos_alpha_monotone = true;
  double worst_drop_rate = 0.0;  // max over steps of (drop / dt)
};

ExtremaSeries track_extrema(const FlowTrajectory& traj, double tol_mp = 1e-3);

struct SingularTimeEstimate {
  bool detected = false;
  std::string reason;         // set when not detected
  double t_hat = 0.0;
  double slope = 0.0;         // d(1/max|A|^2)/dt over the fit window
  double r2_rate = 0.0;       // 2 x slope; -4 signals the shrinking-sphere rate
  double residual_rms = 0.0;
  int window_begin = 0;       // first snapshot index used
};

// Least-squares linear fit of 1/max|A|^2 over the trailing window; t_hat is
// the extrapolated zero crossing.
SingularTimeEstimate estimate_singular_time(const FlowTrajectory& traj,
                                            double window_frac = 0.25);

struct RemeshResult {
  SurfaceMesh mesh;
  int flips = 0;
  int skipped_flips = 0;
  double max_drift = 0.0;        // largest vertex displacement
  double min_angle_before = 0.0;
  double min_angle_after = 0.0;
};

// Delaunay-style edge flips plus tangential Laplacian smoothing; component
// topology preserved, flips creating non-manifold or degenerate faces skipped.
RemeshResult remesh(const SurfaceMesh& mesh);

}  // namespace kf
