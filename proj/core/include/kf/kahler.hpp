#pragma once

#include "kf/geometry.hpp"
#include "kf/mesh.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace kf {

// Alternating 2-form on R^4, stored as its antisymmetric coefficient matrix:
// w(u, v) = u^T M v.
struct Form2 {
  Mat4 m = Mat4::Zero();
  double operator()(const Vec4& u, const Vec4& v) const { return u.dot(m * v); }
};

// Orthogonal almost-complex structure with its compatible 2-form
// w(u, v) = <J u, v>. rotate_structure relaxes orthogonality (J*^2 = -I
// only) and records the deviation.
struct ComplexStructure {
  Mat4 J = Mat4::Zero();
  Form2 omega;
  std::string label;
  double orthogonality_defect = 0.0;  // ||J^T J - I||

  double complex_defect() const;  // ||J^2 + I||
};

struct HolomorphicVolumeForm {
  Form2 re, im;
  std::complex<double> operator()(const Vec4& u, const Vec4& v) const {
    return {re(u, v), im(u, v)};
  }
};

// J0: dx1 -> dy1, dy1 -> -dx1, dx2 -> dy2, dy2 -> -dx2;
// w0 = dx1^dy1 + dx2^dy2; Omega0 = dz1^dz2.
ComplexStructure standard_structure();
HolomorphicVolumeForm standard_volume_form();

// Kähler-angle and Lagrangian-angle fields of one mesh snapshot.
struct AngleField {
  std::vector<double> face_cos_alpha;
  std::vector<double> vert_cos_alpha;       // area-weighted averages
  std::vector<Vec4> vert_grad_cos_alpha;
  std::vector<double> vert_grad_alpha_sq;   // |grad alpha|^2 where sin^2 > sin_floor
  std::vector<std::uint8_t> vert_grad_alpha_valid;
  double min_cos_alpha = 0.0;
  double max_cos_alpha = 0.0;
  double sin_floor = 1e-6;

  // beta channel, present only after lagrangian_angle
  bool has_beta = false;
  std::vector<double> face_beta_raw;   // principal value per face
  std::vector<double> face_beta;       // unwrapped along a spanning tree
  std::vector<std::uint8_t> face_branch_flag;
  std::vector<double> vert_beta;       // area-weighted averages of unwrapped values
  int winding_defect_edges = 0;        // non-tree adjacencies with nonzero 2pi defect
  bool mean_curvature_form_exact = false;  // no winding anywhere
  double beta_min = 0.0, beta_max = 0.0;
  double min_cos_beta = 0.0;
};

AngleField kahler_angle(const SurfaceMesh& mesh, const GeometryField& geom,
                        const ComplexStructure& J);

// Fills the beta channel. Requires the mesh to be Lagrangian within
// cos_alpha_tol; |Omega(e1,e2)| must be within modulus_tol of 1 on every face.
void lagrangian_angle(const SurfaceMesh& mesh, const GeometryField& geom,
                      const HolomorphicVolumeForm& form, AngleField& angles,
                      double cos_alpha_tol = 1e-6, double modulus_tol = 1e-2);

// Net winding number of beta along a closed loop of edge-adjacent faces.
double winding_along(const AngleField& angles, std::span<const int> face_loop);

enum class SurfaceClass { Symplectic, Lagrangian, AlmostCalibrated, None };
std::string to_string(SurfaceClass c);

struct ClassifyTolerances {
  double eps_symplectic = 1e-3;
  double eps_lagrangian = 1e-6;
};

struct Classification {
  SurfaceClass cls = SurfaceClass::None;
  double eps0 = 0.0;    // min cos alpha when symplectic
  double delta0 = 0.0;  // min cos beta when almost calibrated
};

Classification classify(const SurfaceMesh& mesh, const AngleField& angles,
                        const ClassifyTolerances& tol = {});

// Residual of d(beta) = w(H, .) over edges, skipping branch-flagged faces.
struct EdgeFormResidual {
  double l2 = 0.0;             // sqrt( sum len r^2 / sum len ), r per edge
  double l2_per_length = 0.0;  // same with r/len (derivative-scale residual)
  double max_abs = 0.0;
  int edges_used = 0;
};
EdgeFormResidual mean_curvature_form_residual(const SurfaceMesh& mesh,
                                              const GeometryField& geom,
                                              const AngleField& angles,
                                              const ComplexStructure& J);

// The rotation J*(theta0) together with the Kähler 2-form of its holomorphic
// coordinates z1* = x1 + i y1/theta0, z2* = x2/theta0 + i y2; that form is
// w0/theta0, and a surface of constant Kähler angle theta0 has angle 1 under
// it with Euclidean-orthonormal frames.
struct RotatedStructure {
  ComplexStructure cs;    // J* and <J* u, v>
  double theta0 = 1.0;
  Form2 kahler_form;      // w0 / theta0
};
RotatedStructure rotate_structure(double theta0);

// Per-face angle under the rotated normalization: kahler_form(e1, e2).
std::vector<double> normalized_face_angle(const SurfaceMesh& mesh,
                                          const GeometryField& geom,
                                          const RotatedStructure& rot);

}  // namespace kf
