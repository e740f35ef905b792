#pragma once

#include "kf/kahler.hpp"
#include "kf/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace kf {

// Closed-form reference data attached to a generated mesh. Shrinking
// scenarios satisfy r(t)^2 = r0^2 - rate t, so the extinction time is
// r0^2 / rate; the bundle asserts that consistency at construction.
struct OracleBundle {
  bool has_extinction = false;
  double initial_radius = 0.0;
  double shrink_rate = 0.0;      // d(r^2)/dt = -rate
  double extinction_time = 0.0;  // r0^2 / rate

  std::function<double(double)> radius_of_t;
  std::function<double(double)> area_of_t;
  std::function<double(double)> max_a2_of_t;

  SurfaceClass expected_class = SurfaceClass::None;
  double certified_eps0 = 0.0;  // min cos alpha floor for perturbed graphs

  // Closed face loops generating first homology (tori), for beta winding.
  std::vector<std::vector<int>> generator_face_loops;
  double expected_winding = 0.0;
};

struct ScenarioParams {
  double radius = 1.0;       // sphere / torus factor radius
  double r_trunc = 2.0;      // graph truncation radius (parameter plane)
  std::vector<double> poly;  // graph polynomial, low to high; empty = plane
  double amplitude = 0.3;    // potential amplitude
  double epsilon = 0.1;      // perturbation amplitude before certification
  unsigned long long seed = 1;
  double separation = 1.0;   // two_planes offset
};

struct Scenario {
  std::string name;
  SurfaceMesh mesh;
  OracleBundle oracle;
};

// Names: round_sphere, clifford_torus, holomorphic_graph,
// lagrangian_potential_graph, symplectic_perturbed_graph, two_planes.
// The resolution parameter n controls icosphere subdivisions, torus grid
// width, or lattice cells per truncation radius.
Scenario make_scenario(const std::string& name, int resolution,
                       const ScenarioParams& params = {});

// Standalone mesh builders (also used by tests).
SurfaceMesh make_icosphere(double radius, int subdivisions);
SurfaceMesh make_clifford_torus(double factor_radius, int n);
SurfaceMesh make_disc_grid(double radius, int cells_per_radius,
                           const std::function<Vec4(double, double)>& embed);
SurfaceMesh make_disc_polar(double radius, int rings);  // round rim, flat discs

// Graph embedding of a complex polynomial: (x, y) -> (x, y, Re f, Im f).
std::function<Vec4(double, double)> polynomial_graph(const std::vector<double>& coeffs);

// Irregular-sampling variants: vertices are jittered in parameter space by
// rel times the local spacing, so the mesh remains an exact sample of the
// same surface but loses stencil symmetry. Deterministic in the seed.
SurfaceMesh make_icosphere_jittered(double radius, int subdivisions, double rel,
                                    unsigned long long seed);
SurfaceMesh make_clifford_torus_jittered(double factor_radius, int n, double rel,
                                         unsigned long long seed);
// Requires an embedding with embed(x, y)[0] == x and embed(x, y)[1] == y
// (polynomial graphs qualify), so parameters can be read back off vertices.
SurfaceMesh make_disc_grid_jittered(double radius, int cells_per_radius,
                                    const std::function<Vec4(double, double)>& embed,
                                    double rel, unsigned long long seed);

}  // namespace kf
