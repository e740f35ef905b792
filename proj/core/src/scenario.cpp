#include "kf/scenario.hpp"

#include "kf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>

namespace kf {

namespace {

// Deterministic uniform doubles in [-1, 1) from a splitmix64 stream; avoids
// distribution objects whose output differs across standard libraries.
struct DetRng {
  unsigned long long state;
  explicit DetRng(unsigned long long seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  unsigned long long next_u64() {
    unsigned long long z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double sym() { return 2.0 * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53) - 1.0; }
};

SurfaceMesh prune_pinched_rim(std::vector<Vec4> pos, std::vector<FaceTri> faces,
                              BoundaryPolicy policy) {
  // Drop faces around non-manifold rim vertices (keep the largest fan), then
  // compact away unreferenced vertices. Grid-clipped discs need one or two
  // passes at most.
  for (int pass = 0; pass < 8; ++pass) {
    auto topo = MeshTopology::build(faces, static_cast<int>(pos.size()));
    std::vector<int> pinched;
    for (const Violation& v : topo->structural_violations()) {
      if (v.code == Violation::Code::NonmanifoldVertex) pinched.push_back(static_cast<int>(v.element));
    }
    if (pinched.empty()) break;
    std::vector<char> drop(faces.size(), 0);
    for (int v : pinched) {
      // Collect fans of faces around v.
      std::vector<int> incident;
      for (int i = topo->vertex_face_offsets()[v]; i < topo->vertex_face_offsets()[v + 1]; ++i) {
        incident.push_back(topo->vertex_faces()[i]);
      }
      std::map<int, int> group;  // face -> fan id
      int fans = 0;
      for (int seed : incident) {
        if (group.count(seed)) continue;
        const int id = fans++;
        std::vector<int> stack{seed};
        group[seed] = id;
        while (!stack.empty()) {
          const int f = stack.back();
          stack.pop_back();
          for (int k = 0; k < 3; ++k) {
            const int eid = topo->face_edges()[f][k];
            if (eid < 0) continue;
            const auto& e = topo->edges()[eid];
            if (e.a != v && e.b != v) continue;
            const int other = (e.f0 == f) ? e.f1 : e.f0;
            if (other >= 0 && !group.count(other)) {
              group[other] = id;
              stack.push_back(other);
            }
          }
        }
      }
      std::vector<int> size(fans, 0);
      for (const auto& [f, id] : group) size[id]++;
      const int keep = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
      for (const auto& [f, id] : group) {
        if (id != keep) drop[f] = 1;
      }
    }
    std::vector<FaceTri> kept;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!drop[f]) kept.push_back(faces[f]);
    }
    faces = std::move(kept);
  }

  // Compact vertices.
  std::vector<int> remap(pos.size(), -1);
  std::vector<Vec4> out_pos;
  for (FaceTri& tri : faces) {
    for (int k = 0; k < 3; ++k) {
      if (remap[tri[k]] < 0) {
        remap[tri[k]] = static_cast<int>(out_pos.size());
        out_pos.push_back(pos[tri[k]]);
      }
      tri[k] = remap[tri[k]];
    }
  }
  return SurfaceMesh(std::move(out_pos), std::move(faces), policy);
}

}  // namespace

SurfaceMesh make_icosphere(double radius, int subdivisions) {
  if (!(radius > 0)) throw std::invalid_argument("make_icosphere: radius must be > 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<std::array<double, 3>> verts = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<FaceTri> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  auto normalize = [&](std::array<double, 3>& p) {
    const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    p = {p[0] / n, p[1] / n, p[2] / n};
  };
  for (auto& p : verts) normalize(p);

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      std::array<double, 3> m = {(verts[a][0] + verts[b][0]) / 2,
                                 (verts[a][1] + verts[b][1]) / 2,
                                 (verts[a][2] + verts[b][2]) / 2};
      normalize(m);
      verts.push_back(m);
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint[key] = id;
      return id;
    };
    std::vector<FaceTri> next;
    next.reserve(faces.size() * 4);
    for (const FaceTri& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  std::vector<Vec4> pos;
  pos.reserve(verts.size());
  for (const auto& p : verts) pos.emplace_back(radius * p[0], radius * p[1], radius * p[2], 0.0);
  return SurfaceMesh(std::move(pos), std::move(faces), BoundaryPolicy::Closed);
}

SurfaceMesh make_clifford_torus(double factor_radius, int n) {
  if (!(factor_radius > 0) || n < 3) {
    throw std::invalid_argument("make_clifford_torus: bad parameters");
  }
  const double r = factor_radius;
  std::vector<Vec4> pos(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double t1 = 2.0 * std::numbers::pi * i / n;
    for (int j = 0; j < n; ++j) {
      const double t2 = 2.0 * std::numbers::pi * j / n;
      pos[static_cast<std::size_t>(i) * n + j] =
          Vec4(r * std::cos(t1), r * std::sin(t1), r * std::cos(t2), r * std::sin(t2));
    }
  }
  std::vector<FaceTri> faces;
  faces.reserve(static_cast<std::size_t>(2) * n * n);
  auto vid = [n](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return SurfaceMesh(std::move(pos), std::move(faces), BoundaryPolicy::Closed);
}

SurfaceMesh make_disc_grid(double radius, int cells_per_radius,
                           const std::function<Vec4(double, double)>& embed) {
  if (!(radius > 0) || cells_per_radius < 2) {
    throw std::invalid_argument("make_disc_grid: bad parameters");
  }
  const int n = cells_per_radius;
  const double h = radius / n;
  const int width = 2 * n + 1;
  std::vector<int> id(static_cast<std::size_t>(width) * width, -1);
  std::vector<Vec4> pos;
  auto inside = [&](int i, int j) {
    const double x = (i - n) * h;
    const double y = (j - n) * h;
    return x * x + y * y <= radius * radius * (1.0 + 1e-12);
  };
  for (int i = 0; i < width; ++i) {
    for (int j = 0; j < width; ++j) {
      if (!inside(i, j)) continue;
      id[static_cast<std::size_t>(i) * width + j] = static_cast<int>(pos.size());
      pos.push_back(embed((i - n) * h, (j - n) * h));
    }
  }
  std::vector<FaceTri> faces;
  auto vid = [&](int i, int j) { return id[static_cast<std::size_t>(i) * width + j]; };
  for (int i = 0; i + 1 < width; ++i) {
    for (int j = 0; j + 1 < width; ++j) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if (a >= 0 && b >= 0 && c >= 0) faces.push_back({a, b, c});
      if (a >= 0 && c >= 0 && d >= 0) faces.push_back({a, c, d});
    }
  }
  return prune_pinched_rim(std::move(pos), std::move(faces), BoundaryPolicy::PinnedBoundary);
}

SurfaceMesh make_disc_polar(double radius, int rings) {
  if (!(radius > 0) || rings < 1) throw std::invalid_argument("make_disc_polar: bad parameters");
  std::vector<Vec4> pos{Vec4::Zero()};
  std::vector<std::vector<int>> ring_ids(rings + 1);
  ring_ids[0] = {0};
  for (int r = 1; r <= rings; ++r) {
    const int count = 6 * r;
    const double rho = radius * r / rings;
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * std::numbers::pi * k / count;
      ring_ids[r].push_back(static_cast<int>(pos.size()));
      pos.emplace_back(rho * std::cos(th), rho * std::sin(th), 0.0, 0.0);
    }
  }
  std::vector<FaceTri> faces;
  for (int r = 1; r <= rings; ++r) {
    const auto& outer = ring_ids[r];
    const auto& inner = ring_ids[r - 1];
    const int no = static_cast<int>(outer.size());
    const int ni = static_cast<int>(inner.size());
    // March around, connecting by nearest angle.
    int j = 0;
    for (int k = 0; k < no; ++k) {
      const int k1 = (k + 1) % no;
      faces.push_back({outer[k], outer[k1], inner[j % ni]});
      // Advance the inner cursor when the next inner vertex is closer in angle.
      const double th_next_outer = 2.0 * std::numbers::pi * (k + 1) / no;
      const double th_next_inner = 2.0 * std::numbers::pi * (j + 1) / ni;
      if (ni > 1 && th_next_inner <= th_next_outer + 1e-12) {
        faces.push_back({outer[k1], inner[(j + 1) % ni], inner[j % ni]});
        ++j;
      }
    }
  }
  return SurfaceMesh(std::move(pos), std::move(faces), BoundaryPolicy::PinnedBoundary);
}

std::function<Vec4(double, double)> polynomial_graph(const std::vector<double>& coeffs) {
  return [coeffs](double x, double y) {
    const std::complex<double> z(x, y);
    std::complex<double> f = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) f = f * z + coeffs[k];
    return Vec4(x, y, f.real(), f.imag());
  };
}

SurfaceMesh make_icosphere_jittered(double radius, int subdivisions, double rel,
                                    unsigned long long seed) {
  SurfaceMesh base = make_icosphere(radius, subdivisions);
  const GeometryField g = geometry(base);
  DetRng rng(seed);
  std::vector<Vec4> pos = base.positions();
  for (Vec4& p : pos) {
    const Vec4 radial = p / p.norm();
    Vec4 d(rng.sym(), rng.sym(), rng.sym(), 0.0);
    d -= d.dot(radial) * radial;
    if (d.norm() > 0) {
      p += rel * g.mean_edge_length * d.normalized();
      p *= radius / p.norm();
    }
  }
  return base.with_positions(std::move(pos));
}

SurfaceMesh make_clifford_torus_jittered(double factor_radius, int n, double rel,
                                         unsigned long long seed) {
  SurfaceMesh base = make_clifford_torus(factor_radius, n);
  DetRng rng(seed);
  const double dt = 2.0 * std::numbers::pi / n;
  std::vector<Vec4> pos = base.positions();
  for (Vec4& p : pos) {
    const double t1 = std::atan2(p[kAxisY1], p[kAxisX1]) + rel * dt * rng.sym();
    const double t2 = std::atan2(p[kAxisY2], p[kAxisX2]) + rel * dt * rng.sym();
    const double r = factor_radius;
    p = Vec4(r * std::cos(t1), r * std::sin(t1), r * std::cos(t2), r * std::sin(t2));
  }
  return base.with_positions(std::move(pos));
}

SurfaceMesh make_disc_grid_jittered(double radius, int cells_per_radius,
                                    const std::function<Vec4(double, double)>& embed,
                                    double rel, unsigned long long seed) {
  SurfaceMesh base = make_disc_grid(radius, cells_per_radius, embed);
  DetRng rng(seed);
  const double h = radius / cells_per_radius;
  std::vector<Vec4> pos = base.positions();
  for (int v = 0; v < base.vertex_count(); ++v) {
    if (base.topology().vertex_on_boundary(v)) continue;
    const double x = pos[v][0] + rel * h * rng.sym();
    const double y = pos[v][1] + rel * h * rng.sym();
    pos[v] = embed(x, y);
  }
  return base.with_positions(std::move(pos));
}

namespace {

Scenario make_round_sphere(int resolution, const ScenarioParams& p) {
  Scenario s;
  s.name = "round_sphere";
  s.mesh = make_icosphere(p.radius, resolution);
  OracleBundle& o = s.oracle;
  o.has_extinction = true;
  o.initial_radius = p.radius;
  o.shrink_rate = 4.0;  // dr/dt = -2/r
  o.extinction_time = p.radius * p.radius / 4.0;
  const double r0 = p.radius;
  o.radius_of_t = [r0](double t) { return std::sqrt(std::max(0.0, r0 * r0 - 4.0 * t)); };
  o.area_of_t = [r0](double t) {
    return 4.0 * std::numbers::pi * std::max(0.0, r0 * r0 - 4.0 * t);
  };
  o.max_a2_of_t = [r0](double t) { return 2.0 / std::max(1e-300, r0 * r0 - 4.0 * t); };
  o.expected_class = SurfaceClass::None;  // cos alpha sweeps [-1, 1]
  return s;
}

Scenario make_clifford(int resolution, const ScenarioParams& p) {
  Scenario s;
  s.name = "clifford_torus";
  const int n = std::max(8, resolution);
  s.mesh = make_clifford_torus(p.radius, n);
  OracleBundle& o = s.oracle;
  o.has_extinction = true;
  o.initial_radius = p.radius;
  o.shrink_rate = 2.0;  // each factor circle: dr/dt = -1/r
  o.extinction_time = p.radius * p.radius / 2.0;
  const double r0 = p.radius;
  o.radius_of_t = [r0](double t) { return std::sqrt(std::max(0.0, r0 * r0 - 2.0 * t)); };
  o.area_of_t = [r0](double t) {
    return 4.0 * std::numbers::pi * std::numbers::pi * std::max(0.0, r0 * r0 - 2.0 * t);
  };
  o.max_a2_of_t = [r0](double t) { return 2.0 / std::max(1e-300, r0 * r0 - 2.0 * t); };
  o.expected_class = SurfaceClass::Lagrangian;
  o.expected_winding = 1.0;

  // Generator loops in the face-id layout of make_clifford_torus: cell (i, j)
  // produces faces 2(i n + j) and 2(i n + j) + 1.
  auto t1_face = [n](int i, int j) { return 2 * ((i % n) * n + (j % n)); };
  auto t2_face = [n](int i, int j) { return 2 * ((i % n) * n + (j % n)) + 1; };
  std::vector<int> loop_i, loop_j;
  for (int i = 0; i < n; ++i) {
    loop_i.push_back(t1_face(i, 0));
    loop_i.push_back(t2_face(i + 1, 0));
  }
  for (int j = 0; j < n; ++j) {
    loop_j.push_back(t1_face(0, j));
    loop_j.push_back(t2_face(0, j));
  }
  o.generator_face_loops = {loop_i, loop_j};
  return s;
}

Scenario make_holomorphic_graph(int resolution, const ScenarioParams& p) {
  Scenario s;
  s.name = "holomorphic_graph";
  std::vector<double> coeffs = p.poly.empty() ? std::vector<double>{0.0} : p.poly;
  s.mesh = make_disc_grid(p.r_trunc, std::max(2, resolution), polynomial_graph(coeffs));
  s.oracle.expected_class = SurfaceClass::Symplectic;
  return s;
}

Scenario make_potential_graph(int resolution, const ScenarioParams& p) {
  Scenario s;
  s.name = "lagrangian_potential_graph";
  const double a = p.amplitude;
  // u(x) = a (cos x1 + cos x2); the gradient graph (x1, du/dx1, x2, du/dx2)
  // is Lagrangian for w0 = dx1^dy1 + dx2^dy2.
  auto embed = [a](double x, double y) {
    return Vec4(x, -a * std::sin(x), y, -a * std::sin(y));
  };
  s.mesh = make_disc_grid(p.r_trunc, std::max(2, resolution), embed);
  s.oracle.expected_class =
      a < 1.0 ? SurfaceClass::AlmostCalibrated : SurfaceClass::Lagrangian;
  return s;
}

Scenario make_perturbed_graph(int resolution, const ScenarioParams& p) {
  Scenario s;
  s.name = "symplectic_perturbed_graph";
  const double R = p.r_trunc;

  DetRng rng(p.seed);
  constexpr int bumps = 4;
  double cx[bumps], cy[bumps], a1[bumps], a2[bumps];
  for (int m = 0; m < bumps; ++m) {
    cx[m] = 0.6 * R * rng.sym();
    cy[m] = 0.6 * R * rng.sym();
    a1[m] = rng.sym();
    a2[m] = rng.sym();
  }
  const double width = R / 3.0;

  auto build = [&](double eps) {
    auto embed = [&, eps](double x, double y) {
      const std::complex<double> z(x, y);
      const std::complex<double> f = 0.5 * z * z;
      double d1 = 0.0, d2 = 0.0;
      for (int m = 0; m < bumps; ++m) {
        const double g =
            std::exp(-((x - cx[m]) * (x - cx[m]) + (y - cy[m]) * (y - cy[m])) /
                     (2.0 * width * width));
        d1 += a1[m] * g;
        d2 += a2[m] * g;
      }
      // Smooth rim cutoff keeps the pinned boundary on the unperturbed graph.
      const double rr = std::sqrt(x * x + y * y) / R;
      const double cut = rr >= 1.0 ? 0.0 : std::pow(1.0 - rr * rr, 2);
      return Vec4(x, y, f.real() + eps * d1 * cut, f.imag() + eps * d2 * cut);
    };
    return make_disc_grid(R, std::max(2, resolution), embed);
  };

  // Certify the symplectic floor: shrink the amplitude until min cos alpha
  // stays at or above 0.2 at t = 0.
  double eps = p.epsilon;
  SurfaceMesh mesh = build(eps);
  for (int iter = 0; iter < 24; ++iter) {
    const GeometryField geom = geometry(mesh);
    const AngleField angles = kahler_angle(mesh, geom, standard_structure());
    s.oracle.certified_eps0 = angles.min_cos_alpha;
    if (angles.min_cos_alpha >= 0.2) break;
    eps *= 0.7;
    mesh = build(eps);
  }
  s.mesh = std::move(mesh);
  s.oracle.expected_class = SurfaceClass::Symplectic;
  return s;
}

Scenario make_two_planes(int resolution, const ScenarioParams& p) {
  Scenario s;
  s.name = "two_planes";
  const double d = p.separation;
  auto upper = make_disc_grid(p.r_trunc, std::max(2, resolution),
                              [d](double x, double y) { return Vec4(x, y, d / 2, 0); });
  auto lower = make_disc_grid(p.r_trunc, std::max(2, resolution),
                              [d](double x, double y) { return Vec4(x, y, -d / 2, 0); });
  s.mesh = disjoint_union(upper, lower);
  s.oracle.expected_class = SurfaceClass::Symplectic;  // holomorphic planes
  return s;
}

}  // namespace

Scenario make_scenario(const std::string& name, int resolution,
                       const ScenarioParams& params) {
  Scenario s;
  if (name == "round_sphere") {
    s = make_round_sphere(resolution, params);
  } else if (name == "clifford_torus") {
    s = make_clifford(resolution, params);
  } else if (name == "holomorphic_graph") {
    s = make_holomorphic_graph(resolution, params);
  } else if (name == "lagrangian_potential_graph") {
    s = make_potential_graph(resolution, params);
  } else if (name == "symplectic_perturbed_graph") {
    s = make_perturbed_graph(resolution, params);
  } else if (name == "two_planes") {
    s = make_two_planes(resolution, params);
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }

  const ValidationReport report = validate_mesh(s.mesh);
  if (!report.valid()) {
    throw std::runtime_error("scenario '" + name +
                             "' generated an invalid mesh: " + report.to_string());
  }
  if (s.oracle.has_extinction) {
    const double r_at_T = s.oracle.radius_of_t ? s.oracle.radius_of_t(s.oracle.extinction_time)
                                               : 0.0;
    if (std::abs(r_at_T) > 1e-9) {
      throw std::runtime_error("scenario oracle inconsistent: r(T) != 0");
    }
  }
  return s;
}

}  // namespace kf
