#include "kf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace kf {

std::string to_string(BoundaryPolicy p) {
  return p == BoundaryPolicy::Closed ? "closed" : "pinned-boundary";
}

bool parse_boundary_policy(const std::string& text, BoundaryPolicy& out) {
  if (text == "closed") {
    out = BoundaryPolicy::Closed;
    return true;
  }
  if (text == "pinned-boundary" || text == "pinned") {
    out = BoundaryPolicy::PinnedBoundary;
    return true;
  }
  return false;
}

namespace {

const char* code_name(Violation::Code c) {
  switch (c) {
    case Violation::Code::BadFaceIndex: return "bad-face-index";
    case Violation::Code::DegenerateFace: return "degenerate-face";
    case Violation::Code::OverfullEdge: return "edge-with-3-incident-faces";
    case Violation::Code::BoundaryEdgeInClosedMesh: return "boundary-edge-in-closed-mesh";
    case Violation::Code::InconsistentOrientation: return "inconsistent-orientation";
    case Violation::Code::NonmanifoldVertex: return "nonmanifold-vertex";
    case Violation::Code::AreaFloor: return "area-floor";
    case Violation::Code::NonfinitePosition: return "nonfinite-position";
    case Violation::Code::IsolatedVertex: return "isolated-vertex";
  }
  return "unknown";
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (violations.empty()) return "valid";
  std::ostringstream os;
  for (const auto& v : violations) {
    os << code_name(v.code) << " (element " << v.element << "): " << v.message << "\n";
  }
  return os.str();
}

std::shared_ptr<const MeshTopology> MeshTopology::build(std::vector<FaceTri> faces,
                                                        int vertex_count) {
  auto topo = std::shared_ptr<MeshTopology>(new MeshTopology());
  topo->vertex_count_ = vertex_count;
  topo->faces_ = std::move(faces);

  const int nf = topo->face_count();
  const int nv = vertex_count;

  // Screen faces with unusable indices; they are reported and skipped when
  // building incidence so the rest of the structure stays coherent.
  std::vector<char> face_ok(nf, 1);
  for (int f = 0; f < nf; ++f) {
    const FaceTri& tri = topo->faces_[f];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv) {
        topo->structural_.push_back({Violation::Code::BadFaceIndex, f,
                                     "vertex index out of range"});
        face_ok[f] = 0;
      }
    }
    if (face_ok[f] && (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])) {
      topo->structural_.push_back({Violation::Code::DegenerateFace, f,
                                   "repeated vertex index in face"});
      face_ok[f] = 0;
    }
  }

  auto edge_key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  };

  struct EdgeSlot {
    int id;
    int dir_count[2];  // occurrences as (a,b) and (b,a) among face loops
  };
  std::unordered_map<std::uint64_t, EdgeSlot> edge_map;
  edge_map.reserve(static_cast<std::size_t>(nf) * 3 / 2 + 8);

  topo->face_edges_.assign(nf, {-1, -1, -1});
  std::vector<int> edge_extra_faces;  // count beyond 2, for reporting

  for (int f = 0; f < nf; ++f) {
    if (!face_ok[f]) continue;
    const FaceTri& tri = topo->faces_[f];
    for (int k = 0; k < 3; ++k) {
      const int u = tri[k];
      const int v = tri[(k + 1) % 3];
      const std::uint64_t key = edge_key(u, v);
      auto it = edge_map.find(key);
      if (it == edge_map.end()) {
        Edge e;
        e.a = std::min(u, v);
        e.b = std::max(u, v);
        e.f0 = f;
        e.f1 = -1;
        const int id = static_cast<int>(topo->edges_.size());
        topo->edges_.push_back(e);
        EdgeSlot slot{id, {0, 0}};
        slot.dir_count[u < v ? 0 : 1] = 1;
        edge_map.emplace(key, slot);
        topo->face_edges_[f][k] = id;
      } else {
        EdgeSlot& slot = it->second;
        Edge& e = topo->edges_[slot.id];
        slot.dir_count[u < v ? 0 : 1] += 1;
        if (e.f1 == -1 && e.f0 != f) {
          e.f1 = f;
        } else {
          topo->structural_.push_back({Violation::Code::OverfullEdge, slot.id,
                                       "edge with 3 incident faces"});
        }
        topo->face_edges_[f][k] = slot.id;
      }
    }
  }

  // Interior edges must be traversed once in each direction.
  for (const auto& [key, slot] : edge_map) {
    (void)key;
    const Edge& e = topo->edges_[slot.id];
    if (e.f1 != -1 && (slot.dir_count[0] != 1 || slot.dir_count[1] != 1)) {
      topo->structural_.push_back({Violation::Code::InconsistentOrientation, slot.id,
                                   "shared edge traversed twice in the same direction"});
    }
  }

  topo->on_boundary_.assign(nv, 0);
  for (const Edge& e : topo->edges_) {
    if (e.f1 == -1) {
      ++topo->boundary_edge_count_;
      topo->on_boundary_[e.a] = 1;
      topo->on_boundary_[e.b] = 1;
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (topo->on_boundary_[v]) topo->boundary_vertices_.push_back(v);
  }

  // vertex -> faces CSR
  topo->vf_offsets_.assign(nv + 1, 0);
  for (int f = 0; f < nf; ++f) {
    if (!face_ok[f]) continue;
    for (int k = 0; k < 3; ++k) topo->vf_offsets_[topo->faces_[f][k] + 1]++;
  }
  for (int v = 0; v < nv; ++v) topo->vf_offsets_[v + 1] += topo->vf_offsets_[v];
  topo->vf_data_.assign(topo->vf_offsets_.back(), -1);
  {
    std::vector<int> cursor(topo->vf_offsets_.begin(), topo->vf_offsets_.end() - 1);
    for (int f = 0; f < nf; ++f) {
      if (!face_ok[f]) continue;
      for (int k = 0; k < 3; ++k) topo->vf_data_[cursor[topo->faces_[f][k]]++] = f;
    }
  }

  // vertex -> neighbor vertices CSR (unique, sorted)
  {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(topo->edges_.size() * 2);
    for (const Edge& e : topo->edges_) {
      pairs.emplace_back(e.a, e.b);
      pairs.emplace_back(e.b, e.a);
    }
    std::sort(pairs.begin(), pairs.end());
    topo->vn_offsets_.assign(nv + 1, 0);
    for (const auto& p : pairs) topo->vn_offsets_[p.first + 1]++;
    for (int v = 0; v < nv; ++v) topo->vn_offsets_[v + 1] += topo->vn_offsets_[v];
    topo->vn_data_.resize(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) topo->vn_data_[i] = pairs[i].second;
  }

  // Vertex fans: incident faces must form one edge-connected group. A vertex
  // whose star splits into several fans pinches the surface.
  {
    std::vector<int> face_group(nf, -1);
    for (int v = 0; v < nv; ++v) {
      const int begin = topo->vf_offsets_[v];
      const int end = topo->vf_offsets_[v + 1];
      if (begin == end) {
        topo->structural_.push_back({Violation::Code::IsolatedVertex, v,
                                     "vertex not referenced by any face"});
        continue;
      }
      int groups = 0;
      for (int i = begin; i < end; ++i) {
        const int seed = topo->vf_data_[i];
        if (face_group[seed] == v) continue;
        ++groups;
        // BFS over faces incident to v, stepping across shared edges through v.
        std::vector<int> stack{seed};
        face_group[seed] = v;
        while (!stack.empty()) {
          const int f = stack.back();
          stack.pop_back();
          for (int k = 0; k < 3; ++k) {
            const int eid = topo->face_edges_[f][k];
            if (eid < 0) continue;
            const Edge& e = topo->edges_[eid];
            if (e.a != v && e.b != v) continue;
            const int other = (e.f0 == f) ? e.f1 : e.f0;
            if (other >= 0 && face_group[other] != v) {
              face_group[other] = v;
              stack.push_back(other);
            }
          }
        }
      }
      if (groups > 1) {
        topo->structural_.push_back({Violation::Code::NonmanifoldVertex, v,
                                     "vertex star splits into " + std::to_string(groups) +
                                         " fans"});
      }
    }
  }

  return topo;
}

int MeshTopology::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  // Linear scan over one incident-face list; edge ids are only needed on
  // cold paths (remeshing, diagnostics).
  for (int i = vf_offsets_[a]; i < vf_offsets_[a + 1]; ++i) {
    const int f = vf_data_[i];
    for (int k = 0; k < 3; ++k) {
      const int eid = face_edges_[f][k];
      if (eid < 0) continue;
      const Edge& e = edges_[eid];
      if (e.a == a && e.b == b) return eid;
    }
  }
  return -1;
}

SurfaceMesh::SurfaceMesh(std::vector<Vec4> positions, std::vector<FaceTri> faces,
                         BoundaryPolicy policy,
                         std::map<std::string, std::vector<int>> tags)
    : positions_(std::move(positions)), policy_(policy) {
  topo_ = MeshTopology::build(std::move(faces), static_cast<int>(positions_.size()));
  if (policy_ == BoundaryPolicy::PinnedBoundary && !tags.count("boundary")) {
    tags["boundary"] = topo_->boundary_vertices();
  }
  tags_ = std::make_shared<const std::map<std::string, std::vector<int>>>(std::move(tags));
}

SurfaceMesh SurfaceMesh::with_positions(std::vector<Vec4> positions) const {
  if (positions.size() != positions_.size()) {
    throw std::invalid_argument("with_positions: vertex count mismatch");
  }
  SurfaceMesh m;
  m.positions_ = std::move(positions);
  m.topo_ = topo_;
  m.policy_ = policy_;
  m.tags_ = tags_;
  return m;
}

const std::vector<int>* SurfaceMesh::tag(const std::string& name) const {
  auto it = tags_->find(name);
  return it == tags_->end() ? nullptr : &it->second;
}

bool SurfaceMesh::vertex_pinned(int v) const {
  return policy_ == BoundaryPolicy::PinnedBoundary && topo_->vertex_on_boundary(v);
}

Vec4 SurfaceMesh::face_barycenter(int f) const {
  const FaceTri& tri = topo_->faces()[f];
  return (positions_[tri[0]] + positions_[tri[1]] + positions_[tri[2]]) / 3.0;
}

double SurfaceMesh::bbox_scale() const {
  if (positions_.empty()) return 0.0;
  Vec4 lo = positions_[0], hi = positions_[0];
  for (const Vec4& p : positions_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double triangle_area(const Vec4& a, const Vec4& b, const Vec4& c) {
  const Vec4 u = b - a;
  const Vec4 v = c - a;
  const double uu = u.squaredNorm();
  const double vv = v.squaredNorm();
  const double uv = u.dot(v);
  const double g = uu * vv - uv * uv;
  return g > 0.0 ? 0.5 * std::sqrt(g) : 0.0;
}

ValidationReport validate_mesh(const SurfaceMesh& mesh, double area_floor_factor) {
  ValidationReport report;
  const MeshTopology& topo = mesh.topology();
  report.violations = topo.structural_violations();

  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!mesh.position(v).allFinite()) {
      report.violations.push_back({Violation::Code::NonfinitePosition, v,
                                   "vertex position is not finite"});
    }
  }

  if (mesh.boundary_policy() == BoundaryPolicy::Closed && topo.boundary_edge_count() > 0) {
    report.violations.push_back({Violation::Code::BoundaryEdgeInClosedMesh, -1,
                                 std::to_string(topo.boundary_edge_count()) +
                                     " boundary edges in a closed mesh"});
  }

  const double scale = mesh.bbox_scale();
  const double floor = area_floor_factor * scale * scale;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const FaceTri& tri = topo.faces()[f];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) continue;  // already reported
    bool indices_ok = true;
    for (int k = 0; k < 3; ++k) {
      indices_ok = indices_ok && tri[k] >= 0 && tri[k] < mesh.vertex_count();
    }
    if (!indices_ok) continue;
    const double area = triangle_area(mesh.position(tri[0]), mesh.position(tri[1]),
                                      mesh.position(tri[2]));
    if (!(area >= floor)) {
      report.violations.push_back({Violation::Code::AreaFloor, f,
                                   "face area below floor"});
    }
  }
  return report;
}

SurfaceMesh translate_mesh(const SurfaceMesh& mesh, const Vec4& offset) {
  std::vector<Vec4> pos = mesh.positions();
  for (Vec4& p : pos) p += offset;
  return mesh.with_positions(std::move(pos));
}

SurfaceMesh scale_mesh(const SurfaceMesh& mesh, double factor, const Vec4& center) {
  std::vector<Vec4> pos = mesh.positions();
  for (Vec4& p : pos) p = center + factor * (p - center);
  return mesh.with_positions(std::move(pos));
}

SurfaceMesh disjoint_union(const SurfaceMesh& a, const SurfaceMesh& b) {
  std::vector<Vec4> pos = a.positions();
  pos.insert(pos.end(), b.positions().begin(), b.positions().end());
  std::vector<FaceTri> faces = a.faces();
  const int off = a.vertex_count();
  for (FaceTri tri : b.faces()) {
    faces.push_back({tri[0] + off, tri[1] + off, tri[2] + off});
  }
  const BoundaryPolicy policy =
      (a.boundary_policy() == BoundaryPolicy::PinnedBoundary ||
       b.boundary_policy() == BoundaryPolicy::PinnedBoundary)
          ? BoundaryPolicy::PinnedBoundary
          : BoundaryPolicy::Closed;
  std::map<std::string, std::vector<int>> tags;
  for (const auto& [name, ids] : a.tags()) tags[name] = ids;
  for (const auto& [name, ids] : b.tags()) {
    auto& dst = tags[name];
    for (int id : ids) dst.push_back(id + off);
  }
  return SurfaceMesh(std::move(pos), std::move(faces), policy, std::move(tags));
}

}  // namespace kf
