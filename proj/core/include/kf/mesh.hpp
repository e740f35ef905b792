#pragma once

#include "kf/types.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kf {

struct Violation {
  enum class Code {
    BadFaceIndex,
    DegenerateFace,
    OverfullEdge,
    BoundaryEdgeInClosedMesh,
    InconsistentOrientation,
    NonmanifoldVertex,
    AreaFloor,
    NonfinitePosition,
    IsolatedVertex,
  };
  Code code;
  long element = -1;  // face, edge endpoint, or vertex index depending on code
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
  std::string to_string() const;
};

// Connectivity derived once from a face list and shared between all meshes
// that keep the same topology (flow snapshots reuse it).
class MeshTopology {
 public:
  struct Edge {
    int a, b;       // a < b
    int f0, f1;     // incident faces, f1 == -1 on boundary edges
  };

  static std::shared_ptr<const MeshTopology> build(std::vector<FaceTri> faces,
                                                   int vertex_count);

  int vertex_count() const { return vertex_count_; }
  int face_count() const { return static_cast<int>(faces_.size()); }
  const std::vector<FaceTri>& faces() const { return faces_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& face_edges() const { return face_edges_; }

  // CSR-style incidence
  const std::vector<int>& vertex_face_offsets() const { return vf_offsets_; }
  const std::vector<int>& vertex_faces() const { return vf_data_; }
  const std::vector<int>& vertex_neighbor_offsets() const { return vn_offsets_; }
  const std::vector<int>& vertex_neighbors() const { return vn_data_; }

  bool vertex_on_boundary(int v) const { return on_boundary_[v] != 0; }
  const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }
  int boundary_edge_count() const { return boundary_edge_count_; }

  // Violations discovered while building (index errors, overfull edges,
  // orientation conflicts, non-manifold vertex fans, isolated vertices).
  const std::vector<Violation>& structural_violations() const { return structural_; }

  // Edge id lookup, -1 if absent.
  int find_edge(int a, int b) const;

 private:
  MeshTopology() = default;

  int vertex_count_ = 0;
  std::vector<FaceTri> faces_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<int> vf_offsets_, vf_data_;
  std::vector<int> vn_offsets_, vn_data_;
  std::vector<char> on_boundary_;
  std::vector<int> boundary_vertices_;
  int boundary_edge_count_ = 0;
  std::vector<Violation> structural_;
};

// Oriented triangle mesh immersed in R^4. Positions are per-instance;
// topology is shared. Instances are immutable after construction, so they
// can be handed freely between threads.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  SurfaceMesh(std::vector<Vec4> positions, std::vector<FaceTri> faces,
              BoundaryPolicy policy = BoundaryPolicy::Closed,
              std::map<std::string, std::vector<int>> tags = {});

  // Shares topology and tags with *this; positions.size() must match.
  SurfaceMesh with_positions(std::vector<Vec4> positions) const;

  int vertex_count() const { return static_cast<int>(positions_.size()); }
  int face_count() const { return topo_ ? topo_->face_count() : 0; }
  const std::vector<Vec4>& positions() const { return positions_; }
  const Vec4& position(int v) const { return positions_[v]; }
  const std::vector<FaceTri>& faces() const { return topo_->faces(); }
  const MeshTopology& topology() const { return *topo_; }
  std::shared_ptr<const MeshTopology> topology_ptr() const { return topo_; }
  BoundaryPolicy boundary_policy() const { return policy_; }

  const std::map<std::string, std::vector<int>>& tags() const { return *tags_; }
  const std::vector<int>* tag(const std::string& name) const;

  // True for vertices the flow holds fixed (boundary vertices under the
  // pinned-boundary policy).
  bool vertex_pinned(int v) const;

  Vec4 face_barycenter(int f) const;
  double bbox_scale() const;  // diagonal of the axis-aligned bounding box

 private:
  std::vector<Vec4> positions_;
  std::shared_ptr<const MeshTopology> topo_;
  BoundaryPolicy policy_ = BoundaryPolicy::Closed;
  std::shared_ptr<const std::map<std::string, std::vector<int>>> tags_;
};

// Reports every violated invariant; never throws. area_floor_factor scales
// with bbox_scale()^2 as the minimum admissible triangle area.
ValidationReport validate_mesh(const SurfaceMesh& mesh,
                               double area_floor_factor = 1e-14);

double triangle_area(const Vec4& a, const Vec4& b, const Vec4& c);

// Rigid/affine helpers used by scenarios and the rescaling machinery.
SurfaceMesh translate_mesh(const SurfaceMesh& mesh, const Vec4& offset);
SurfaceMesh scale_mesh(const SurfaceMesh& mesh, double factor,
                       const Vec4& center = Vec4::Zero());
SurfaceMesh disjoint_union(const SurfaceMesh& a, const SurfaceMesh& b);

}  // namespace kf
