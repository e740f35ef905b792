#include "kf/mesh_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kf {

std::string format_double(double x) {
  char buf[40];
  // %.17g always round-trips; try the shorter %.15g first.
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  if (std::strtod(buf, nullptr) != x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
  }
  return buf;
}

void write_mesh(std::ostream& os, const SurfaceMesh& mesh) {
  os << "KF-MESH v1\n";
  os << mesh.vertex_count() << ' ' << mesh.face_count() << ' '
     << to_string(mesh.boundary_policy()) << '\n';
  for (const Vec4& p : mesh.positions()) {
    os << format_double(p[0]) << ' ' << format_double(p[1]) << ' '
       << format_double(p[2]) << ' ' << format_double(p[3]) << '\n';
  }
  for (const FaceTri& f : mesh.faces()) {
    os << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  }
  for (const auto& [name, ids] : mesh.tags()) {
    os << "tag " << name << ' ' << ids.size();
    for (int id : ids) os << ' ' << id;
    os << '\n';
  }
}

void write_mesh(const std::filesystem::path& path, const SurfaceMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  write_mesh(os, mesh);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw std::runtime_error(origin + ": " + what);
}

std::string next_content_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  return {};
}

SurfaceMesh read_kf_mesh(std::istream& is, const std::string& origin) {
  std::string header = next_content_line(is);
  std::istringstream hs(header);
  long nv = -1, nf = -1;
  std::string policy_text;
  hs >> nv >> nf >> policy_text;
  BoundaryPolicy policy;
  if (!hs || nv < 0 || nf < 0 || !parse_boundary_policy(policy_text, policy)) {
    fail(origin, "bad KF-MESH header line: '" + header + "'");
  }
  std::vector<Vec4> pos(nv);
  for (long i = 0; i < nv; ++i) {
    std::istringstream ls(next_content_line(is));
    if (!(ls >> pos[i][0] >> pos[i][1] >> pos[i][2] >> pos[i][3])) {
      fail(origin, "bad vertex line " + std::to_string(i));
    }
  }
  std::vector<FaceTri> faces(nf);
  for (long i = 0; i < nf; ++i) {
    std::istringstream ls(next_content_line(is));
    if (!(ls >> faces[i][0] >> faces[i][1] >> faces[i][2])) {
      fail(origin, "bad face line " + std::to_string(i));
    }
  }
  std::map<std::string, std::vector<int>> tags;
  for (;;) {
    std::string line = next_content_line(is);
    if (line.empty()) break;
    std::istringstream ls(line);
    std::string kw, name;
    std::size_t count = 0;
    if (!(ls >> kw >> name >> count) || kw != "tag") {
      fail(origin, "unexpected trailing line: '" + line + "'");
    }
    std::vector<int> ids(count);
    for (std::size_t k = 0; k < count; ++k) {
      if (!(ls >> ids[k])) fail(origin, "truncated tag '" + name + "'");
    }
    tags[name] = std::move(ids);
  }
  return SurfaceMesh(std::move(pos), std::move(faces), policy, std::move(tags));
}

SurfaceMesh read_off_mesh(std::istream& is, const std::string& origin) {
  std::string counts = next_content_line(is);
  std::istringstream cs(counts);
  long nv = -1, nf = -1, ne = 0;
  if (!(cs >> nv >> nf >> ne) || nv < 0 || nf < 0) {
    fail(origin, "bad OFF counts line: '" + counts + "'");
  }
  std::vector<Vec4> pos(nv, Vec4::Zero());
  for (long i = 0; i < nv; ++i) {
    std::istringstream ls(next_content_line(is));
    // 4 coordinates expected; a third-coordinate-only file embeds into R^3 x {0}.
    double x = 0, y = 0, z = 0, w = 0;
    if (!(ls >> x >> y >> z)) fail(origin, "bad OFF vertex line " + std::to_string(i));
    if (!(ls >> w)) w = 0.0;
    pos[i] = Vec4(x, y, z, w);
  }
  std::vector<FaceTri> faces(nf);
  for (long i = 0; i < nf; ++i) {
    std::istringstream ls(next_content_line(is));
    int cnt = 0;
    if (!(ls >> cnt) || cnt != 3) fail(origin, "OFF face " + std::to_string(i) + " is not a triangle");
    if (!(ls >> faces[i][0] >> faces[i][1] >> faces[i][2])) {
      fail(origin, "bad OFF face line " + std::to_string(i));
    }
  }
  return SurfaceMesh(std::move(pos), std::move(faces));
}

}  // namespace

SurfaceMesh read_mesh(std::istream& is, const std::string& origin) {
  const std::string magic = next_content_line(is);
  if (magic.rfind("KF-MESH", 0) == 0) {
    if (magic != "KF-MESH v1") fail(origin, "unsupported KF-MESH version: '" + magic + "'");
    return read_kf_mesh(is, origin);
  }
  if (magic == "OFF" || magic == "4OFF") {
    return read_off_mesh(is, origin);
  }
  fail(origin, "unrecognized mesh header: '" + magic + "'");
}

SurfaceMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  return read_mesh(is, path.string());
}

}  // namespace kf
