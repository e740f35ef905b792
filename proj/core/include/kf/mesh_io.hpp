#pragma once

#include "kf/mesh.hpp"

#include <filesystem>
#include <iosfwd>

namespace kf {

// KF-MESH v1:
//   KF-MESH v1
//   <vertex count> <face count> <boundary_policy>
//   one vertex per line, 4 coordinates, round-trip double formatting
//   one face per line, 3 zero-based indices
//   optional trailing lines: tag <name> <count> <ids...>
//
// OFF / 4OFF files with 4 coordinates per vertex are accepted on read.
void write_mesh(const std::filesystem::path& path, const SurfaceMesh& mesh);
void write_mesh(std::ostream& os, const SurfaceMesh& mesh);
SurfaceMesh read_mesh(const std::filesystem::path& path);
SurfaceMesh read_mesh(std::istream& is, const std::string& origin = "<stream>");

// Shortest text form that parses back to the identical double.
std::string format_double(double x);

}  // namespace kf
