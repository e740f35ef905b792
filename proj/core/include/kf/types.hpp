#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>

namespace kf {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

using FaceTri = std::array<int, 3>;

// Ambient coordinate convention: (x1, y1, x2, y2) with z1 = x1 + i y1,
// z2 = x2 + i y2 identifying R^4 with C^2.
inline constexpr int kAxisX1 = 0;
inline constexpr int kAxisY1 = 1;
inline constexpr int kAxisX2 = 2;
inline constexpr int kAxisY2 = 3;

enum class BoundaryPolicy : std::uint8_t { Closed, PinnedBoundary };

std::string to_string(BoundaryPolicy p);
bool parse_boundary_policy(const std::string& text, BoundaryPolicy& out);

}  // namespace kf
