#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dense::geometry {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Column-major, as stored in glTF: element (row r, col c) is m[c * 4 + r].
using Mat4 = std::array<double, 16>;

inline constexpr Mat4 kIdentity = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

Mat4 multiply(const Mat4& a, const Mat4& b);
Vec3 transform_point(const Mat4& m, Vec3 p);
bool is_affine(const Mat4& m);
// Local matrix from glTF translation, rotation quaternion (x, y, z, w) and scale.
Mat4 compose_trs(const std::array<double, 3>& t, const std::array<double, 4>& q, const std::array<double, 3>& s);

// 8-bit RGBA, rows top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;
};

struct Material {
  std::shared_ptr<const Image> base_color_texture;
  std::array<double, 4> base_color_factor{1, 1, 1, 1};
};

struct TriangleMesh {
  std::vector<std::array<float, 3>> vertices;  // node-local
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::optional<std::vector<std::array<float, 2>>> uvs;
  Material material;
  std::string node_name;
  std::string node_path;  // ancestor names joined by '/'
  Mat4 world_transform = kIdentity;

  Vec3 world_vertex(std::uint32_t i) const;
};

}  // namespace dense::geometry
