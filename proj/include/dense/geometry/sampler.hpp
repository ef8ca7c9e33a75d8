#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dense/core/rng.hpp"
#include "dense/core/types.hpp"
#include "dense/geometry/mesh.hpp"

namespace dense::geometry {

struct SamplerConfig {
  std::size_t n_points = kDefaultCloudPoints;
  std::uint64_t seed = 0;
  std::vector<std::string> ground_exclude_patterns{"ground", "floor", "plane"};
};

struct Barycentric {
  double r1 = 0, r2 = 0, r3 = 0;
};

// The fold: (r1, r2) outside the lower triangle are reflected back.
Barycentric fold_weights(double r1, double r2);

struct TriangleSample {
  Vec3 position;
  Barycentric weights;
};

TriangleSample point_from_weights(Vec3 v1, Vec3 v2, Vec3 v3, Barycentric w);
TriangleSample sample_point_on_triangle(Vec3 v1, Vec3 v2, Vec3 v3, Rng& rng);

// Largest-remainder apportionment of n over non-negative weights; ties go to
// the lower index. Sums to n exactly whenever some weight is positive.
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t n);

bool is_ground(const TriangleMesh& mesh, const std::vector<std::string>& patterns);

// Errors: EMPTY_SCENE, ZERO_AREA, INVALID_CONFIG.
PointCloud sample_scene(const std::vector<TriangleMesh>& meshes, const SamplerConfig& config,
                        AssetId scene_id = {});

// Meshes whose node or an ancestor matches node_path as a '/'-segment suffix.
// Errors: OBJECT_NOT_FOUND.
std::vector<TriangleMesh> isolate_object(const std::vector<TriangleMesh>& meshes, const std::string& node_path);

}  // namespace dense::geometry
