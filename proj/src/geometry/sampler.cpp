#include "dense/geometry/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "dense/core/error.hpp"

namespace dense::geometry {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t slash = path.find('/', start);
    const std::size_t end = slash == std::string_view::npos ? path.size() : slash;
    if (end > start) out.emplace_back(path.substr(start, end - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::array<double, 3> texel(const Image& img, double u, double v) {
  u -= std::floor(u);
  v -= std::floor(v);
  const int col = std::min(static_cast<int>(u * img.width), img.width - 1);
  const int row = std::min(static_cast<int>(v * img.height), img.height - 1);
  const std::size_t at = (static_cast<std::size_t>(row) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(col)) * 4;
  return {img.rgba[at] / 255.0, img.rgba[at + 1] / 255.0, img.rgba[at + 2] / 255.0};
}

}  // namespace

Barycentric fold_weights(double r1, double r2) {
  if (r1 + r2 > 1.0) {
    r1 = 1.0 - r1;
    r2 = 1.0 - r2;
  }
  return {r1, r2, 1.0 - r1 - r2};
}

TriangleSample point_from_weights(Vec3 v1, Vec3 v2, Vec3 v3, Barycentric w) {
  return {w.r1 * v1 + w.r2 * v2 + w.r3 * v3, w};
}

TriangleSample sample_point_on_triangle(Vec3 v1, Vec3 v2, Vec3 v3, Rng& rng) {
  const double r1 = rng.uniform01();
  const double r2 = rng.uniform01();
  return point_from_weights(v1, v2, v3, fold_weights(r1, r2));
}

std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t n) {
  std::vector<std::size_t> counts(weights.size(), 0);
  double total = 0;
  for (double w : weights) {
    if (w > 0 && std::isfinite(w)) total += w;
  }
  if (!(total > 0) || n == 0) return counts;

  std::vector<double> frac(weights.size(), 0.0);
  std::vector<std::size_t> positive;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (!(w > 0 && std::isfinite(w))) continue;
    const double quota = static_cast<double>(n) * (w / total);
    const double fl = std::floor(quota);
    counts[i] = static_cast<std::size_t>(fl);
    frac[i] = quota - fl;
    assigned += counts[i];
    positive.push_back(i);
  }
  std::stable_sort(positive.begin(), positive.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % positive.size()) {
    ++counts[positive[k]];
    ++assigned;
  }
  // Rounding can push the floors past n; take back from the smallest remainders.
  for (std::size_t k = positive.size(); assigned > n;) {
    k = k == 0 ? positive.size() - 1 : k - 1;
    if (counts[positive[k]] > 0) {
      --counts[positive[k]];
      --assigned;
    }
  }
  return counts;
}

bool is_ground(const TriangleMesh& mesh, const std::vector<std::string>& patterns) {
  const std::string name = lower(mesh.node_name);
  return std::any_of(patterns.begin(), patterns.end(), [&](const std::string& p) {
    return !p.empty() && name.find(lower(p)) != std::string::npos;
  });
}

PointCloud sample_scene(const std::vector<TriangleMesh>& meshes, const SamplerConfig& config, AssetId scene_id) {
  if (config.n_points < 1) throw Error("INVALID_CONFIG", "n_points must be at least 1");

  struct Tri {
    const TriangleMesh* mesh;
    std::size_t index;
  };
  std::vector<Tri> tris;
  std::vector<double> areas;
  std::vector<std::vector<Vec3>> world;
  std::vector<const TriangleMesh*> kept;
  for (const auto& m : meshes) {
    if (!is_ground(m, config.ground_exclude_patterns)) kept.push_back(&m);
  }
  if (kept.empty()) throw Error("EMPTY_SCENE", "no mesh left after ground exclusion");

  std::vector<std::size_t> world_slot;
  for (const TriangleMesh* m : kept) {
    std::vector<Vec3> w(m->vertices.size());
    for (std::uint32_t i = 0; i < w.size(); ++i) w[i] = m->world_vertex(i);
    for (std::size_t t = 0; t < m->triangles.size(); ++t) {
      const auto& tri = m->triangles[t];
      areas.push_back(0.5 * std::sqrt(dot(cross(w[tri[1]] - w[tri[0]], w[tri[2]] - w[tri[0]]),
                                          cross(w[tri[1]] - w[tri[0]], w[tri[2]] - w[tri[0]]))));
      tris.push_back({m, t});
      world_slot.push_back(world.size());
    }
    world.push_back(std::move(w));
  }
  const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
  if (!(total > 0) || !std::isfinite(total)) throw Error("ZERO_AREA", "scene has no surface area to sample");

  const auto counts = apportion(areas, config.n_points);
  PointCloud cloud;
  cloud.scene_id = std::move(scene_id);
  cloud.n = config.n_points;
  cloud.points.reserve(cloud.n * kCloudColumns);
  Rng rng(config.seed);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    const TriangleMesh& m = *tris[i].mesh;
    const auto& tri = m.triangles[tris[i].index];
    const auto& w = world[world_slot[i]];
    const bool textured = m.material.base_color_texture && m.uvs;
    for (std::size_t k = 0; k < counts[i]; ++k) {
      const auto s = sample_point_on_triangle(w[tri[0]], w[tri[1]], w[tri[2]], rng);
      std::array<double, 3> rgb;
      if (textured) {
        const auto& uv = *m.uvs;
        const double u = s.weights.r1 * uv[tri[0]][0] + s.weights.r2 * uv[tri[1]][0] + s.weights.r3 * uv[tri[2]][0];
        const double v = s.weights.r1 * uv[tri[0]][1] + s.weights.r2 * uv[tri[1]][1] + s.weights.r3 * uv[tri[2]][1];
        rgb = texel(*m.material.base_color_texture, u, v);
      } else {
        const auto& f = m.material.base_color_factor;
        rgb = {clamp01(f[0]), clamp01(f[1]), clamp01(f[2])};
      }
      cloud.points.insert(cloud.points.end(),
                          {static_cast<float>(s.position.x), static_cast<float>(s.position.y),
                           static_cast<float>(s.position.z), static_cast<float>(rgb[0]), static_cast<float>(rgb[1]),
                           static_cast<float>(rgb[2])});
    }
  }
  return cloud;
}

std::vector<TriangleMesh> isolate_object(const std::vector<TriangleMesh>& meshes, const std::string& node_path) {
  const auto pattern = segments(node_path);
  std::vector<TriangleMesh> out;
  if (!pattern.empty()) {
    for (const auto& m : meshes) {
      const auto segs = segments(m.node_path);
      for (std::size_t end = pattern.size(); end <= segs.size(); ++end) {
        if (std::equal(pattern.begin(), pattern.end(), segs.begin() + static_cast<std::ptrdiff_t>(end - pattern.size()))) {
          out.push_back(m);
          break;
        }
      }
    }
  }
  if (out.empty()) throw Error("OBJECT_NOT_FOUND", "no node matches '" + node_path + "'");
  return out;
}

}  // namespace dense::geometry
