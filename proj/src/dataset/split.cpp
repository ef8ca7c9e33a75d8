#include "dense/dataset/split.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dense/core/error.hpp"
#include "dense/core/rng.hpp"

namespace dense::dataset {

Split scene_balanced_split(const std::vector<SceneLabel>& scenes, std::size_t per_subcategory_test,
                           std::uint64_t seed) {
  std::map<std::string, std::vector<AssetId>> groups;
  std::set<AssetId> seen;
  for (const auto& s : scenes) {
    if (!seen.insert(s.scene_id).second) {
      throw Error("DUPLICATE_SCENE", "scene " + s.scene_id.str() + " listed twice", {{"scene_id", s.scene_id.str()}});
    }
    groups[s.subcategory].push_back(s.scene_id);
  }

  Split out;
  for (auto& [name, ids] : groups) {
    if (ids.size() < per_subcategory_test) {
      throw Error("SUBCATEGORY_TOO_SMALL",
                  "subcategory '" + name + "' has " + std::to_string(ids.size()) + " scene(s), " +
                      std::to_string(per_subcategory_test) + " required for test",
                  {{"subcategory", name}, {"available", ids.size()}, {"required", per_subcategory_test}});
    }
    // Canonical order first so the shuffle only depends on the seed.
    std::sort(ids.begin(), ids.end());
    Rng rng(derive_seed(seed, name));
    rng.shuffle(ids);
    out.test.insert(out.test.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(per_subcategory_test));
    out.train.insert(out.train.end(), ids.begin() + static_cast<std::ptrdiff_t>(per_subcategory_test), ids.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace dense::dataset
