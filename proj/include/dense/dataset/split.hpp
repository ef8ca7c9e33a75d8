#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dense/core/ids.hpp"

namespace dense::dataset {

struct SceneLabel {
  AssetId scene_id;
  std::string subcategory;
};

// Both lists sorted by id.
struct Split {
  std::vector<AssetId> train;
  std::vector<AssetId> test;
};

// Reserves `per_subcategory_test` scenes of every subcategory for test. The
// result does not depend on input order. Errors: SUBCATEGORY_TOO_SMALL,
// DUPLICATE_SCENE.
Split scene_balanced_split(const std::vector<SceneLabel>& scenes, std::size_t per_subcategory_test,
                           std::uint64_t seed);

}  // namespace dense::dataset
