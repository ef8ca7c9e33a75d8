#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dense/core/types.hpp"

namespace dense::prompts {

// Default annotator prompts. Indices into scene() are stable and referenced by
// the QA extraction schemas.
std::span<const std::string_view> part_a();
std::span<const std::string_view> part_b();
std::span<const std::string_view> scene();

enum ScenePrompt : std::size_t {
  kSpaceType = 0,
  kCountObjects = 1,
  kFunctionalGroups = 2,
  kUnreasonable = 3,
  kCenterObject = 4,
  kStandAtCenter = 5,
  kCornerObjects = 6,
  kStandAtCorner = 7,
  kHiddenObjects = 8,
};

std::vector<std::string> defaults_for(PromptProfile profile);

}  // namespace dense::prompts
