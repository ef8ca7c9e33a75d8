#include "dense/core/prompts.hpp"

#include <array>

namespace dense::prompts {

namespace {

using namespace std::string_view_literals;

constexpr std::array kPartA{
    "What is the image at first glance?"sv,
    "What are the objects and their counts?"sv,
    "What does the text say?"sv,
    "What are the positions of the objects?"sv,
    "What subtle details are noticeable?"sv,
    "What is in the background?"sv,
    "What is the style and color?"sv,
    "Is there any contextual information such as location that might help to understand the image?"sv,
    "Is there anything that can be inferred from the image?"sv,
    "Is this image culturally distinct? If yes, please explain why you think this image is culturally distinct."sv,
};

constexpr std::array kPartB{
    "What is your initial impression of the image? Describe what you see."sv,
    "What text content, if any, is present in the image?"sv,
    "Are there any subtle details or nuances that stand out to you?"sv,
    "What elements or features are present in the background?"sv,
    "Does this image evoke any emotions?"sv,
    "Can you identify a specific country, region, or community this image likely comes from?"sv,
    "Is this object, activity, or setting known by different names or represented differently in other regions or dialects?"sv,
    "Are there any common misconceptions about the contents of this image?"sv,
};

constexpr std::array kScene{
    "What type of room or space is this? What is the primary function or purpose of this scene?"sv,
    "Count and identify all the objects visible in the scene. (Note: Similar objects can be grouped together even if they differ in style, e.g., you can say \"two chairs\" for chairs of different styles. However, please describe objects separately even if they were combined as individual objects earlier, e.g., count \"bowl\" and \"spoon\" separately rather than as \"bowl with spoon\".)"sv,
    "Which objects in this scene naturally work together or form functional groups? For each group, explain how someone would naturally use these objects in order. e.g. \"A person would first turn on the lamp, then sit down on chairand open the book.\""sv,
    "What unreasonable aspects can you find in the scene? If there are none, please state so."sv,
    "After removing the ground plane from the scene, which object is positioned in the center of the scene?"sv,
    "If you are standing at the center object you mentioned, describe 1) what objects you would see. Use position words such as in front of, to the right, etc. 2) measuring from the closest point of each object, which objects would be closest/farthest to you. 3) which objects are larger/smaller than the center object. (Format: If I am standing at [object] and facing [object], I would see ...)"sv,
    "After removing the ground plane from the scene, what objects are located at the corners of the scene?"sv,
    "If you are standing at one of the corner objects you mentioned, describe 1) what objects you would see. Use position words such as in front of, to the right, etc. 2) measuring from the closest point of each object, which objects would be closest/farthest to you. 3) which objects are larger/smaller than the center object. (Format: If I am standing at [object] and facing [object], I would see ...)"sv,
    "If you are in the scene, are there any objects that are completely or partially hidden from certain viewing angles? Describe the situation in detail. (Format: If I stand/sit/kneel/... at [object], facing [object], I can not see ..., because ...)"sv,
};

}  // namespace

std::span<const std::string_view> part_a() { return kPartA; }
std::span<const std::string_view> part_b() { return kPartB; }
std::span<const std::string_view> scene() { return kScene; }

std::vector<std::string> defaults_for(PromptProfile profile) {
  std::span<const std::string_view> src;
  switch (profile) {
    case PromptProfile::PartA:
      src = part_a();
      break;
    case PromptProfile::PartB:
      src = part_b();
      break;
    case PromptProfile::Scene:
      src = scene();
      break;
  }
  return {src.begin(), src.end()};
}

}  // namespace dense::prompts
