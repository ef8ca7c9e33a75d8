#pragma once

#include <span>
#include <string>

#include "dense/core/types.hpp"

namespace dense::qa {

enum class AnswerShape { Label, ObjectList, FreeText };

struct ExtractionSchema {
  QaCategory category;
  std::string question;  // OEQA question text, built from the scene prompts
  AnswerShape shape;
  std::string instructions;  // system prompt for the extractor
};

// One per category, in QaCategory order.
std::span<const ExtractionSchema> schemas();
const ExtractionSchema& schema_for(QaCategory category);

inline constexpr const char* kNoAnomaly = "No unreasonable aspects";
inline constexpr const char* kPresenceQuestion = "Which of the following objects can be found in the scene?";

}  // namespace dense::qa
