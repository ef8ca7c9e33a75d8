#include "dense/qa/schema.hpp"

#include <array>

#include "dense/core/prompts.hpp"

namespace dense::qa {

namespace {

const char* const kLabelFormat =
    "Reply with a JSON object {\"label\": \"...\"} whose label is exactly one of the listed scene types.";
const char* const kListFormat =
    "Reply with a JSON object {\"objects\": [\"...\", ...]} listing every object named in the answer, one entry per "
    "distinct object, using short noun phrases.";
const char* const kSingleFormat =
    "Reply with a JSON object {\"objects\": [\"...\"]} containing exactly the one object that answers the question.";
const char* const kItemsFormat =
    "Reply with a JSON object {\"items\": [\"...\", ...]}, one short statement per distinct issue; use an empty list "
    "if the annotators report none.";
const char* const kTextFormat = "Reply with a JSON object {\"text\": \"...\"}.";

std::string extractor(const char* format) {
  return std::string(
             "You extract structured answers from spoken descriptions of one 3D scene. Several annotators may have "
             "described the same scene; combine what they agree on and keep the language of the transcripts. ") +
         format;
}

const std::array<ExtractionSchema, 7>& table() {
  static const auto t = [] {
    const auto p = prompts::scene();
    return std::array<ExtractionSchema, 7>{{
        {QaCategory::SceneClassification, std::string(p[prompts::kSpaceType]), AnswerShape::Label,
         extractor(kLabelFormat)},
        {QaCategory::ObjectPresence, std::string(p[prompts::kCountObjects]), AnswerShape::ObjectList,
         extractor(kListFormat)},
        {QaCategory::Localization, std::string(p[prompts::kCenterObject]), AnswerShape::ObjectList,
         extractor(kSingleFormat)},
        {QaCategory::SizeComparison,
         "If you are standing at the center object, which object is larger than the center object?",
         AnswerShape::ObjectList, extractor(kSingleFormat)},
        {QaCategory::DistanceReasoning,
         "If you are standing at the center object, measuring from the closest point of each object, which object is "
         "closest to you?",
         AnswerShape::ObjectList, extractor(kSingleFormat)},
        {QaCategory::AnomalyDetection, std::string(p[prompts::kUnreasonable]), AnswerShape::FreeText,
         extractor(kItemsFormat)},
        {QaCategory::DenseDescription, "Describe the objects in this scene in detail.", AnswerShape::FreeText,
         extractor(kTextFormat)},
    }};
  }();
  return t;
}

}  // namespace

std::span<const ExtractionSchema> schemas() { return table(); }

const ExtractionSchema& schema_for(QaCategory category) { return table()[static_cast<std::size_t>(category)]; }

}  // namespace dense::qa
