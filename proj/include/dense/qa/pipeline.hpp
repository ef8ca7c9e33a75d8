#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dense/core/types.hpp"
#include "dense/qa/llm.hpp"

namespace dense::qa {

struct ObjectTranscripts {
  ObjectId object_id;
  std::string name;
  std::vector<std::string> texts;
};

// All transcripts of one scene in one language.
struct SceneTranscriptBundle {
  AssetId scene_id;
  std::string language;
  std::vector<std::string> scene_transcripts;
  std::vector<ObjectTranscripts> object_transcripts;  // asset object order
  std::vector<std::string> known_objects;             // names of the asset's objects
  std::optional<std::string> subcategory_hint;        // from scene metadata
};

// Errors: EMPTY_INPUT, LLM_CLIENT_ERROR.
Caption summarize_captions(const AssetId& asset_id, const std::string& language,
                           const std::vector<std::pair<RecordingId, std::string>>& transcripts, LlmClient& client);

struct SceneExtraction {
  AssetId scene_id;
  std::string language;
  std::vector<QaPair> oeqa;
  std::vector<std::string> objects;  // identified by the count-and-identify answer
  std::optional<std::string> anomaly_answer;
  std::vector<std::string> anomaly_items;
};

// One OEQA per category whose source transcripts are present. Errors:
// MISSING_SOURCE (no transcripts at all), BAD_LLM_RESPONSE, LLM_CLIENT_ERROR.
SceneExtraction extract_oeqa(const SceneTranscriptBundle& bundle, LlmClient& client);

// First JSON object in a model reply, tolerating surrounding prose or fences.
std::optional<nlohmann::json> json_payload(const std::string& reply);

}  // namespace dense::qa
