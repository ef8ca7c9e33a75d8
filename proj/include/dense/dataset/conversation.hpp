#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dense/core/types.hpp"

namespace dense::dataset {

inline constexpr const char* kPointToken = "<point>";
inline constexpr const char* kDescribePrompt = "Describe this scene in detail.";

enum class ConversationType { DetailedDescription, SingleRound };

struct Turn {
  std::string from;  // "human" or "gpt"
  std::string value;
};

struct ConversationSample {
  std::string sample_id;
  std::string object_id;  // scene name
  ConversationType type = ConversationType::SingleRound;
  std::vector<Turn> conversations;
};

const char* to_string(ConversationType t);

// "A. ...\nB. ..." appended to the question.
std::string render_mcqa_question(const QaPair& qa);
std::string answer_letter(const QaPair& qa);

ConversationSample description_sample(std::string sample_id, const AssetId& scene, const std::string& caption);
// OEQA answers verbatim; MCQA answers as "Answer: X".
ConversationSample qa_sample(std::string sample_id, const QaPair& qa);

// Empty when the sample is well formed: the first human turn begins with the
// point token and turns alternate starting with human.
std::vector<std::string> check_sample(const ConversationSample& s);

void to_json(nlohmann::json& j, const ConversationSample& s);

}  // namespace dense::dataset
