#include "dense/dataset/conversation.hpp"

#include "dense/core/error.hpp"

namespace dense::dataset {

const char* to_string(ConversationType t) {
  return t == ConversationType::DetailedDescription ? "detailed_description" : "single_round";
}

std::string answer_letter(const QaPair& qa) {
  if (qa.kind != QaKind::Mcqa || !qa.correct_index || *qa.correct_index < 0 ||
      *qa.correct_index >= static_cast<int>(qa.options.size()) || qa.options.size() > 26) {
    throw Error("INVALID_QA", "not a well-formed multiple-choice pair");
  }
  return std::string(1, static_cast<char>('A' + *qa.correct_index));
}

std::string render_mcqa_question(const QaPair& qa) {
  answer_letter(qa);
  std::string out = qa.question;
  for (std::size_t i = 0; i < qa.options.size(); ++i) {
    out += "\n";
    out += static_cast<char>('A' + i);
    out += ". " + qa.options[i];
  }
  return out;
}

ConversationSample description_sample(std::string sample_id, const AssetId& scene, const std::string& caption) {
  return {std::move(sample_id),
          scene.str(),
          ConversationType::DetailedDescription,
          {{"human", std::string(kPointToken) + "\n" + kDescribePrompt}, {"gpt", caption}}};
}

ConversationSample qa_sample(std::string sample_id, const QaPair& qa) {
  ConversationSample s{std::move(sample_id), qa.scene_id.str(), ConversationType::SingleRound, {}};
  if (qa.kind == QaKind::Mcqa) {
    s.conversations = {{"human", std::string(kPointToken) + "\n" + render_mcqa_question(qa)},
                       {"gpt", "Answer: " + answer_letter(qa)}};
  } else {
    s.conversations = {{"human", std::string(kPointToken) + "\n" + qa.question}, {"gpt", qa.answer}};
  }
  return s;
}

std::vector<std::string> check_sample(const ConversationSample& s) {
  std::vector<std::string> problems;
  if (s.conversations.empty()) problems.push_back("no turns");
  for (std::size_t i = 0; i < s.conversations.size(); ++i) {
    const char* want = i % 2 == 0 ? "human" : "gpt";
    if (s.conversations[i].from != want) problems.push_back("turn " + std::to_string(i) + " is not " + want);
  }
  if (!s.conversations.empty() && s.conversations.front().value.rfind(kPointToken, 0) != 0) {
    problems.push_back("first human turn lacks the point token");
  }
  return problems;
}

void to_json(nlohmann::json& j, const ConversationSample& s) {
  j = nlohmann::json::object();
  j["sample_id"] = s.sample_id;
  j["object_id"] = s.object_id;
  j["conversation_type"] = to_string(s.type);
  j["conversations"] = nlohmann::json::array();
  for (const auto& t : s.conversations) j["conversations"].push_back({{"from", t.from}, {"value", t.value}});
}

}  // namespace dense::dataset
