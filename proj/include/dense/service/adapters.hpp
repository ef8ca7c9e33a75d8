#pragma once

#include <string>

#include "dense/qa/llm.hpp"
#include "dense/workflow/speech.hpp"

namespace dense::service {

struct Endpoint {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key;
  std::string model;
  int timeout_s = 120;
};

// OpenAI-compatible /chat/completions. Network failures, 429 and 5xx raise a
// retryable LlmError; other statuses and malformed bodies do not.
class ChatCompletionsClient final : public qa::LlmClient {
 public:
  explicit ChatCompletionsClient(Endpoint endpoint);
  std::string complete(const std::string& system, const std::string& user) override;

 private:
  Endpoint ep_;
};

// OpenAI-compatible /audio/transcriptions (multipart upload).
class TranscriptionsClient final : public workflow::SpeechToText {
 public:
  explicit TranscriptionsClient(Endpoint endpoint);
  workflow::Transcription transcribe(std::string_view audio, std::string_view language) override;

 private:
  Endpoint ep_;
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

// Errors: CONFIG.
ParsedUrl parse_url(const std::string& url);

}  // namespace dense::service
