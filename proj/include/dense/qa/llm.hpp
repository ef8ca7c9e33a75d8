#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "dense/core/error.hpp"

namespace dense::qa {

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& system, const std::string& user) = 0;
};

class LlmError : public Error {
 public:
  LlmError(std::string detail, bool retryable, std::string code = "LLM_CLIENT_ERROR")
      : Error(std::move(code), std::move(detail)), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

// Header lines of a request's user message ("key: value"); the transcripts
// line carries a JSON array.
std::map<std::string, std::string> parse_request_headers(const std::string& user);

// Deterministic double. Answers from a fixture keyed by (category, scene_id):
//   {"OBJECT_PRESENCE": {"scene-1": {"objects": [...]}}, ...}
// and otherwise derives a payload from the request itself, see llm.cpp.
class MockLlmClient final : public LlmClient {
 public:
  MockLlmClient() = default;
  explicit MockLlmClient(nlohmann::json fixture) : fixture_(std::move(fixture)) {}
  static MockLlmClient from_file(const std::string& path);

  void fail_next(int n, bool retryable = true);
  int calls() const;

  std::string complete(const std::string& system, const std::string& user) override;

 private:
  nlohmann::json fixture_ = nlohmann::json::object();
  mutable std::mutex mu_;
  int fail_remaining_ = 0;
  bool fail_retryable_ = true;
  int calls_ = 0;
};

std::string request_digest(const std::string& system, const std::string& user);

// Append-only JSONL journal of {digest, response}. Requests already journaled
// are answered from the journal; with replay_only, a miss is an error
// (JOURNAL_MISS) instead of a call to `inner`.
class JournaledClient final : public LlmClient {
 public:
  JournaledClient(std::shared_ptr<LlmClient> inner, std::string path, bool replay_only = false);

  std::string complete(const std::string& system, const std::string& user) override;
  std::size_t size() const;

 private:
  std::shared_ptr<LlmClient> inner_;
  std::string path_;
  bool replay_only_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> entries_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{200};
  std::chrono::milliseconds max_delay{5000};
  int max_in_flight = 4;
};

// Exponential backoff on retryable LlmError, bounded concurrent requests.
class RetryingClient final : public LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingClient(std::shared_ptr<LlmClient> inner, RetryPolicy policy = {}, Sleeper sleeper = {});

  std::string complete(const std::string& system, const std::string& user) override;

 private:
  std::shared_ptr<LlmClient> inner_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> slots_;
};

}  // namespace dense::qa
