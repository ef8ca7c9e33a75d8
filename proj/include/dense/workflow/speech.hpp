#pragma once

#include <map>
#include <mutex>
#include <string>
#include <string_view>

#include "dense/core/error.hpp"

namespace dense::workflow {

struct Transcription {
  std::string text;
  double duration_s = 0.0;
};

// Raised by adapters. Retryable failures (timeouts, 429, 5xx) are retried by
// the job runner; the rest fail the job.
class SpeechError : public Error {
 public:
  SpeechError(std::string detail, bool retryable)
      : Error("STT_FAILED", std::move(detail)), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class SpeechToText {
 public:
  virtual ~SpeechToText() = default;
  virtual Transcription transcribe(std::string_view audio, std::string_view language) = 0;
};

// Output depends only on the audio bytes: a fixture keyed by the sha256 hex
// digest, else "transcript <first 12 hex digits>".
class MockSpeechToText final : public SpeechToText {
 public:
  MockSpeechToText() = default;
  explicit MockSpeechToText(std::map<std::string, std::string> by_digest) : by_digest_(std::move(by_digest)) {}

  // Fixture file: {"<sha256 hex>": "text", ...}
  static MockSpeechToText from_file(const std::string& path);

  void set(std::string digest, std::string text);
  // The next `n` calls throw SpeechError(retryable).
  void fail_next(int n, bool retryable = true);
  int calls() const;

  Transcription transcribe(std::string_view audio, std::string_view language) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> by_digest_;
  int fail_remaining_ = 0;
  bool fail_retryable_ = true;
  int calls_ = 0;
};

}  // namespace dense::workflow
