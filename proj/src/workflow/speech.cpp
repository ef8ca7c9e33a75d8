#include "dense/workflow/speech.hpp"

#include <fstream>

#include <json.hpp>

#include "dense/core/digest.hpp"
#include "dense/workflow/audio.hpp"

namespace dense::workflow {

MockSpeechToText MockSpeechToText::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("CONFIG", "cannot open STT fixture " + path);
  const auto j = nlohmann::json::parse(in);
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : j.items()) m[k] = v.get<std::string>();
  return MockSpeechToText(std::move(m));
}

void MockSpeechToText::set(std::string digest, std::string text) {
  std::lock_guard lock(mu_);
  by_digest_[std::move(digest)] = std::move(text);
}

void MockSpeechToText::fail_next(int n, bool retryable) {
  std::lock_guard lock(mu_);
  fail_remaining_ = n;
  fail_retryable_ = retryable;
}

int MockSpeechToText::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

Transcription MockSpeechToText::transcribe(std::string_view audio, std::string_view) {
  const std::string digest = sha256_hex(audio);
  std::lock_guard lock(mu_);
  ++calls_;
  if (fail_remaining_ > 0) {
    --fail_remaining_;
    throw SpeechError("injected failure", fail_retryable_);
  }
  Transcription t;
  const auto it = by_digest_.find(digest);
  t.text = it != by_digest_.end() ? it->second : "transcript " + digest.substr(0, 12);
  try {
    t.duration_s = audio::probe(audio).duration_s;
  } catch (const Error&) {
    t.duration_s = 0.0;
  }
  return t;
}

}  // namespace dense::workflow
