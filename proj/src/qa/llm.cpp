#include "dense/qa/llm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <thread>

#include "dense/core/digest.hpp"
#include "dense/core/taxonomy.hpp"

namespace dense::qa {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> string_array(const std::map<std::string, std::string>& h, const std::string& key) {
  const auto it = h.find(key);
  if (it == h.end()) return {};
  const auto j = json::parse(it->second, nullptr, false);
  if (!j.is_array()) return {};
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (x.is_string()) out.push_back(x.get<std::string>());
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::vector<std::string> sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t\n");
    if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t\n") - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == '\n') {
      flush();
      continue;
    }
    cur.push_back(c);
    if (c == '.' || c == '!' || c == '?') flush();
  }
  flush();
  return out;
}

json derive(const std::map<std::string, std::string>& h) {
  const std::string category = h.count("category") ? h.at("category") : "";
  const auto transcripts = string_array(h, "transcripts");
  const auto known = string_array(h, "known_objects");
  if (h.count("task") && h.at("task") == "summarize") return {{"text", join(transcripts, "\n")}};
  if (category == "OBJECT_PRESENCE") return {{"objects", known}};
  if (category == "LOCALIZATION") return {{"objects", known.empty() ? json::array() : json::array({known.front()})}};
  if (category == "SIZE_COMPARISON") {
    return {{"objects", known.empty() ? json::array() : json::array({known[std::min<std::size_t>(1, known.size() - 1)]})}};
  }
  if (category == "DISTANCE_REASONING") return {{"objects", known.empty() ? json::array() : json::array({known.back()})}};
  if (category == "SCENE_CLASSIFICATION") {
    const std::string text = lower(join(transcripts, "\n"));
    std::string best;
    std::size_t best_at = std::string::npos;
    for (const auto& s : taxonomy::subcategories()) {
      const auto at = text.find(lower(std::string(s.name)));
      if (at < best_at || (at == best_at && at != std::string::npos && s.name.size() > best.size())) {
        best_at = at;
        best = std::string(s.name);
      }
    }
    if (best.empty() && h.count("subcategory_hint")) best = h.at("subcategory_hint");
    return {{"label", best}};
  }
  if (category == "ANOMALY_DETECTION") {
    static const char* const cues[] = {"unreasonable", "strange", "odd", "weird", "should not", "shouldn't", "out of place"};
    json items = json::array();
    for (const auto& t : transcripts) {
      for (const auto& s : sentences(t)) {
        const std::string l = lower(s);
        if (std::any_of(std::begin(cues), std::end(cues), [&](const char* c) { return l.find(c) != std::string::npos; })) {
          items.push_back(s);
        }
      }
    }
    return {{"items", items}};
  }
  return {{"text", join(transcripts, "\n")}};
}

}  // namespace

std::map<std::string, std::string> parse_request_headers(const std::string& user) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < user.size()) {
    std::size_t end = user.find('\n', pos);
    if (end == std::string::npos) end = user.size();
    const std::string line = user.substr(pos, end - pos);
    const auto colon = line.find(": ");
    if (colon != std::string::npos && colon > 0 &&
        std::all_of(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(colon),
                    [](char c) { return std::islower(static_cast<unsigned char>(c)) || c == '_'; })) {
      out.emplace(line.substr(0, colon), line.substr(colon + 2));
    }
    pos = end + 1;
  }
  return out;
}

MockLlmClient MockLlmClient::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("CONFIG", "cannot open LLM fixture " + path);
  return MockLlmClient(json::parse(in));
}

void MockLlmClient::fail_next(int n, bool retryable) {
  std::lock_guard lock(mu_);
  fail_remaining_ = n;
  fail_retryable_ = retryable;
}

int MockLlmClient::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string MockLlmClient::complete(const std::string&, const std::string& user) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
    if (fail_remaining_ > 0) {
      --fail_remaining_;
      throw LlmError("injected failure", fail_retryable_);
    }
  }
  const auto h = parse_request_headers(user);
  const std::string key = h.count("task") && h.at("task") == "summarize" ? "SUMMARY" : (h.count("category") ? h.at("category") : "");
  const std::string scene = h.count("scene_id") ? h.at("scene_id") : "";
  if (const auto c = fixture_.find(key); c != fixture_.end() && c->is_object()) {
    if (const auto s = c->find(scene); s != c->end()) return s->dump();
  }
  return derive(h).dump();
}

std::string request_digest(const std::string& system, const std::string& user) {
  return sha256_hex(system + "\x1f" + user);
}

JournaledClient::JournaledClient(std::shared_ptr<LlmClient> inner, std::string path, bool replay_only)
    : inner_(std::move(inner)), path_(std::move(path)), replay_only_(replay_only) {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = json::parse(line, nullptr, false);
    // A torn final line from a crash is skipped.
    if (!j.is_object() || !j.contains("digest") || !j.contains("response")) continue;
    entries_.emplace(j["digest"].get<std::string>(), j["response"].get<std::string>());
  }
}

std::size_t JournaledClient::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::string JournaledClient::complete(const std::string& system, const std::string& user) {
  const std::string digest = request_digest(system, user);
  {
    std::lock_guard lock(mu_);
    if (const auto it = entries_.find(digest); it != entries_.end()) return it->second;
  }
  if (replay_only_ || !inner_) throw LlmError("request " + digest.substr(0, 12) + " is not in the journal", false, "JOURNAL_MISS");
  std::string response = inner_->complete(system, user);
  std::lock_guard lock(mu_);
  const auto [it, inserted] = entries_.emplace(digest, response);
  if (inserted) {
    std::ofstream out(path_, std::ios::app);
    out << json{{"digest", digest}, {"response", response}}.dump() << '\n';
    out.flush();
    if (!out) throw Error("IO_ERROR", "cannot append to journal " + path_);
  }
  return it->second;
}

RetryingClient::RetryingClient(std::shared_ptr<LlmClient> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)),
      policy_(policy),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(std::clamp(policy.max_in_flight, 1, 1024)) {}

std::string RetryingClient::complete(const std::string& system, const std::string& user) {
  auto delay = policy_.base_delay;
  for (int attempt = 1;; ++attempt) {
    slots_.acquire();
    try {
      std::string out = inner_->complete(system, user);
      slots_.release();
      return out;
    } catch (const LlmError& e) {
      slots_.release();
      if (!e.retryable() || attempt >= policy_.max_attempts) throw;
    } catch (...) {
      slots_.release();
      throw;
    }
    sleeper_(delay);
    delay = std::min(delay * 2, policy_.max_delay);
  }
}

}  // namespace dense::qa
