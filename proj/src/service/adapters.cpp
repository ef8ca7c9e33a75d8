#include "dense/service/adapters.hpp"

#include <httplib.h>

#include "dense/workflow/audio.hpp"

namespace dense::service {

using nlohmann::json;

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("CONFIG", "endpoint '" + url + "' lacks a scheme");
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error("CONFIG", "unsupported scheme '" + scheme + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  if (out.origin.size() <= scheme_end + 3) throw Error("CONFIG", "endpoint '" + url + "' lacks a host");
  return out;
}

namespace {

httplib::Client make_client(const Endpoint& ep, const ParsedUrl& url) {
  httplib::Client cli(url.origin);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(ep.timeout_s);
  cli.set_write_timeout(ep.timeout_s);
  if (!ep.api_key.empty()) cli.set_bearer_token_auth(ep.api_key);
  return cli;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string snippet(const std::string& body) { return body.substr(0, 200); }

}  // namespace

ChatCompletionsClient::ChatCompletionsClient(Endpoint endpoint) : ep_(std::move(endpoint)) { parse_url(ep_.base_url); }

std::string ChatCompletionsClient::complete(const std::string& system, const std::string& user) {
  const ParsedUrl url = parse_url(ep_.base_url);
  auto cli = make_client(ep_, url);
  const json body = {{"model", ep_.model},
                     {"temperature", 0},
                     {"messages", {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}}}};
  const auto res = cli.Post(url.path + "/chat/completions", body.dump(), "application/json");
  if (!res) throw qa::LlmError("request failed: " + httplib::to_string(res.error()), true);
  if (res->status != 200) {
    throw qa::LlmError("status " + std::to_string(res->status) + ": " + snippet(res->body),
                       retryable_status(res->status));
  }
  const auto reply = json::parse(res->body, nullptr, false);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw qa::LlmError("malformed completion: " + snippet(res->body), false);
  }
}

TranscriptionsClient::TranscriptionsClient(Endpoint endpoint) : ep_(std::move(endpoint)) { parse_url(ep_.base_url); }

workflow::Transcription TranscriptionsClient::transcribe(std::string_view audio, std::string_view language) {
  const auto info = workflow::audio::probe(audio);
  const bool wav = info.container == workflow::audio::Container::Wav;
  const ParsedUrl url = parse_url(ep_.base_url);
  auto cli = make_client(ep_, url);
  // Whisper-style services take the primary language subtag.
  const std::string lang(language.substr(0, language.find('-')));
  httplib::MultipartFormDataItems items = {
      {"file", std::string(audio), wav ? "audio.wav" : "audio.webm", info.mime},
      {"model", ep_.model, "", ""},
      {"response_format", "json", "", ""},
  };
  if (!lang.empty()) items.push_back({"language", lang, "", ""});
  const auto res = cli.Post(url.path + "/audio/transcriptions", items);
  if (!res) throw workflow::SpeechError("request failed: " + httplib::to_string(res.error()), true);
  if (res->status != 200) {
    throw workflow::SpeechError("status " + std::to_string(res->status) + ": " + snippet(res->body),
                                retryable_status(res->status));
  }
  const auto reply = json::parse(res->body, nullptr, false);
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
    throw workflow::SpeechError("malformed transcription: " + snippet(res->body), false);
  }
  return {reply["text"].get<std::string>(), info.duration_s};
}

}  // namespace dense::service
