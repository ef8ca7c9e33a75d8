#include "dense/service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dense/core/error.hpp"

namespace dense::service {

EnvLookup process_env() {
  return [](const std::string& key) -> std::optional<std::string> {
    const char* v = std::getenv(key.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("CONFIG", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used == v.size()) return n;
  } catch (const std::logic_error&) {
  }
  throw Error("CONFIG", key + " must be a non-negative integer");
}

}  // namespace

EnvConfig config_from_env(const EnvLookup& env) {
  EnvConfig c;
  auto get = [&](const char* key) { return env(key).value_or(""); };
  if (const auto listen = get("DENSE_LISTEN"); !listen.empty()) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Error("CONFIG", "DENSE_LISTEN must be host:port");
    c.host = listen.substr(0, colon);
    c.port = static_cast<int>(to_uint("DENSE_LISTEN", listen.substr(colon + 1)));
  }
  if (const auto d = get("DENSE_DATA_DIR"); !d.empty()) c.data_dir = d;
  if (const auto p = get("DENSE_PRINCIPALS"); !p.empty()) {
    c.principals_json = p;
  } else if (const auto f = get("DENSE_PRINCIPALS_FILE"); !f.empty()) {
    c.principals_json = slurp(f);
  }
  c.stt.base_url = get("DENSE_STT_URL");
  c.stt.api_key = get("DENSE_STT_KEY");
  if (const auto m = get("DENSE_STT_MODEL"); !m.empty()) c.stt.model = m;
  c.llm.base_url = get("DENSE_LLM_URL");
  c.llm.api_key = get("DENSE_LLM_KEY");
  if (const auto m = get("DENSE_LLM_MODEL"); !m.empty()) c.llm.model = m;
  c.mock_clients = get("MOCK_CLIENTS") == "1";
  c.mock_stt_fixture = get("DENSE_MOCK_STT_FIXTURE");
  c.mock_llm_fixture = get("DENSE_MOCK_LLM_FIXTURE");
  if (const auto s = get("DENSE_ID_SEED"); !s.empty()) c.id_seed = to_uint("DENSE_ID_SEED", s);
  if (const auto w = get("DENSE_WORKERS"); !w.empty()) c.workers = to_uint("DENSE_WORKERS", w);
  if (!c.mock_clients && (c.stt.base_url.empty() || c.llm.base_url.empty())) {
    throw Error("CONFIG", "set DENSE_STT_URL and DENSE_LLM_URL, or MOCK_CLIENTS=1");
  }
  return c;
}

ServiceOptions make_options(const EnvConfig& cfg) {
  ServiceOptions o;
  o.data_dir = cfg.data_dir;
  o.principals = Principals::from_json_text(cfg.principals_json);
  o.id_seed = cfg.id_seed;
  o.workers = cfg.workers;
  if (cfg.mock_clients) {
    std::map<std::string, std::string> by_digest;
    if (!cfg.mock_stt_fixture.empty()) {
      by_digest = nlohmann::json::parse(slurp(cfg.mock_stt_fixture)).get<std::map<std::string, std::string>>();
    }
    o.stt = std::make_shared<workflow::MockSpeechToText>(std::move(by_digest));
    auto fixture = cfg.mock_llm_fixture.empty() ? nlohmann::json::object() : nlohmann::json::parse(slurp(cfg.mock_llm_fixture));
    o.llm = std::make_shared<qa::MockLlmClient>(std::move(fixture));
  } else {
    o.stt = std::make_shared<TranscriptionsClient>(cfg.stt);
    o.llm = std::make_shared<ChatCompletionsClient>(cfg.llm);
  }
  return o;
}

}  // namespace dense::service
