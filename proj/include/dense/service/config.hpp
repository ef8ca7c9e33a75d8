#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "dense/service/adapters.hpp"
#include "dense/service/service.hpp"

namespace dense::service {

// Environment:
//   DENSE_LISTEN            host:port (127.0.0.1:8080)
//   DENSE_DATA_DIR          data directory (./data)
//   DENSE_PRINCIPALS        JSON array of principals, or
//   DENSE_PRINCIPALS_FILE   path to one
//   DENSE_STT_URL / DENSE_STT_KEY / DENSE_STT_MODEL
//   DENSE_LLM_URL / DENSE_LLM_KEY / DENSE_LLM_MODEL
//   MOCK_CLIENTS=1          deterministic doubles instead of the endpoints
//   DENSE_MOCK_STT_FIXTURE / DENSE_MOCK_LLM_FIXTURE   JSON fixtures for them
//   DENSE_ID_SEED           reproducible ids
//   DENSE_WORKERS           background workers (2)
struct EnvConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data";
  std::string principals_json = "[]";
  Endpoint stt{"", "", "whisper-1"};
  Endpoint llm{"", "", "gpt-4o-mini"};
  bool mock_clients = false;
  std::string mock_stt_fixture;
  std::string mock_llm_fixture;
  std::optional<std::uint64_t> id_seed;
  std::size_t workers = 2;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

// Errors: CONFIG.
EnvConfig config_from_env(const EnvLookup& env);
ServiceOptions make_options(const EnvConfig& cfg);

}  // namespace dense::service
