#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dense/core/ids.hpp"
#include "dense/qa/llm.hpp"
#include "dense/service/auth.hpp"
#include "dense/service/blobs.hpp"
#include "dense/service/store.hpp"
#include "dense/workflow/policy.hpp"
#include "dense/workflow/speech.hpp"

namespace dense::service {

struct ServiceOptions {
  std::filesystem::path data_dir;
  Principals principals;
  workflow::QcPolicy default_policy;
  std::shared_ptr<workflow::SpeechToText> stt;
  std::shared_ptr<qa::LlmClient> llm;
  // Seeded ids make whole runs reproducible; unset uses std::random_device.
  std::optional<std::uint64_t> id_seed;
  std::size_t workers = 2;
  std::size_t export_workers = 4;
  bool start_workers = true;
  std::int64_t lease_ms = 30000;
  std::chrono::milliseconds poll{20};
  int max_attempts = 5;
  std::function<std::string()> clock;  // ISO-8601 UTC "now"
};

// Every domain operation behind the HTTP surface. Methods take the calling
// principal, return the JSON response body and throw dense::Error; the HTTP
// layer maps codes to statuses.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  const Principal* authenticate(const std::string& authorization_header) const;

  nlohmann::json create_task(const Principal& p, const nlohmann::json& body);
  nlohmann::json get_task(const Principal& p, const std::string& id);
  nlohmann::json assign(const Principal& p, const std::string& task_id, const nlohmann::json& body);

  // `meta` carries {kind?, scene_meta?, objects?}; kind is sniffed otherwise.
  nlohmann::json upload_asset(const Principal& p, const std::string& bytes, const nlohmann::json& meta);

  nlohmann::json start_session(const Principal& p, const nlohmann::json& body);
  nlohmann::json get_session(const Principal& p, const std::string& id);
  nlohmann::json add_point(const Principal& p, const std::string& id, const nlohmann::json& body);
  // `target` is "scene" or an object id.
  nlohmann::json add_recording(const Principal& p, const std::string& id, const std::string& audio,
                               const std::string& target, std::int64_t version);
  nlohmann::json unlock_scene(const Principal& p, const std::string& id, const nlohmann::json& body);
  nlohmann::json edit_transcript(const Principal& p, const std::string& id, const std::string& recording_id,
                                 const nlohmann::json& body);
  nlohmann::json submit(const Principal& p, const std::string& id, const nlohmann::json& body);

  nlohmann::json create_export(const Principal& p, const nlohmann::json& body);
  nlohmann::json get_export(const Principal& p, const std::string& id);

  // Runs one due job on the calling thread; false when none was due.
  bool run_one_job();
  // Blocks until the queue is empty or the timeout passes.
  bool wait_idle(std::chrono::milliseconds timeout);

  Store& store() { return *store_; }
  BlobStore& blobs() { return *blobs_; }
  const std::filesystem::path& data_dir() const { return opts_.data_dir; }

 private:
  struct Loaded {
    AnnotationSession session;
    Asset asset;
    StoredTask task;
  };

  Loaded load_for_mutation(const Principal& p, const std::string& id);
  AnnotationSession save(const Principal& p, const AnnotationSession& next, std::int64_t expected);
  void worker_loop();
  void run_job(const QueuedJob& job);
  void run_transcription(const QueuedJob& job);
  void run_export(const QueuedJob& job);
  std::string now_iso() const;

  ServiceOptions opts_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<BlobStore> blobs_;
  IdGenerator ids_;
  std::shared_ptr<qa::LlmClient> journaled_llm_;

  std::mutex export_mu_;
  std::set<std::string> running_exports_;  // task ids

  std::atomic<bool> stop_{false};
  std::vector<std::thread> threads_;
};

}  // namespace dense::service
