#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dense/core/types.hpp"
#include "dense/dataset/export.hpp"
#include "dense/workflow/policy.hpp"

struct sqlite3;

namespace dense::service {

struct StoredTask {
  Task task;
  workflow::QcPolicy policy;
};

enum class BlobKind { Image, Glb, Audio };

const char* to_string(BlobKind k);

struct BlobRef {
  std::string digest;
  BlobKind kind = BlobKind::Image;
  std::uint64_t size = 0;
};

void to_json(nlohmann::json& j, const BlobRef& b);

struct QueuedJob {
  JobId job_id;
  std::string kind;  // "transcribe" or "export"
  nlohmann::json payload;
  int attempts = 0;
};

// Embedded relational store. One connection behind a mutex; every entity
// query takes the caller's org and never matches rows of another org.
// SQLite failures surface as Error{STORAGE_UNAVAILABLE}.
class Store {
 public:
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  void insert_task(const StoredTask& t);
  void update_task(const StoredTask& t);
  std::optional<StoredTask> task(const OrgId& org, const TaskId& id);

  void insert_asset(const OrgId& org, const Asset& a);
  std::optional<Asset> asset(const OrgId& org, const AssetId& id);

  void insert_session(const OrgId& org, const AnnotationSession& s);
  std::optional<AnnotationSession> session(const OrgId& org, const SessionId& id);
  // Compare-and-set: stores `next` with version expected + 1 if the row still
  // has `expected`. Errors: CONFLICT, NOT_FOUND.
  AnnotationSession update_session(const OrgId& org, AnnotationSession next, std::int64_t expected);
  std::vector<AnnotationSession> sessions_for_task(const OrgId& org, const TaskId& task);

  void put_blob(const BlobRef& b);
  std::optional<BlobRef> blob(const std::string& digest);

  void insert_export(const dataset::ExportJob& job);
  void update_export(const dataset::ExportJob& job);
  std::optional<dataset::ExportJob> export_job(const OrgId& org, const JobId& id);

  // Background queue; times are wall-clock milliseconds.
  void enqueue(const JobId& id, const std::string& kind, const nlohmann::json& payload, std::int64_t not_before = 0);
  // Oldest runnable job: QUEUED and due, or RUNNING with an expired lease.
  std::optional<QueuedJob> lease(std::int64_t now, std::int64_t lease_ms);
  void heartbeat(const JobId& id, std::int64_t lease_until);
  void finish(const JobId& id);
  void fail(const JobId& id, const std::string& error);
  // Back to QUEUED; `refund` undoes the attempt counted by lease().
  void release(const JobId& id, std::int64_t not_before, bool refund);
  // Startup recovery: every RUNNING job and export becomes QUEUED again.
  void reset_running();
  std::string job_status(const JobId& id);
  // QUEUED or RUNNING jobs, optionally of one kind.
  std::size_t pending_jobs(const std::string& kind = "");

 private:
  void exec(const std::string& sql);

  std::mutex mu_;
  sqlite3* db_ = nullptr;
};

}  // namespace dense::service
