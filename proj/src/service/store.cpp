#include "dense/service/store.hpp"

#include <sqlite3.h>

#include "dense/core/error.hpp"
#include "dense/core/json.hpp"

namespace dense::service {

using nlohmann::json;

const char* to_string(BlobKind k) {
  switch (k) {
    case BlobKind::Image: return "IMAGE";
    case BlobKind::Glb: return "GLB";
    case BlobKind::Audio: return "AUDIO";
  }
  return "?";
}

void to_json(json& j, const BlobRef& b) { j = {{"digest", b.digest}, {"kind", to_string(b.kind)}, {"size", b.size}}; }

namespace {

[[noreturn]] void storage_error(sqlite3* db, const std::string& what) {
  throw Error("STORAGE_UNAVAILABLE", what + ": " + (db ? sqlite3_errmsg(db) : "no database"));
}

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK) storage_error(db, "prepare");
  }
  ~Stmt() { sqlite3_finalize(st_); }

  Stmt& bind(const std::string& v) {
    sqlite3_bind_text(st_, ++n_, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(std::int64_t v) {
    sqlite3_bind_int64(st_, ++n_, v);
    return *this;
  }

  // True while a row is available.
  bool step() {
    const int rc = sqlite3_step(st_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    storage_error(db_, "step");
  }
  void run() {
    while (step()) {
    }
  }

  std::string text(int col) {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(st_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(st_, col))) : std::string();
  }
  std::int64_t integer(int col) { return sqlite3_column_int64(st_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* st_ = nullptr;
  int n_ = 0;
};

const char* kSchema = R"sql(
PRAGMA journal_mode = WAL;
PRAGMA synchronous = NORMAL;
CREATE TABLE IF NOT EXISTS tasks (
  org_id TEXT NOT NULL, task_id TEXT NOT NULL, body TEXT NOT NULL, policy TEXT NOT NULL,
  PRIMARY KEY (org_id, task_id));
CREATE TABLE IF NOT EXISTS assets (
  org_id TEXT NOT NULL, asset_id TEXT NOT NULL, body TEXT NOT NULL,
  PRIMARY KEY (org_id, asset_id));
CREATE TABLE IF NOT EXISTS sessions (
  org_id TEXT NOT NULL, session_id TEXT NOT NULL, task_id TEXT NOT NULL, version INTEGER NOT NULL,
  body TEXT NOT NULL, PRIMARY KEY (org_id, session_id));
CREATE INDEX IF NOT EXISTS sessions_by_task ON sessions (org_id, task_id);
CREATE TABLE IF NOT EXISTS blobs (digest TEXT PRIMARY KEY, kind TEXT NOT NULL, size INTEGER NOT NULL);
CREATE TABLE IF NOT EXISTS exports (
  org_id TEXT NOT NULL, job_id TEXT NOT NULL, body TEXT NOT NULL, PRIMARY KEY (org_id, job_id));
CREATE TABLE IF NOT EXISTS jobs (
  seq INTEGER PRIMARY KEY AUTOINCREMENT, job_id TEXT UNIQUE NOT NULL, kind TEXT NOT NULL,
  payload TEXT NOT NULL, status TEXT NOT NULL, attempts INTEGER NOT NULL DEFAULT 0,
  not_before INTEGER NOT NULL DEFAULT 0, lease_until INTEGER NOT NULL DEFAULT 0, error TEXT);
)sql";

BlobKind blob_kind(const std::string& s) {
  if (s == "GLB") return BlobKind::Glb;
  if (s == "AUDIO") return BlobKind::Audio;
  return BlobKind::Image;
}

}  // namespace

Store::Store(const std::string& path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "open failed";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error("STORAGE_UNAVAILABLE", "cannot open " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec(kSchema);
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "exec failed";
    sqlite3_free(err);
    throw Error("STORAGE_UNAVAILABLE", msg);
  }
}

void Store::insert_task(const StoredTask& t) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO tasks (org_id, task_id, body, policy) VALUES (?, ?, ?, ?)")
      .bind(t.task.org_id.str())
      .bind(t.task.task_id.str())
      .bind(json(t.task).dump())
      .bind(json(t.policy).dump())
      .run();
}

void Store::update_task(const StoredTask& t) {
  std::lock_guard lock(mu_);
  Stmt(db_, "UPDATE tasks SET body = ?, policy = ? WHERE org_id = ? AND task_id = ?")
      .bind(json(t.task).dump())
      .bind(json(t.policy).dump())
      .bind(t.task.org_id.str())
      .bind(t.task.task_id.str())
      .run();
}

std::optional<StoredTask> Store::task(const OrgId& org, const TaskId& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT body, policy FROM tasks WHERE org_id = ? AND task_id = ?");
  st.bind(org.str()).bind(id.str());
  if (!st.step()) return std::nullopt;
  return StoredTask{json::parse(st.text(0)).get<Task>(), json::parse(st.text(1)).get<workflow::QcPolicy>()};
}

void Store::insert_asset(const OrgId& org, const Asset& a) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO assets (org_id, asset_id, body) VALUES (?, ?, ?)")
      .bind(org.str())
      .bind(a.asset_id.str())
      .bind(json(a).dump())
      .run();
}

std::optional<Asset> Store::asset(const OrgId& org, const AssetId& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT body FROM assets WHERE org_id = ? AND asset_id = ?");
  st.bind(org.str()).bind(id.str());
  if (!st.step()) return std::nullopt;
  return json::parse(st.text(0)).get<Asset>();
}

void Store::insert_session(const OrgId& org, const AnnotationSession& s) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO sessions (org_id, session_id, task_id, version, body) VALUES (?, ?, ?, ?, ?)")
      .bind(org.str())
      .bind(s.session_id.str())
      .bind(s.task_id.str())
      .bind(s.version)
      .bind(json(s).dump())
      .run();
}

std::optional<AnnotationSession> Store::session(const OrgId& org, const SessionId& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT body FROM sessions WHERE org_id = ? AND session_id = ?");
  st.bind(org.str()).bind(id.str());
  if (!st.step()) return std::nullopt;
  return json::parse(st.text(0)).get<AnnotationSession>();
}

AnnotationSession Store::update_session(const OrgId& org, AnnotationSession next, std::int64_t expected) {
  std::lock_guard lock(mu_);
  next.version = expected + 1;
  Stmt(db_, "UPDATE sessions SET version = ?, body = ? WHERE org_id = ? AND session_id = ? AND version = ?")
      .bind(next.version)
      .bind(json(next).dump())
      .bind(org.str())
      .bind(next.session_id.str())
      .bind(expected)
      .run();
  if (sqlite3_changes(db_) == 1) return next;

  Stmt st(db_, "SELECT version FROM sessions WHERE org_id = ? AND session_id = ?");
  st.bind(org.str()).bind(next.session_id.str());
  if (!st.step()) throw Error("NOT_FOUND", "session " + next.session_id.str() + " not found");
  const std::int64_t current = st.integer(0);
  throw Error("CONFLICT", "session " + next.session_id.str() + " is at version " + std::to_string(current),
              {{"current_version", current}, {"expected_version", expected}});
}

std::vector<AnnotationSession> Store::sessions_for_task(const OrgId& org, const TaskId& task) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT body FROM sessions WHERE org_id = ? AND task_id = ? ORDER BY session_id");
  st.bind(org.str()).bind(task.str());
  std::vector<AnnotationSession> out;
  while (st.step()) out.push_back(json::parse(st.text(0)).get<AnnotationSession>());
  return out;
}

void Store::put_blob(const BlobRef& b) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT OR IGNORE INTO blobs (digest, kind, size) VALUES (?, ?, ?)")
      .bind(b.digest)
      .bind(std::string(to_string(b.kind)))
      .bind(static_cast<std::int64_t>(b.size))
      .run();
}

std::optional<BlobRef> Store::blob(const std::string& digest) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT kind, size FROM blobs WHERE digest = ?");
  st.bind(digest);
  if (!st.step()) return std::nullopt;
  return BlobRef{digest, blob_kind(st.text(0)), static_cast<std::uint64_t>(st.integer(1))};
}

void Store::insert_export(const dataset::ExportJob& job) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO exports (org_id, job_id, body) VALUES (?, ?, ?)")
      .bind(job.org_id.str())
      .bind(job.job_id.str())
      .bind(json(job).dump())
      .run();
}

void Store::update_export(const dataset::ExportJob& job) {
  std::lock_guard lock(mu_);
  Stmt(db_, "UPDATE exports SET body = ? WHERE org_id = ? AND job_id = ?")
      .bind(json(job).dump())
      .bind(job.org_id.str())
      .bind(job.job_id.str())
      .run();
}

std::optional<dataset::ExportJob> Store::export_job(const OrgId& org, const JobId& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT body FROM exports WHERE org_id = ? AND job_id = ?");
  st.bind(org.str()).bind(id.str());
  if (!st.step()) return std::nullopt;
  return json::parse(st.text(0)).get<dataset::ExportJob>();
}

void Store::enqueue(const JobId& id, const std::string& kind, const json& payload, std::int64_t not_before) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO jobs (job_id, kind, payload, status, not_before) VALUES (?, ?, ?, 'QUEUED', ?)")
      .bind(id.str())
      .bind(kind)
      .bind(payload.dump())
      .bind(not_before)
      .run();
}

std::optional<QueuedJob> Store::lease(std::int64_t now, std::int64_t lease_ms) {
  std::lock_guard lock(mu_);
  Stmt st(db_,
          "SELECT job_id, kind, payload, attempts FROM jobs WHERE (status = 'QUEUED' AND not_before <= ?) OR "
          "(status = 'RUNNING' AND lease_until < ?) ORDER BY seq LIMIT 1");
  st.bind(now).bind(now);
  if (!st.step()) return std::nullopt;
  QueuedJob job{JobId(st.text(0)), st.text(1), json::parse(st.text(2)), static_cast<int>(st.integer(3)) + 1};
  Stmt(db_, "UPDATE jobs SET status = 'RUNNING', attempts = attempts + 1, lease_until = ? WHERE job_id = ?")
      .bind(now + lease_ms)
      .bind(job.job_id.str())
      .run();
  return job;
}

void Store::heartbeat(const JobId& id, std::int64_t lease_until) {
  std::lock_guard lock(mu_);
  Stmt(db_, "UPDATE jobs SET lease_until = ? WHERE job_id = ? AND status = 'RUNNING'").bind(lease_until).bind(id.str()).run();
}

void Store::finish(const JobId& id) {
  std::lock_guard lock(mu_);
  Stmt(db_, "UPDATE jobs SET status = 'DONE' WHERE job_id = ?").bind(id.str()).run();
}

void Store::fail(const JobId& id, const std::string& error) {
  std::lock_guard lock(mu_);
  Stmt(db_, "UPDATE jobs SET status = 'FAILED', error = ? WHERE job_id = ?").bind(error).bind(id.str()).run();
}

void Store::release(const JobId& id, std::int64_t not_before, bool refund) {
  std::lock_guard lock(mu_);
  Stmt(db_,
       "UPDATE jobs SET status = 'QUEUED', not_before = ?, attempts = MAX(attempts - ?, 0) WHERE job_id = ?")
      .bind(not_before)
      .bind(std::int64_t{refund ? 1 : 0})
      .bind(id.str())
      .run();
}

void Store::reset_running() {
  std::lock_guard lock(mu_);
  exec("UPDATE jobs SET status = 'QUEUED', lease_until = 0 WHERE status = 'RUNNING'");
  Stmt st(db_, "SELECT org_id, job_id, body FROM exports");
  std::vector<dataset::ExportJob> stale;
  while (st.step()) {
    auto job = json::parse(st.text(2)).get<dataset::ExportJob>();
    if (job.status == dataset::JobStatus::Running) stale.push_back(std::move(job));
  }
  for (auto& job : stale) {
    job.status = dataset::JobStatus::Queued;
    Stmt(db_, "UPDATE exports SET body = ? WHERE org_id = ? AND job_id = ?")
        .bind(json(job).dump())
        .bind(job.org_id.str())
        .bind(job.job_id.str())
        .run();
  }
}

std::string Store::job_status(const JobId& id) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT status FROM jobs WHERE job_id = ?");
  st.bind(id.str());
  return st.step() ? st.text(0) : std::string();
}

std::size_t Store::pending_jobs(const std::string& kind) {
  std::lock_guard lock(mu_);
  Stmt st(db_, "SELECT COUNT(*) FROM jobs WHERE status IN ('QUEUED', 'RUNNING') AND (? = '' OR kind = ?)");
  st.bind(kind).bind(kind);
  st.step();
  return static_cast<std::size_t>(st.integer(0));
}

}  // namespace dense::service
