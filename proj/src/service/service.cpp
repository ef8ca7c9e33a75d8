#include "dense/service/service.hpp"

#include <algorithm>
#include <ctime>

#include "dense/core/error.hpp"
#include "dense/core/json.hpp"
#include "dense/core/prompts.hpp"
#include "dense/core/validate.hpp"
#include "dense/dataset/export.hpp"
#include "dense/geometry/glb.hpp"
#include "dense/geometry/image.hpp"
#include "dense/geometry/sampler.hpp"
#include "dense/workflow/audio.hpp"
#include "dense/workflow/engine.hpp"

namespace dense::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t wall_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void require_admin(const Principal& p) {
  if (p.role != Role::Admin) throw Error("FORBIDDEN", "administrator role required");
}

[[noreturn]] void reject(const Violations& v) {
  json list = json::array();
  for (const auto& x : v) list.push_back({{"code", x.code}, {"detail", x.detail}});
  throw Error(v.front().code, v.front().detail, {{"violations", list}});
}

std::int64_t version_of(const json& body) {
  if (!body.is_object() || !body.contains("version") || !body["version"].is_number_integer()) {
    throw Error("BAD_REQUEST", "integer 'version' is required");
  }
  return body["version"].get<std::int64_t>();
}

std::string string_field(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    throw Error("BAD_REQUEST", std::string("string '") + key + "' is required");
  }
  return body[key].get<std::string>();
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.compare(0, prefix.size(), prefix) == 0; }

std::optional<AssetKind> sniff(const std::string& bytes) {
  if (starts_with(bytes, "glTF")) return AssetKind::Scene3D;
  if (starts_with(bytes, "\x89PNG\r\n\x1a\n") || starts_with(bytes, "\xFF\xD8\xFF")) return AssetKind::Image2D;
  return std::nullopt;
}

}  // namespace

Service::Service(ServiceOptions options) : opts_(std::move(options)), ids_(opts_.id_seed) {
  if (opts_.data_dir.empty()) throw Error("CONFIG", "data directory is required");
  if (!opts_.stt || !opts_.llm) throw Error("CONFIG", "speech and language clients are required");
  fs::create_directories(opts_.data_dir / "journal");
  store_ = std::make_unique<Store>((opts_.data_dir / "dense.db").string());
  blobs_ = std::make_unique<BlobStore>(opts_.data_dir / "blobs");
  qa::RetryPolicy retry;
  retry.max_in_flight = static_cast<int>(std::max<std::size_t>(opts_.export_workers, 1));
  journaled_llm_ = std::make_shared<qa::JournaledClient>(std::make_shared<qa::RetryingClient>(opts_.llm, retry),
                                                         (opts_.data_dir / "journal" / "llm.jsonl").string());
  store_->reset_running();
  if (opts_.start_workers) {
    for (std::size_t i = 0; i < std::max<std::size_t>(opts_.workers, 1); ++i) {
      threads_.emplace_back([this] { worker_loop(); });
    }
  }
}

Service::~Service() {
  stop_ = true;
  for (auto& t : threads_) t.join();
}

const Principal* Service::authenticate(const std::string& header) const { return opts_.principals.by_header(header); }

std::string Service::now_iso() const {
  if (opts_.clock) return opts_.clock();
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

json task_body(const StoredTask& t) {
  json j = t.task;
  j["policy"] = t.policy;
  return j;
}

}  // namespace

json Service::create_task(const Principal& p, const json& body) {
  require_admin(p);
  if (!body.is_object()) throw Error("BAD_REQUEST", "task body must be an object");
  StoredTask t;
  t.task = body.get<Task>();
  t.task.task_id = ids_.next_id<TaskId>();
  t.task.org_id = p.org_id;
  t.task.created_at = now_iso();
  if (t.task.questions.empty()) t.task.questions = prompts::defaults_for(t.task.prompt_profile);
  t.policy = opts_.default_policy;
  if (body.contains("policy")) workflow::from_json(body["policy"], t.policy);
  if (const auto v = t.policy.validate(); !v.empty()) reject(v);

  for (const auto& id : t.task.asset_ids) {
    const auto a = store_->asset(p.org_id, id);
    if (!a) throw Error("NOT_FOUND", "asset " + id.str() + " not found", {{"asset_id", id.str()}});
    if (a->kind != t.task.kind) {
      throw Error("WRONG_ASSET_KIND", "asset " + id.str() + " is " + to_string(a->kind) + ", task is " +
                                          to_string(t.task.kind));
    }
  }
  if (const auto v = validate(t.task); !v.empty()) reject(v);
  store_->insert_task(t);
  return task_body(t);
}

json Service::get_task(const Principal& p, const std::string& id) {
  const auto t = store_->task(p.org_id, TaskId(id));
  if (!t) throw Error("NOT_FOUND", "task " + id + " not found");
  return task_body(*t);
}

json Service::assign(const Principal& p, const std::string& task_id, const json& body) {
  require_admin(p);
  auto t = store_->task(p.org_id, TaskId(task_id));
  if (!t) throw Error("NOT_FOUND", "task " + task_id + " not found");
  if (!body.is_object() || !body.contains("annotators") || !body["annotators"].is_array()) {
    throw Error("BAD_REQUEST", "'annotators' array is required");
  }
  for (const auto& a : body["annotators"].get<std::vector<PrincipalId>>()) {
    if (std::find(t->task.annotators.begin(), t->task.annotators.end(), a) == t->task.annotators.end()) {
      t->task.annotators.push_back(a);
    }
  }
  store_->update_task(*t);
  return task_body(*t);
}

json Service::upload_asset(const Principal& p, const std::string& bytes, const json& meta) {
  require_admin(p);
  Asset a;
  a.asset_id = ids_.next_id<AssetId>();
  const auto sniffed = sniff(bytes);
  if (meta.contains("kind")) {
    a.kind = meta["kind"].get<AssetKind>();
    if (sniffed && *sniffed != a.kind) throw Error("WRONG_ASSET_KIND", "upload does not match declared kind");
  } else if (sniffed) {
    a.kind = *sniffed;
  }
  if (!sniffed) throw Error("UNSUPPORTED_MEDIA", "expected a PNG, JPEG or binary glTF upload");

  BlobKind kind = BlobKind::Image;
  if (a.kind == AssetKind::Scene3D) {
    kind = BlobKind::Glb;
    const auto meshes = geometry::parse_glb(bytes);
    if (meta.contains("scene_meta")) a.scene_meta = meta["scene_meta"].get<SceneMeta>();
    a.objects.emplace();
    for (const auto& o : meta.value("objects", json::array())) {
      SceneObject obj = o.get<SceneObject>();
      if (obj.object_id.empty()) obj.object_id = ids_.next_id<ObjectId>();
      geometry::isolate_object(meshes, obj.node_path);
      a.objects->push_back(std::move(obj));
    }
  } else {
    try {
      geometry::decode_image(bytes);
    } catch (const Error& e) {
      throw Error("INVALID_IMAGE", e.detail());
    }
  }

  const BlobRef ref{blobs_->put(bytes), kind, bytes.size()};
  a.media_ref = ref.digest;
  if (const auto v = validate(a); !v.empty()) reject(v);
  store_->put_blob(ref);
  store_->insert_asset(p.org_id, a);
  return {{"blob", ref}, {"asset", a}};
}

json Service::start_session(const Principal& p, const json& body) {
  if (p.role != Role::Annotator) throw Error("FORBIDDEN", "only annotators start sessions");
  const auto task = store_->task(p.org_id, TaskId(string_field(body, "task_id")));
  const auto asset = store_->asset(p.org_id, AssetId(string_field(body, "asset_id")));
  workflow::StartRequest req{p.principal_id, p.org_id, string_field(body, "language"),
                             body.value("native_speaker", false)};
  AnnotationSession s = workflow::start_session(task ? &task->task : nullptr, asset ? &*asset : nullptr, req,
                                                ids_.next_id<SessionId>());
  store_->insert_session(p.org_id, s);
  return s;
}

json Service::get_session(const Principal& p, const std::string& id) {
  const auto s = store_->session(p.org_id, SessionId(id));
  if (!s) throw Error("NOT_FOUND", "session " + id + " not found");
  if (p.role == Role::Annotator && s->annotator_id != p.principal_id) {
    throw Error("FORBIDDEN", "session belongs to another annotator");
  }
  return *s;
}

Service::Loaded Service::load_for_mutation(const Principal& p, const std::string& id) {
  auto s = store_->session(p.org_id, SessionId(id));
  if (!s) throw Error("NOT_FOUND", "session " + id + " not found");
  if (p.role != Role::Annotator || s->annotator_id != p.principal_id) {
    throw Error("FORBIDDEN", "only the session's annotator may change it");
  }
  auto asset = store_->asset(p.org_id, s->asset_id);
  auto task = store_->task(p.org_id, s->task_id);
  if (!asset || !task) throw Error("NOT_FOUND", "session " + id + " refers to a missing task or asset");
  return {std::move(*s), std::move(*asset), std::move(*task)};
}

AnnotationSession Service::save(const Principal& p, const AnnotationSession& next, std::int64_t expected) {
  return store_->update_session(p.org_id, next, expected);
}

namespace {

void check_version(const AnnotationSession& s, std::int64_t expected) {
  if (s.version != expected) {
    throw Error("CONFLICT", "session " + s.session_id.str() + " is at version " + std::to_string(s.version),
                {{"current_version", s.version}, {"expected_version", expected}});
  }
}

}  // namespace

json Service::add_point(const Principal& p, const std::string& id, const json& body) {
  const std::int64_t version = version_of(body);
  auto l = load_for_mutation(p, id);
  check_version(l.session, version);
  PointAnnotation pt;
  pt.name = string_field(body, "name");
  if (!body.contains("x") || !body.contains("y")) throw Error("BAD_REQUEST", "'x' and 'y' are required");
  pt.x = percent_from_json(body["x"]);
  pt.y = percent_from_json(body["y"]);
  pt.order = body.value("order", static_cast<int>(l.session.points.size()));
  return save(p, workflow::add_point(l.session, l.asset, pt), version);
}

json Service::add_recording(const Principal& p, const std::string& id, const std::string& audio,
                            const std::string& target, std::int64_t version) {
  auto l = load_for_mutation(p, id);
  check_version(l.session, version);
  const auto info = workflow::audio::probe(audio);
  const RecordingTarget t = target.empty() || target == "scene" ? RecordingTarget::scene()
                                                                : RecordingTarget::for_object(ObjectId(target));
  const std::string digest = blobs_->put(audio);
  store_->put_blob({digest, BlobKind::Audio, audio.size()});
  auto attached = workflow::attach_recording(l.session, l.asset, l.task.policy, t, digest, info.duration_s,
                                             ids_.next_id<RecordingId>());
  const AnnotationSession saved = save(p, attached.session, version);
  store_->enqueue(ids_.next_id<JobId>(), "transcribe",
                  {{"org_id", p.org_id},
                   {"session_id", saved.session_id},
                   {"recording_id", attached.recording.recording_id},
                   {"language", saved.language},
                   {"audio_ref", digest}});
  return {{"session", saved}, {"recording", attached.recording}};
}

json Service::unlock_scene(const Principal& p, const std::string& id, const json& body) {
  const std::int64_t version = version_of(body);
  auto l = load_for_mutation(p, id);
  check_version(l.session, version);
  return save(p, workflow::unlock_scene_stage(l.session, l.asset, l.task.policy), version);
}

json Service::edit_transcript(const Principal& p, const std::string& id, const std::string& recording_id,
                              const json& body) {
  const std::int64_t version = version_of(body);
  auto l = load_for_mutation(p, id);
  check_version(l.session, version);
  return save(p, workflow::edit_transcript(l.session, RecordingId(recording_id), string_field(body, "text")), version);
}

json Service::submit(const Principal& p, const std::string& id, const json& body) {
  const std::int64_t version = version_of(body);
  auto l = load_for_mutation(p, id);
  check_version(l.session, version);
  const auto outcome = workflow::submit(l.session, l.asset, l.task.policy);
  if (!outcome.submitted) {
    const auto& first = outcome.report.failures.front();
    throw Error(first.code, first.detail, json(outcome.report));
  }
  return {{"session", save(p, *outcome.submitted, version)}, {"report", outcome.report}};
}

json Service::create_export(const Principal& p, const json& body) {
  require_admin(p);
  const auto task = store_->task(p.org_id, TaskId(string_field(body, "task_id")));
  if (!task) throw Error("NOT_FOUND", "task not found");
  dataset::ExportJob job;
  job.job_id = ids_.next_id<JobId>();
  job.task_id = task->task.task_id;
  job.org_id = p.org_id;
  job.shape = dataset::shape_for(task->task);
  if (body.contains("shape")) {
    const auto shape = dataset::parse_shape(string_field(body, "shape"));
    if (!shape) throw Error("BAD_REQUEST", "unknown shape '" + body["shape"].get<std::string>() + "'");
    if (*shape != job.shape) {
      throw Error("SHAPE_MISMATCH", std::string("task exports as ") + dataset::to_string(job.shape));
    }
  }
  if (body.contains("seed")) job.seed = body["seed"].get<std::uint64_t>();
  if (body.contains("per_subcategory_test")) job.per_subcategory_test = body["per_subcategory_test"].get<std::size_t>();
  store_->insert_export(job);
  store_->enqueue(ids_.next_id<JobId>(), "export", {{"org_id", p.org_id}, {"job_id", job.job_id}});
  return job;
}

json Service::get_export(const Principal& p, const std::string& id) {
  const auto job = store_->export_job(p.org_id, JobId(id));
  if (!job) throw Error("NOT_FOUND", "export " + id + " not found");
  return *job;
}

bool Service::run_one_job() {
  const auto job = store_->lease(wall_ms(), opts_.lease_ms);
  if (!job) return false;

  std::mutex mu;
  std::condition_variable cv;
  bool done = false;
  std::thread heartbeat([&] {
    std::unique_lock lock(mu);
    const auto every = std::chrono::milliseconds(std::max<std::int64_t>(opts_.lease_ms / 3, 1));
    while (!cv.wait_for(lock, every, [&] { return done; })) store_->heartbeat(job->job_id, wall_ms() + opts_.lease_ms);
  });
  run_job(*job);
  {
    std::lock_guard lock(mu);
    done = true;
  }
  cv.notify_all();
  heartbeat.join();
  return true;
}

void Service::worker_loop() {
  while (!stop_) {
    bool ran = false;
    try {
      ran = run_one_job();
    } catch (const std::exception&) {
      // Storage hiccup; back off and poll again.
    }
    if (!ran) std::this_thread::sleep_for(opts_.poll);
  }
}

bool Service::wait_idle(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (store_->pending_jobs() > 0) {
    if (std::chrono::steady_clock::now() > deadline) return false;
    if (threads_.empty()) {
      if (!run_one_job()) std::this_thread::sleep_for(opts_.poll);
    } else {
      std::this_thread::sleep_for(opts_.poll);
    }
  }
  return true;
}

void Service::run_job(const QueuedJob& job) {
  try {
    if (job.kind == "transcribe") {
      run_transcription(job);
    } else if (job.kind == "export") {
      run_export(job);
    } else {
      store_->fail(job.job_id, "unknown job kind " + job.kind);
    }
  } catch (const Error& e) {
    store_->fail(job.job_id, e.code() + ": " + e.detail());
  } catch (const std::exception& e) {
    store_->fail(job.job_id, e.what());
  }
}

void Service::run_transcription(const QueuedJob& job) {
  const json& pl = job.payload;
  const OrgId org = pl.at("org_id").get<OrgId>();
  const SessionId sid = pl.at("session_id").get<SessionId>();
  const RecordingId rid = pl.at("recording_id").get<RecordingId>();
  const auto audio = blobs_->get(pl.at("audio_ref").get<std::string>());
  if (!audio) throw Error("NOT_FOUND", "audio blob missing");

  workflow::Transcription text;
  try {
    text = opts_.stt->transcribe(*audio, pl.at("language").get<std::string>());
  } catch (const workflow::SpeechError& e) {
    if (e.retryable() && job.attempts < opts_.max_attempts) {
      const std::int64_t delay = std::min<std::int64_t>(200LL << std::min(job.attempts - 1, 10), 5000);
      store_->release(job.job_id, wall_ms() + delay, false);
      return;
    }
    throw;
  }

  // The callback races with annotator edits; retry the compare-and-set.
  for (int attempt = 0;; ++attempt) {
    const auto s = store_->session(org, sid);
    if (!s) throw Error("NOT_FOUND", "session gone");
    try {
      const auto next = workflow::fill_auto_transcript(*s, rid, text.text);
      if (next == *s) break;
      store_->update_session(org, next, s->version);
      break;
    } catch (const Error& e) {
      if (e.code() != "CONFLICT" || attempt >= 50) throw;
    }
  }
  store_->finish(job.job_id);
}

void Service::run_export(const QueuedJob& job) {
  const OrgId org = job.payload.at("org_id").get<OrgId>();
  auto ej = store_->export_job(org, job.payload.at("job_id").get<JobId>());
  if (!ej) throw Error("NOT_FOUND", "export job missing");
  if (ej->status == dataset::JobStatus::Done || ej->status == dataset::JobStatus::Failed) {
    store_->finish(job.job_id);
    return;
  }
  {
    std::lock_guard lock(export_mu_);
    if (!running_exports_.insert(ej->task_id.str()).second) {
      store_->release(job.job_id, wall_ms() + opts_.poll.count(), true);
      return;
    }
  }
  struct Unmark {
    Service* self;
    std::string task;
    ~Unmark() {
      std::lock_guard lock(self->export_mu_);
      self->running_exports_.erase(task);
    }
  } unmark{this, ej->task_id.str()};

  ej->status = dataset::JobStatus::Running;
  store_->update_export(*ej);

  auto fail = [&](const std::string& message) {
    ej->status = dataset::JobStatus::Failed;
    ej->error = message;
    store_->update_export(*ej);
    store_->fail(job.job_id, message);
  };

  const auto task = store_->task(org, ej->task_id);
  if (!task) return fail("NOT_FOUND: task deleted");
  dataset::ExportInput input;
  input.task = task->task;
  input.discrepancy_flag_threshold = task->policy.discrepancy_flag_threshold;
  for (const auto& id : task->task.asset_ids) {
    if (auto a = store_->asset(org, id)) input.assets.push_back(std::move(*a));
  }
  input.sessions = store_->sessions_for_task(org, task->task.task_id);

  dataset::ExportConfig cfg;
  cfg.seed = ej->seed;
  cfg.per_subcategory_test = ej->per_subcategory_test;
  cfg.workers = opts_.export_workers;
  const dataset::BlobLoader loader = [this](const std::string& digest) -> std::optional<std::string> {
    if (!blobs_->contains(digest)) return std::nullopt;
    return blobs_->get(digest);
  };

  try {
    const auto result = dataset::run_export(ej->shape, input, *journaled_llm_, loader, cfg, opts_.data_dir);
    ej->outputs.clear();
    const std::string prefix = fs::relative(result.dir, opts_.data_dir).generic_string() + "/";
    for (const auto& f : result.files) ej->outputs.push_back(prefix + f);
    ej->stats = result.stats;
    ej->warnings = result.warnings;
    ej->error.reset();
    ej->status = dataset::JobStatus::Done;
    store_->update_export(*ej);
    store_->finish(job.job_id);
  } catch (const Error& e) {
    // A transcript may also have landed between loading and the check.
    auto sessions_moved = [&] {
      const auto now = store_->sessions_for_task(org, task->task.task_id);
      if (now.size() != input.sessions.size()) return true;
      for (std::size_t i = 0; i < now.size(); ++i) {
        if (now[i].session_id != input.sessions[i].session_id || now[i].version != input.sessions[i].version) return true;
      }
      return false;
    };
    if (e.code() == "TRANSCRIPTS_PENDING" && (store_->pending_jobs("transcribe") > 0 || sessions_moved())) {
      ej->status = dataset::JobStatus::Queued;
      store_->update_export(*ej);
      store_->release(job.job_id, wall_ms() + 4 * opts_.poll.count(), true);
      return;
    }
    fail(e.code() + ": " + e.detail());
  } catch (const std::exception& e) {
    fail(e.what());
  }
}

}  // namespace dense::service
