#include "dense/workflow/engine.hpp"

#include <algorithm>
#include <cstdio>

#include "dense/core/error.hpp"
#include "dense/core/json.hpp"
#include "dense/core/validate.hpp"
#include "dense/workflow/discrepancy.hpp"

namespace dense::workflow {

namespace {

void require_mutable(const AnnotationSession& s) {
  if (s.stage == Stage::Submitted) {
    throw Error("SESSION_IMMUTABLE", "session " + s.session_id.str() + " is already submitted");
  }
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f s", v);
  return buf;
}

double longest_scene_recording(const AnnotationSession& s) {
  double best = 0.0;
  for (const auto& r : s.recordings) {
    if (r.target.is_scene()) best = std::max(best, r.duration_s);
  }
  return best;
}

Recording& recording_or_throw(AnnotationSession& s, const RecordingId& id) {
  Recording* r = s.find_recording(id);
  if (!r) throw Error("NOT_FOUND", "recording " + id.str() + " is not part of session " + s.session_id.str());
  return *r;
}

}  // namespace

AnnotationSession start_session(const Task* task, const Asset* asset, const StartRequest& request, SessionId id) {
  if (!task) throw Error("NOT_FOUND", "task not found");
  if (!asset) throw Error("NOT_FOUND", "asset not found");
  if (std::find(task->asset_ids.begin(), task->asset_ids.end(), asset->asset_id) == task->asset_ids.end()) {
    throw Error("NOT_FOUND", "asset " + asset->asset_id.str() + " is not part of task " + task->task_id.str());
  }
  if (request.annotator_org != task->org_id) {
    throw Error("FORBIDDEN", "annotator does not belong to the task's organization");
  }
  if (!task->annotators.empty() &&
      std::find(task->annotators.begin(), task->annotators.end(), request.annotator_id) == task->annotators.end()) {
    throw Error("FORBIDDEN", "annotator is not assigned to task " + task->task_id.str());
  }
  if (!is_bcp47(request.language)) {
    throw Error("BAD_LANGUAGE_TAG", "'" + request.language + "' is not a BCP-47 language tag");
  }
  AnnotationSession s;
  s.session_id = std::move(id);
  s.task_id = task->task_id;
  s.asset_id = asset->asset_id;
  s.annotator_id = request.annotator_id;
  s.language = request.language;
  s.native_speaker = request.native_speaker;
  s.stage = asset->kind == AssetKind::Scene3D ? Stage::Objects : Stage::Scene;
  return s;
}

AnnotationSession add_point(const AnnotationSession& session, const Asset& asset, PointAnnotation point) {
  require_mutable(session);
  if (asset.kind != AssetKind::Image2D) throw Error("WRONG_ASSET_KIND", "points are placed on 2D images only");
  point.order = static_cast<int>(session.points.size());
  if (const auto v = validate(point); !v.empty()) {
    nlohmann::json ctx = nlohmann::json::array();
    for (const auto& x : v) ctx.push_back({{"code", x.code}, {"detail", x.detail}});
    throw Error("INVALID_POINT", v.front().code + ": " + v.front().detail, ctx);
  }
  AnnotationSession next = session;
  next.points.push_back(std::move(point));
  return next;
}

AttachResult attach_recording(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy,
                              RecordingTarget target, std::string audio_ref, double duration_s,
                              RecordingId id) {
  require_mutable(session);
  if (!(duration_s > 0.0)) throw Error("INVALID_DURATION", "decoded audio has no duration");
  if (duration_s > policy.accepted_max_s()) {
    throw Error("DURATION_EXCEEDED", "recording lasts " + seconds(duration_s) + ", limit is " +
                                         seconds(policy.accepted_max_s()));
  }
  if (asset.kind == AssetKind::Image2D) {
    if (!target.is_scene()) throw Error("WRONG_ASSET_KIND", "2D images take image-level recordings only");
  } else if (target.is_scene()) {
    if (session.stage != Stage::Scene) {
      throw Error("STAGE_LOCKED", "scene recording is locked until every object is annotated");
    }
  } else {
    if (!asset.find_object(*target.object)) {
      throw Error("UNKNOWN_OBJECT", "object " + target.object->str() + " is not part of the scene");
    }
    if (session.stage != Stage::Objects) {
      throw Error("STAGE_LOCKED", "object recordings are closed once the scene stage is unlocked");
    }
  }
  Recording r;
  r.recording_id = std::move(id);
  r.target = std::move(target);
  r.audio_ref = std::move(audio_ref);
  r.duration_s = duration_s;
  AttachResult out{session, r};
  out.session.recordings.push_back(std::move(r));
  return out;
}

std::vector<MissingObject> incomplete_objects(const AnnotationSession& session, const Asset& asset,
                                              const QcPolicy& policy) {
  std::vector<MissingObject> missing;
  if (!asset.objects) return missing;
  for (const auto& obj : *asset.objects) {
    double best = 0.0;
    for (const auto& r : session.recordings) {
      if (r.target.object == obj.object_id) best = std::max(best, r.duration_s);
    }
    if (best < policy.min_object_recording_s) missing.push_back({obj.object_id, obj.name, best});
  }
  return missing;
}

AnnotationSession unlock_scene_stage(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy) {
  require_mutable(session);
  if (asset.kind != AssetKind::Scene3D) throw Error("WRONG_ASSET_KIND", "2D sessions have no object stage");
  if (session.stage != Stage::Objects) throw Error("WRONG_STAGE", "scene stage is already unlocked");
  const auto missing = incomplete_objects(session, asset, policy);
  if (!missing.empty()) {
    nlohmann::json ctx = nlohmann::json::array();
    for (const auto& m : missing) {
      ctx.push_back({{"object_id", m.object_id}, {"name", m.name}, {"longest_s", m.longest_s}});
    }
    throw Error("OBJECTS_INCOMPLETE",
                std::to_string(missing.size()) + " object(s) lack a recording of at least " +
                    seconds(policy.min_object_recording_s),
                ctx);
  }
  AnnotationSession next = session;
  next.stage = Stage::Scene;
  return next;
}

AnnotationSession edit_transcript(const AnnotationSession& session, const RecordingId& recording_id,
                                  std::string edited_text) {
  require_mutable(session);
  AnnotationSession next = session;
  Recording& r = recording_or_throw(next, recording_id);
  if (!r.auto_transcript) throw Error("TRANSCRIPT_PENDING", "automatic transcript not available yet");
  r.discrepancy = transcript_discrepancy(*r.auto_transcript, edited_text);
  r.edited_transcript = std::move(edited_text);
  return next;
}

AnnotationSession fill_auto_transcript(const AnnotationSession& session, const RecordingId& recording_id,
                                       std::string text) {
  AnnotationSession next = session;
  Recording& r = recording_or_throw(next, recording_id);
  if (r.auto_transcript) {
    if (*r.auto_transcript == text) return next;
    throw Error("AUTO_TRANSCRIPT_SET", "automatic transcript of " + recording_id.str() + " is write-once");
  }
  r.auto_transcript = std::move(text);
  return next;
}

SubmissionReport evaluate_submission(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy) {
  SubmissionReport report;
  auto fail = [&](std::string code, std::string detail) { report.failures.push_back({std::move(code), std::move(detail)}); };

  if (asset.kind == AssetKind::Image2D) {
    if (session.points.size() < policy.min_points_2d) {
      fail("MIN_POINTS", std::to_string(session.points.size()) + " point(s) marked, at least " +
                             std::to_string(policy.min_points_2d) + " required");
    }
  } else {
    if (session.stage == Stage::Objects) fail("STAGE_NOT_UNLOCKED", "scene stage has not been unlocked");
    const auto missing = incomplete_objects(session, asset, policy);
    if (!missing.empty()) {
      fail("OBJECTS_INCOMPLETE", std::to_string(missing.size()) + " object(s) lack a recording of at least " +
                                     seconds(policy.min_object_recording_s));
    }
  }
  const double longest = longest_scene_recording(session);
  if (longest < policy.min_scene_or_image_recording_s) {
    fail("MIN_DURATION", "longest scene/image recording is " + seconds(longest) + ", at least " +
                             seconds(policy.min_scene_or_image_recording_s) + " required");
  }
  for (const auto& r : session.recordings) {
    if (r.discrepancy && *r.discrepancy >= policy.discrepancy_flag_threshold) {
      report.flags.push_back({r.recording_id, *r.discrepancy});
    }
  }
  report.accepted = report.failures.empty();
  return report;
}

SubmitOutcome submit(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy) {
  require_mutable(session);
  SubmitOutcome out;
  out.report = evaluate_submission(session, asset, policy);
  if (out.report.accepted) {
    out.submitted = session;
    out.submitted->stage = Stage::Submitted;
  }
  return out;
}

void to_json(nlohmann::json& j, const SubmissionReport& r) {
  j = nlohmann::json{{"accepted", r.accepted}, {"failures", nlohmann::json::array()}, {"flags", nlohmann::json::array()}};
  for (const auto& f : r.failures) j["failures"].push_back({{"code", f.code}, {"detail", f.detail}});
  for (const auto& f : r.flags) j["flags"].push_back({{"recording_id", f.recording_id}, {"discrepancy", f.discrepancy}});
}

}  // namespace dense::workflow
