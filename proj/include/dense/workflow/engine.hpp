#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dense/core/types.hpp"
#include "dense/workflow/policy.hpp"

// Annotation state machine. Every operation takes the current session by
// const reference and returns the successor value, or throws dense::Error
// with one of the codes below; the input is never modified.
//
//   NOT_FOUND, FORBIDDEN, SESSION_IMMUTABLE, WRONG_ASSET_KIND, WRONG_STAGE,
//   STAGE_LOCKED, DURATION_EXCEEDED, INVALID_DURATION, UNKNOWN_OBJECT,
//   OBJECTS_INCOMPLETE, TRANSCRIPT_PENDING, AUTO_TRANSCRIPT_SET,
//   INVALID_POINT, BAD_LANGUAGE_TAG
namespace dense::workflow {

struct StartRequest {
  PrincipalId annotator_id;
  OrgId annotator_org;
  std::string language;
  bool native_speaker = false;
};

// `task` / `asset` are null when the lookup failed.
AnnotationSession start_session(const Task* task, const Asset* asset, const StartRequest& request, SessionId id);

AnnotationSession add_point(const AnnotationSession& session, const Asset& asset, PointAnnotation point);

struct AttachResult {
  AnnotationSession session;
  Recording recording;
};

// Persists a recording with a pending automatic transcript. `duration_s` must
// come from decoding the audio, not from the client.
AttachResult attach_recording(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy,
                              RecordingTarget target, std::string audio_ref, double duration_s,
                              RecordingId id);

// Objects that block the scene stage: no recording at all, or none reaching
// the minimum object duration.
struct MissingObject {
  ObjectId object_id;
  std::string name;
  double longest_s = 0.0;
};

std::vector<MissingObject> incomplete_objects(const AnnotationSession& session, const Asset& asset,
                                              const QcPolicy& policy);

AnnotationSession unlock_scene_stage(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy);

AnnotationSession edit_transcript(const AnnotationSession& session, const RecordingId& recording_id,
                                  std::string edited_text);

// Completion callback of the transcription job. Fills auto_transcript once
// and never changes the stage; it is the one write allowed after submission.
AnnotationSession fill_auto_transcript(const AnnotationSession& session, const RecordingId& recording_id,
                                       std::string text);

struct Failure {
  std::string code;
  std::string detail;
};

struct Flag {
  RecordingId recording_id;
  double discrepancy = 0.0;
};

struct SubmissionReport {
  bool accepted = false;
  std::vector<Failure> failures;
  std::vector<Flag> flags;
};

// Gate evaluation only; never mutates.
SubmissionReport evaluate_submission(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy);

struct SubmitOutcome {
  SubmissionReport report;
  std::optional<AnnotationSession> submitted;  // set iff accepted
};

// Throws SESSION_IMMUTABLE on a SUBMITTED session.
SubmitOutcome submit(const AnnotationSession& session, const Asset& asset, const QcPolicy& policy);

void to_json(nlohmann::json& j, const SubmissionReport& r);

}  // namespace dense::workflow
