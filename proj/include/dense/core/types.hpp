#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dense/core/ids.hpp"
#include "dense/core/percent.hpp"

namespace dense {

enum class AssetKind { Image2D, Scene3D };

// Which default question set a task ships with. Scene3D tasks always use
// Scene; Image2D tasks use exactly one of PartA (captions only) or PartB
// (captions and points).
enum class PromptProfile { PartA, PartB, Scene };

enum class Site { Indoor, Outdoor };

enum class Stage { Objects, Scene, Submitted };

enum class CaptionSource { RawTranscript, Summarized };

enum class QaCategory {
  SceneClassification,
  ObjectPresence,
  Localization,
  SizeComparison,
  DistanceReasoning,
  AnomalyDetection,
  DenseDescription,
};

enum class QaKind { Oeqa, Mcqa };

struct Task {
  TaskId task_id;
  std::string title;
  AssetKind kind = AssetKind::Image2D;
  PromptProfile prompt_profile = PromptProfile::PartA;
  std::string instructions;
  std::vector<std::string> questions;
  std::vector<AssetId> asset_ids;
  OrgId org_id;
  std::string created_at;  // ISO-8601 UTC
  // Explicit assignment; empty means any annotator of the org may work on it.
  std::vector<PrincipalId> annotators;
};

struct SceneMeta {
  std::string category;
  std::string subcategory;
  Site site = Site::Indoor;
};

struct SceneObject {
  ObjectId object_id;
  std::string name;
  std::string node_path;  // '/'-separated node names, matched as a suffix
};

struct Asset {
  AssetId asset_id;
  AssetKind kind = AssetKind::Image2D;
  std::string media_ref;  // blob digest
  std::optional<SceneMeta> scene_meta;
  std::optional<std::vector<SceneObject>> objects;

  const SceneObject* find_object(const ObjectId& id) const;
  std::size_t object_count() const { return objects ? objects->size() : 0; }
};

struct PointAnnotation {
  std::string name;
  Percent x;
  Percent y;
  int order = 0;

  friend bool operator==(const PointAnnotation&, const PointAnnotation&) = default;
};

// Either the whole image/scene or one scene object.
struct RecordingTarget {
  std::optional<ObjectId> object;

  static RecordingTarget scene() { return {}; }
  static RecordingTarget for_object(ObjectId id) { return {std::move(id)}; }
  bool is_scene() const { return !object.has_value(); }

  friend bool operator==(const RecordingTarget&, const RecordingTarget&) = default;
};

struct Recording {
  RecordingId recording_id;
  RecordingTarget target;
  std::string audio_ref;  // blob digest
  double duration_s = 0.0;
  std::optional<std::string> auto_transcript;  // nullopt while transcription is pending
  std::optional<std::string> edited_transcript;
  std::optional<double> discrepancy;

  // The text that downstream stages consume: the annotator's edit if any.
  const std::string* effective_transcript() const;

  friend bool operator==(const Recording&, const Recording&) = default;
};

struct AnnotationSession {
  SessionId session_id;
  TaskId task_id;
  AssetId asset_id;
  PrincipalId annotator_id;
  std::string language;  // BCP-47, annotator-declared
  bool native_speaker = false;
  Stage stage = Stage::Scene;
  std::vector<PointAnnotation> points;
  std::vector<Recording> recordings;
  std::int64_t version = 0;

  Recording* find_recording(const RecordingId& id);
  const Recording* find_recording(const RecordingId& id) const;

  friend bool operator==(const AnnotationSession&, const AnnotationSession&) = default;
};

struct Caption {
  AssetId asset_id;
  std::string language;
  std::string text;
  CaptionSource source = CaptionSource::RawTranscript;
  std::vector<RecordingId> contributing_recording_ids;
};

struct QaPair {
  AssetId scene_id;
  std::string language;
  QaCategory category = QaCategory::SceneClassification;
  std::string question;
  QaKind kind = QaKind::Oeqa;
  std::string answer;
  std::vector<std::string> options;  // MCQA only
  std::optional<int> correct_index;  // MCQA only

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

inline constexpr std::size_t kDefaultCloudPoints = 8192;
inline constexpr std::size_t kCloudColumns = 6;

// Row-major N x 6 (x, y, z, r, g, b) array; positions in world coordinates,
// colors in [0, 1].
struct PointCloud {
  AssetId scene_id;
  std::size_t n = 0;
  std::vector<float> points;

  float at(std::size_t row, std::size_t col) const { return points[row * kCloudColumns + col]; }
};

const char* to_string(AssetKind v);
const char* to_string(PromptProfile v);
const char* to_string(Site v);
const char* to_string(Stage v);
const char* to_string(CaptionSource v);
const char* to_string(QaCategory v);
const char* to_string(QaKind v);

std::optional<AssetKind> parse_asset_kind(std::string_view s);
std::optional<PromptProfile> parse_prompt_profile(std::string_view s);
std::optional<Site> parse_site(std::string_view s);
std::optional<Stage> parse_stage(std::string_view s);
std::optional<QaCategory> parse_qa_category(std::string_view s);

// Ordering used by stage-monotonicity checks.
constexpr int stage_rank(Stage s) noexcept { return static_cast<int>(s); }

}  // namespace dense
