#include "dense/core/types.hpp"

#include <algorithm>
#include <array>
#include <string_view>
#include <utility>

namespace dense {

namespace {

template <class E, std::size_t N>
const char* lookup(const std::array<std::pair<E, const char*>, N>& table, E v) {
  for (const auto& [e, name] : table) {
    if (e == v) return name;
  }
  return "?";
}

template <class E, std::size_t N>
std::optional<E> reverse(const std::array<std::pair<E, const char*>, N>& table, std::string_view s) {
  for (const auto& [e, name] : table) {
    if (s == name) return e;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<AssetKind, const char*>, 2> kAssetKinds{{
    {AssetKind::Image2D, "IMAGE_2D"},
    {AssetKind::Scene3D, "SCENE_3D"},
}};

constexpr std::array<std::pair<PromptProfile, const char*>, 3> kProfiles{{
    {PromptProfile::PartA, "PART_A"},
    {PromptProfile::PartB, "PART_B"},
    {PromptProfile::Scene, "SCENE"},
}};

constexpr std::array<std::pair<Site, const char*>, 2> kSites{{
    {Site::Indoor, "INDOOR"},
    {Site::Outdoor, "OUTDOOR"},
}};

constexpr std::array<std::pair<Stage, const char*>, 3> kStages{{
    {Stage::Objects, "OBJECTS"},
    {Stage::Scene, "SCENE"},
    {Stage::Submitted, "SUBMITTED"},
}};

constexpr std::array<std::pair<CaptionSource, const char*>, 2> kSources{{
    {CaptionSource::RawTranscript, "RAW_TRANSCRIPT"},
    {CaptionSource::Summarized, "SUMMARIZED"},
}};

constexpr std::array<std::pair<QaCategory, const char*>, 7> kCategories{{
    {QaCategory::SceneClassification, "SCENE_CLASSIFICATION"},
    {QaCategory::ObjectPresence, "OBJECT_PRESENCE"},
    {QaCategory::Localization, "LOCALIZATION"},
    {QaCategory::SizeComparison, "SIZE_COMPARISON"},
    {QaCategory::DistanceReasoning, "DISTANCE_REASONING"},
    {QaCategory::AnomalyDetection, "ANOMALY_DETECTION"},
    {QaCategory::DenseDescription, "DENSE_DESCRIPTION"},
}};

constexpr std::array<std::pair<QaKind, const char*>, 2> kKinds{{
    {QaKind::Oeqa, "OEQA"},
    {QaKind::Mcqa, "MCQA"},
}};

}  // namespace

const SceneObject* Asset::find_object(const ObjectId& id) const {
  if (!objects) return nullptr;
  auto it = std::find_if(objects->begin(), objects->end(),
                         [&](const SceneObject& o) { return o.object_id == id; });
  return it == objects->end() ? nullptr : &*it;
}

const std::string* Recording::effective_transcript() const {
  if (edited_transcript) return &*edited_transcript;
  if (auto_transcript) return &*auto_transcript;
  return nullptr;
}

Recording* AnnotationSession::find_recording(const RecordingId& id) {
  auto it = std::find_if(recordings.begin(), recordings.end(),
                         [&](const Recording& r) { return r.recording_id == id; });
  return it == recordings.end() ? nullptr : &*it;
}

const Recording* AnnotationSession::find_recording(const RecordingId& id) const {
  return const_cast<AnnotationSession*>(this)->find_recording(id);
}

const char* to_string(AssetKind v) { return lookup(kAssetKinds, v); }
const char* to_string(PromptProfile v) { return lookup(kProfiles, v); }
const char* to_string(Site v) { return lookup(kSites, v); }
const char* to_string(Stage v) { return lookup(kStages, v); }
const char* to_string(CaptionSource v) { return lookup(kSources, v); }
const char* to_string(QaCategory v) { return lookup(kCategories, v); }
const char* to_string(QaKind v) { return lookup(kKinds, v); }

std::optional<AssetKind> parse_asset_kind(std::string_view s) { return reverse(kAssetKinds, s); }
std::optional<PromptProfile> parse_prompt_profile(std::string_view s) { return reverse(kProfiles, s); }
std::optional<Site> parse_site(std::string_view s) { return reverse(kSites, s); }
std::optional<Stage> parse_stage(std::string_view s) { return reverse(kStages, s); }
std::optional<QaCategory> parse_qa_category(std::string_view s) { return reverse(kCategories, s); }

}  // namespace dense
