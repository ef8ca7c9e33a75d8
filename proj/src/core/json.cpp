#include "dense/core/json.hpp"

#include "dense/core/error.hpp"

namespace dense {

using nlohmann::json;

namespace {

template <class E, class Parse>
void enum_from(const json& j, E& v, Parse parse, const char* what) {
  const auto s = j.get<std::string>();
  const auto parsed = parse(s);
  if (!parsed) throw Error("BAD_REQUEST", std::string("unknown ") + what + " '" + s + "'");
  v = *parsed;
}

template <class T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, AssetKind v) { j = to_string(v); }
void from_json(const json& j, AssetKind& v) { enum_from(j, v, parse_asset_kind, "asset kind"); }
void to_json(json& j, PromptProfile v) { j = to_string(v); }
void from_json(const json& j, PromptProfile& v) { enum_from(j, v, parse_prompt_profile, "prompt profile"); }
void to_json(json& j, Site v) { j = to_string(v); }
void from_json(const json& j, Site& v) { enum_from(j, v, parse_site, "site"); }
void to_json(json& j, Stage v) { j = to_string(v); }
void from_json(const json& j, Stage& v) { enum_from(j, v, parse_stage, "stage"); }
void to_json(json& j, CaptionSource v) { j = to_string(v); }
void from_json(const json& j, CaptionSource& v) {
  const auto s = j.get<std::string>();
  if (s == "RAW_TRANSCRIPT") {
    v = CaptionSource::RawTranscript;
  } else if (s == "SUMMARIZED") {
    v = CaptionSource::Summarized;
  } else {
    throw Error("BAD_REQUEST", "unknown caption source '" + s + "'");
  }
}
void to_json(json& j, QaCategory v) { j = to_string(v); }
void from_json(const json& j, QaCategory& v) { enum_from(j, v, parse_qa_category, "QA category"); }
void to_json(json& j, QaKind v) { j = to_string(v); }
void from_json(const json& j, QaKind& v) {
  const auto s = j.get<std::string>();
  if (s == "OEQA") {
    v = QaKind::Oeqa;
  } else if (s == "MCQA") {
    v = QaKind::Mcqa;
  } else {
    throw Error("BAD_REQUEST", "unknown QA kind '" + s + "'");
  }
}

void to_json(json& j, const Task& v) {
  j = json{{"task_id", v.task_id},         {"title", v.title},
           {"kind", v.kind},               {"prompt_profile", v.prompt_profile},
           {"instructions", v.instructions}, {"questions", v.questions},
           {"asset_ids", v.asset_ids},     {"org_id", v.org_id},
           {"created_at", v.created_at},   {"annotators", v.annotators}};
}

void from_json(const json& j, Task& v) {
  v.task_id = j.value("task_id", TaskId{});
  v.title = j.value("title", std::string{});
  v.kind = j.at("kind").get<AssetKind>();
  v.prompt_profile = j.value("prompt_profile",
                             v.kind == AssetKind::Scene3D ? PromptProfile::Scene : PromptProfile::PartA);
  v.instructions = j.value("instructions", std::string{});
  v.questions = j.value("questions", std::vector<std::string>{});
  v.asset_ids = j.value("asset_ids", std::vector<AssetId>{});
  v.org_id = j.value("org_id", OrgId{});
  v.created_at = j.value("created_at", std::string{});
  v.annotators = j.value("annotators", std::vector<PrincipalId>{});
}

void to_json(json& j, const SceneMeta& v) {
  j = json{{"category", v.category}, {"subcategory", v.subcategory}, {"site", v.site}};
}

void from_json(const json& j, SceneMeta& v) {
  v.category = j.value("category", std::string{});
  v.subcategory = j.at("subcategory").get<std::string>();
  v.site = j.value("site", Site::Indoor);
}

void to_json(json& j, const SceneObject& v) {
  j = json{{"object_id", v.object_id}, {"name", v.name}, {"node_path", v.node_path}};
}

void from_json(const json& j, SceneObject& v) {
  v.object_id = j.value("object_id", ObjectId{});
  v.name = j.at("name").get<std::string>();
  v.node_path = j.value("node_path", v.name);
}

void to_json(json& j, const Asset& v) {
  j = json{{"asset_id", v.asset_id}, {"kind", v.kind}, {"media_ref", v.media_ref}};
  if (v.scene_meta) j["scene_meta"] = *v.scene_meta;
  if (v.objects) j["objects"] = *v.objects;
}

void from_json(const json& j, Asset& v) {
  v.asset_id = j.value("asset_id", AssetId{});
  v.kind = j.at("kind").get<AssetKind>();
  v.media_ref = j.value("media_ref", std::string{});
  v.scene_meta = opt<SceneMeta>(j, "scene_meta");
  v.objects = opt<std::vector<SceneObject>>(j, "objects");
}

Percent percent_from_json(const json& j) {
  std::optional<Percent> p;
  if (j.is_string()) {
    p = Percent::parse(j.get<std::string>());
  } else if (j.is_number_integer()) {
    p = Percent::from_hundredths(j.get<std::int64_t>() * 100);
  } else if (j.is_number()) {
    p = Percent::from_double(j.get<double>());
  }
  if (!p) throw Error("BAD_REQUEST", "coordinate is not a decimal number: " + j.dump());
  return *p;
}

void to_json(json& j, const PointAnnotation& v) {
  j = json{{"name", v.name}, {"x", v.x.str()}, {"y", v.y.str()}, {"order", v.order}};
}

void from_json(const json& j, PointAnnotation& v) {
  v.name = j.at("name").get<std::string>();
  v.x = percent_from_json(j.at("x"));
  v.y = percent_from_json(j.at("y"));
  v.order = j.value("order", 0);
}

void to_json(json& j, const Recording& v) {
  j = json{{"recording_id", v.recording_id}, {"audio_ref", v.audio_ref}, {"duration_s", v.duration_s}};
  if (v.target.is_scene()) {
    j["target"] = "SCENE_OR_IMAGE";
  } else {
    j["target"] = "OBJECT";
    j["object_id"] = *v.target.object;
  }
  if (v.auto_transcript) j["auto_transcript"] = *v.auto_transcript;
  if (v.edited_transcript) j["edited_transcript"] = *v.edited_transcript;
  if (v.discrepancy) j["discrepancy"] = *v.discrepancy;
}

void from_json(const json& j, Recording& v) {
  v.recording_id = j.at("recording_id").get<RecordingId>();
  v.audio_ref = j.value("audio_ref", std::string{});
  v.duration_s = j.value("duration_s", 0.0);
  if (j.value("target", std::string("SCENE_OR_IMAGE")) == "OBJECT") {
    v.target = RecordingTarget::for_object(j.at("object_id").get<ObjectId>());
  } else {
    v.target = RecordingTarget::scene();
  }
  v.auto_transcript = opt<std::string>(j, "auto_transcript");
  v.edited_transcript = opt<std::string>(j, "edited_transcript");
  v.discrepancy = opt<double>(j, "discrepancy");
}

void to_json(json& j, const AnnotationSession& v) {
  j = json{{"session_id", v.session_id},       {"task_id", v.task_id},
           {"asset_id", v.asset_id},           {"annotator_id", v.annotator_id},
           {"language", v.language},           {"native_speaker", v.native_speaker},
           {"stage", v.stage},                 {"points", v.points},
           {"recordings", v.recordings},       {"version", v.version}};
}

void from_json(const json& j, AnnotationSession& v) {
  v.session_id = j.at("session_id").get<SessionId>();
  v.task_id = j.at("task_id").get<TaskId>();
  v.asset_id = j.at("asset_id").get<AssetId>();
  v.annotator_id = j.at("annotator_id").get<PrincipalId>();
  v.language = j.at("language").get<std::string>();
  v.native_speaker = j.value("native_speaker", false);
  v.stage = j.at("stage").get<Stage>();
  v.points = j.value("points", std::vector<PointAnnotation>{});
  v.recordings = j.value("recordings", std::vector<Recording>{});
  v.version = j.value("version", std::int64_t{0});
}

void to_json(json& j, const Caption& v) {
  j = json{{"asset_id", v.asset_id},
           {"language", v.language},
           {"text", v.text},
           {"source", v.source},
           {"contributing_recording_ids", v.contributing_recording_ids}};
}

void to_json(json& j, const QaPair& v) {
  j = json{{"scene_id", v.scene_id}, {"language", v.language}, {"category", v.category},
           {"question", v.question}, {"kind", v.kind},         {"answer", v.answer}};
  if (v.kind == QaKind::Mcqa) {
    j["options"] = v.options;
    if (v.correct_index) j["correct_index"] = *v.correct_index;
  }
}

void from_json(const json& j, QaPair& v) {
  v.scene_id = j.at("scene_id").get<AssetId>();
  v.language = j.at("language").get<std::string>();
  v.category = j.at("category").get<QaCategory>();
  v.question = j.at("question").get<std::string>();
  v.kind = j.at("kind").get<QaKind>();
  v.answer = j.at("answer").get<std::string>();
  v.options = j.value("options", std::vector<std::string>{});
  v.correct_index = opt<int>(j, "correct_index");
}

}  // namespace dense
