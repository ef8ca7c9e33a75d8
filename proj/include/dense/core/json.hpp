#pragma once

#include <json.hpp>

#include "dense/core/types.hpp"

// nlohmann::json bindings for the domain types. Field names are the wire names
// used by the HTTP API and the store.
namespace dense {

void to_json(nlohmann::json& j, AssetKind v);
void from_json(const nlohmann::json& j, AssetKind& v);
void to_json(nlohmann::json& j, PromptProfile v);
void from_json(const nlohmann::json& j, PromptProfile& v);
void to_json(nlohmann::json& j, Site v);
void from_json(const nlohmann::json& j, Site& v);
void to_json(nlohmann::json& j, Stage v);
void from_json(const nlohmann::json& j, Stage& v);
void to_json(nlohmann::json& j, CaptionSource v);
void from_json(const nlohmann::json& j, CaptionSource& v);
void to_json(nlohmann::json& j, QaCategory v);
void from_json(const nlohmann::json& j, QaCategory& v);
void to_json(nlohmann::json& j, QaKind v);
void from_json(const nlohmann::json& j, QaKind& v);

void to_json(nlohmann::json& j, const Task& v);
void from_json(const nlohmann::json& j, Task& v);
void to_json(nlohmann::json& j, const SceneMeta& v);
void from_json(const nlohmann::json& j, SceneMeta& v);
void to_json(nlohmann::json& j, const SceneObject& v);
void from_json(const nlohmann::json& j, SceneObject& v);
void to_json(nlohmann::json& j, const Asset& v);
void from_json(const nlohmann::json& j, Asset& v);
// Coordinates travel as two-decimal strings ("65.20"); from_json also accepts
// JSON numbers.
void to_json(nlohmann::json& j, const PointAnnotation& v);
void from_json(const nlohmann::json& j, PointAnnotation& v);
void to_json(nlohmann::json& j, const Recording& v);
void from_json(const nlohmann::json& j, Recording& v);
void to_json(nlohmann::json& j, const AnnotationSession& v);
void from_json(const nlohmann::json& j, AnnotationSession& v);
void to_json(nlohmann::json& j, const Caption& v);
void to_json(nlohmann::json& j, const QaPair& v);
void from_json(const nlohmann::json& j, QaPair& v);

Percent percent_from_json(const nlohmann::json& j);

}  // namespace dense
