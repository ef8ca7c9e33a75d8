#include "dense/core/validate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "dense/core/taxonomy.hpp"
#include "dense/core/utf8.hpp"

namespace dense {

namespace {

void add(Violations& out, std::string code, std::string detail) {
  out.push_back({std::move(code), std::move(detail)});
}

bool alnum_run(std::string_view s, std::size_t lo, std::size_t hi, bool alpha_only) {
  if (s.size() < lo || s.size() > hi) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) {
    const auto u = static_cast<unsigned char>(c);
    return alpha_only ? std::isalpha(u) != 0 : std::isalnum(u) != 0;
  });
}

}  // namespace

bool is_bcp47(std::string_view tag) {
  // language[-subtag]*: a 2-8 letter primary subtag followed by 1-8
  // alphanumeric subtags. Registry membership is not checked.
  if (tag.empty()) return false;
  std::size_t pos = 0;
  bool first = true;
  while (true) {
    const std::size_t dash = tag.find('-', pos);
    const std::string_view part =
        tag.substr(pos, dash == std::string_view::npos ? std::string_view::npos : dash - pos);
    if (!(first ? alnum_run(part, 2, 8, true) : alnum_run(part, 1, 8, false))) return false;
    if (dash == std::string_view::npos) return true;
    pos = dash + 1;
    first = false;
  }
}

bool has_code(const Violations& v, std::string_view code) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

Violations validate(const PointAnnotation& point) {
  Violations out;
  if (utf8::trim(point.name).empty()) add(out, "EMPTY_NAME", "point name is empty");
  if (point.name.find_first_of("<;") != std::string::npos) {
    add(out, "NAME_RESERVED_CHAR", "point name contains '<' or ';'");
  }
  if (!point.x.in_range() || !point.y.in_range()) {
    add(out, "COORD_RANGE", "coordinates must lie in [0, 100]: (" + point.x.str() + ", " + point.y.str() + ")");
  }
  if (point.order < 0) add(out, "ORDER_NEGATIVE", "order index is negative");
  return out;
}

Violations validate(const Task& task) {
  Violations out;
  if (task.questions.empty()) add(out, "EMPTY_QUESTIONS", "task has no questions");
  if (utf8::trim(task.title).empty()) add(out, "EMPTY_TITLE", "task title is empty");
  const bool scene_profile = task.prompt_profile == PromptProfile::Scene;
  if ((task.kind == AssetKind::Scene3D) != scene_profile) {
    add(out, "PROFILE_KIND_MISMATCH",
        std::string("prompt profile ") + to_string(task.prompt_profile) + " does not fit task kind " +
            to_string(task.kind));
  }
  return out;
}

Violations validate(const Asset& asset) {
  Violations out;
  if (asset.media_ref.empty()) add(out, "MISSING_MEDIA", "asset has no media reference");
  if (asset.kind == AssetKind::Image2D) {
    if (asset.objects) add(out, "OBJECTS_ON_IMAGE", "2D assets carry no object list");
    if (asset.scene_meta) add(out, "SCENE_META_ON_IMAGE", "2D assets carry no scene metadata");
    return out;
  }
  if (!asset.scene_meta) {
    add(out, "MISSING_SCENE_META", "3D assets need scene metadata");
  } else {
    const auto sub = taxonomy::find_subcategory(asset.scene_meta->subcategory);
    if (!sub) {
      add(out, "UNKNOWN_SUBCATEGORY", "'" + asset.scene_meta->subcategory + "' is not in the scene taxonomy");
    } else {
      if (sub->category != asset.scene_meta->category) {
        add(out, "CATEGORY_MISMATCH",
            "subcategory '" + asset.scene_meta->subcategory + "' belongs to '" + std::string(sub->category) + "'");
      }
      if (sub->site != asset.scene_meta->site) {
        add(out, "SITE_MISMATCH", "site does not match the subcategory's category");
      }
    }
  }
  if (!asset.objects || asset.objects->empty()) {
    add(out, "NO_OBJECTS", "3D assets need at least one scene object");
  } else {
    std::set<std::string> ids;
    for (const auto& o : *asset.objects) {
      if (o.object_id.empty()) add(out, "EMPTY_OBJECT_ID", "scene object without id");
      if (!ids.insert(o.object_id.str()).second) add(out, "DUPLICATE_OBJECT_ID", o.object_id.str());
      if (utf8::trim(o.name).empty()) add(out, "EMPTY_OBJECT_NAME", o.object_id.str());
      if (utf8::trim(o.node_path).empty()) add(out, "EMPTY_NODE_PATH", o.object_id.str());
    }
  }
  return out;
}

Violations validate(const Recording& recording) {
  Violations out;
  if (!(recording.duration_s > 0.0) || !std::isfinite(recording.duration_s)) {
    add(out, "DURATION_NONPOSITIVE", "recording duration must be > 0");
  }
  if (recording.audio_ref.empty()) add(out, "MISSING_AUDIO", "recording has no audio blob");
  if (recording.discrepancy && !(*recording.discrepancy >= 0.0 && *recording.discrepancy <= 1.0)) {
    add(out, "DISCREPANCY_RANGE", "discrepancy must lie in [0, 1]");
  }
  if (recording.edited_transcript && !recording.auto_transcript) {
    add(out, "EDIT_WITHOUT_AUTO", "edited transcript exists without an automatic transcript");
  }
  return out;
}

Violations validate(const AnnotationSession& session) {
  Violations out;
  if (!is_bcp47(session.language)) add(out, "BAD_LANGUAGE_TAG", "'" + session.language + "' is not a BCP-47 tag");
  if (session.version < 0) add(out, "VERSION_NEGATIVE", "version must be non-negative");
  for (std::size_t i = 0; i < session.points.size(); ++i) {
    for (auto& v : validate(session.points[i])) add(out, v.code, "point " + std::to_string(i) + ": " + v.detail);
    if (session.points[i].order != static_cast<int>(i)) {
      add(out, "ORDER_GAP", "point " + std::to_string(i) + " has order " + std::to_string(session.points[i].order));
    }
  }
  std::set<std::string> ids;
  for (const auto& r : session.recordings) {
    if (!ids.insert(r.recording_id.str()).second) add(out, "DUPLICATE_RECORDING_ID", r.recording_id.str());
    for (auto& v : validate(r)) add(out, v.code, r.recording_id.str() + ": " + v.detail);
  }
  return out;
}

Violations validate(const Caption& caption) {
  Violations out;
  if (utf8::trim(caption.text).empty()) add(out, "EMPTY_CAPTION", "caption text is empty");
  if (caption.source == CaptionSource::Summarized && caption.contributing_recording_ids.empty()) {
    add(out, "NO_CONTRIBUTORS", "summarized captions list at least one recording");
  }
  return out;
}

Violations validate(const QaPair& qa, std::size_t option_count) {
  Violations out;
  if (utf8::trim(qa.question).empty()) add(out, "EMPTY_QUESTION", "question text is empty");
  if (utf8::trim(qa.answer).empty()) add(out, "EMPTY_ANSWER", "answer text is empty");
  if (qa.kind == QaKind::Oeqa) {
    if (!qa.options.empty() || qa.correct_index) add(out, "OPTIONS_ON_OEQA", "open-ended pairs carry no options");
    return out;
  }
  if (qa.category == QaCategory::DenseDescription) {
    add(out, "DENSE_AS_MCQA", "dense descriptions are open-ended only");
  }
  if (qa.options.size() != option_count) {
    add(out, "OPTION_COUNT", "expected " + std::to_string(option_count) + " options, got " + std::to_string(qa.options.size()));
  }
  std::set<std::string> unique(qa.options.begin(), qa.options.end());
  if (unique.size() != qa.options.size()) add(out, "DUPLICATE_OPTION", "options are not pairwise distinct");
  if (!qa.correct_index || *qa.correct_index < 0 ||
      static_cast<std::size_t>(*qa.correct_index) >= qa.options.size()) {
    add(out, "CORRECT_INDEX_RANGE", "correct_index is missing or out of range");
  } else if (qa.options[static_cast<std::size_t>(*qa.correct_index)] != qa.answer) {
    add(out, "ANSWER_MISMATCH", "options[correct_index] differs from the answer");
  }
  return out;
}

Violations validate(const PointCloud& cloud) {
  Violations out;
  if (cloud.n == 0) add(out, "EMPTY_CLOUD", "point cloud has no points");
  if (cloud.points.size() != cloud.n * kCloudColumns) {
    add(out, "SHAPE_MISMATCH", "expected " + std::to_string(cloud.n * kCloudColumns) + " values, got " +
                                   std::to_string(cloud.points.size()));
    return out;
  }
  bool nonfinite = false;
  bool color = false;
  for (std::size_t r = 0; r < cloud.n; ++r) {
    for (std::size_t c = 0; c < kCloudColumns; ++c) {
      const float v = cloud.at(r, c);
      if (!std::isfinite(v)) nonfinite = true;
      if (c >= 3 && !(v >= 0.0f && v <= 1.0f)) color = true;
    }
  }
  if (nonfinite) add(out, "NONFINITE", "point cloud contains non-finite values");
  if (color) add(out, "COLOR_RANGE", "RGB components must lie in [0, 1]");
  return out;
}

}  // namespace dense
