#include "dense/workflow/policy.hpp"

namespace dense::workflow {

Violations QcPolicy::validate() const {
  Violations out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) out.push_back({"THRESHOLD_NONPOSITIVE", std::string(name) + " must be > 0"});
  };
  positive(min_object_recording_s, "min_object_recording_s");
  positive(min_scene_or_image_recording_s, "min_scene_or_image_recording_s");
  positive(max_recording_s, "max_recording_s");
  positive(discrepancy_flag_threshold, "discrepancy_flag_threshold");
  if (server_tolerance_s < 0.0) out.push_back({"THRESHOLD_NONPOSITIVE", "server_tolerance_s must be >= 0"});
  if (min_points_2d == 0) out.push_back({"THRESHOLD_NONPOSITIVE", "min_points_2d must be > 0"});
  if (min_object_recording_s > max_recording_s || min_scene_or_image_recording_s > max_recording_s) {
    out.push_back({"MIN_ABOVE_MAX", "minimum recording durations exceed the maximum"});
  }
  return out;
}

void to_json(nlohmann::json& j, const QcPolicy& p) {
  j = nlohmann::json{{"min_object_recording_s", p.min_object_recording_s},
                     {"min_scene_or_image_recording_s", p.min_scene_or_image_recording_s},
                     {"max_recording_s", p.max_recording_s},
                     {"server_tolerance_s", p.server_tolerance_s},
                     {"min_points_2d", p.min_points_2d},
                     {"discrepancy_flag_threshold", p.discrepancy_flag_threshold}};
}

void from_json(const nlohmann::json& j, QcPolicy& p) {
  const QcPolicy d;
  p.min_object_recording_s = j.value("min_object_recording_s", d.min_object_recording_s);
  p.min_scene_or_image_recording_s = j.value("min_scene_or_image_recording_s", d.min_scene_or_image_recording_s);
  p.max_recording_s = j.value("max_recording_s", d.max_recording_s);
  p.server_tolerance_s = j.value("server_tolerance_s", d.server_tolerance_s);
  p.min_points_2d = j.value("min_points_2d", d.min_points_2d);
  p.discrepancy_flag_threshold = j.value("discrepancy_flag_threshold", d.discrepancy_flag_threshold);
}

}  // namespace dense::workflow
