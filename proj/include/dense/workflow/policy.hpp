#pragma once

#include <cstddef>

#include <json.hpp>

#include "dense/core/validate.hpp"

namespace dense::workflow {

// Quality-control thresholds. Durations in seconds.
struct QcPolicy {
  double min_object_recording_s = 20.0;
  double min_scene_or_image_recording_s = 60.0;
  double max_recording_s = 180.0;
  // Slack above the client-side cutoff tolerated for container rounding.
  double server_tolerance_s = 5.0;
  std::size_t min_points_2d = 5;
  double discrepancy_flag_threshold = 0.5;

  double accepted_max_s() const { return max_recording_s + server_tolerance_s; }

  Violations validate() const;
};

void to_json(nlohmann::json& j, const QcPolicy& p);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, QcPolicy& p);

}  // namespace dense::workflow
