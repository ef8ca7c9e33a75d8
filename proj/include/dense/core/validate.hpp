#pragma once

#include <string>
#include <vector>

#include "dense/core/types.hpp"

namespace dense {

struct Violation {
  std::string code;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using Violations = std::vector<Violation>;

// Each overload reports every invariant violation of the entity; none throws.
Violations validate(const PointAnnotation& point);
Violations validate(const Task& task);
Violations validate(const Asset& asset);
Violations validate(const Recording& recording);
Violations validate(const AnnotationSession& session);
Violations validate(const Caption& caption);
Violations validate(const QaPair& qa, std::size_t option_count = 4);
Violations validate(const PointCloud& cloud);

bool is_bcp47(std::string_view tag);

bool has_code(const Violations& v, std::string_view code);

}  // namespace dense
