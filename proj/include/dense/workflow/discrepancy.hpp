#pragma once

#include <string_view>

namespace dense::workflow {

// Levenshtein distance between the two texts over Unicode scalar values,
// divided by max(len(a), len(b), 1). Symmetric, 0 iff equal, at most 1.
double transcript_discrepancy(std::string_view automatic, std::string_view edited);

}  // namespace dense::workflow
