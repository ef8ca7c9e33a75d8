#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dense/core/types.hpp"

// Point micro-format used inside grounded training responses:
//
//   <point>65.20,63.90</point> table; <point>52.60,58.60</point> food; 
//
// Coordinates are percent of the displayed image with exactly two decimals;
// every entry ends with "; ". Names may contain anything but '<' and ';'.
namespace dense::pointing {

struct GroundedCaption {
  std::string caption;
  std::vector<PointAnnotation> points;
};

struct Diagnostic {
  std::size_t offset;  // byte offset of the offending "<point>"
  std::string reason;  // COORD_RANGE, MALFORMED_COORDS, MISSING_NAME, UNCLOSED_TAG, MISSING_SEPARATOR

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ParseResult {
  std::string residual;  // input minus point groups, trimmed
  std::vector<PointAnnotation> points;
  // Groups that were well formed except for coordinates outside [0, 100].
  std::vector<PointAnnotation> out_of_range;
  std::vector<Diagnostic> diagnostics;
};

// Throws Error{INVALID_POINT} if any point fails validation.
std::string serialize_points(std::span<const PointAnnotation> points);

// Never throws; problems are reported in `diagnostics`.
ParseResult parse_points(std::string_view text);

// caption + "\n" + serialize_points(points). Throws Error{EMPTY_CAPTION}.
std::string build_training_response(std::string_view caption, std::span<const PointAnnotation> points);

struct GroundingReport {
  double consistency = 1.0;  // share of candidate point names found in the candidate caption
  std::size_t duplicates = 0;  // repeated (name, x, y) triples beyond the first
  std::size_t out_of_range = 0;
  double gold_name_recall = 1.0;  // share of gold point names the candidate also lists
};

GroundingReport grounding_report(const GroundedCaption& gold, std::string_view candidate_text);

}  // namespace dense::pointing
