#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dense/core/types.hpp"

namespace dense::dataset {

struct LanguageStats {
  std::size_t annotation_count = 0;
  std::size_t median_word_count = 0;
  std::size_t median_char_count = 0;

  friend bool operator==(const LanguageStats&, const LanguageStats&) = default;
};

using ExportStats = std::map<std::string, LanguageStats>;

// Lower median; 0 for an empty sample.
std::size_t lower_median(std::vector<std::size_t> values);

ExportStats compute_stats(const std::vector<Caption>& captions);

// Tab-separated table with a header row, languages in order.
std::string render_stats(const ExportStats& stats);

void to_json(nlohmann::json& j, const LanguageStats& s);
void from_json(const nlohmann::json& j, LanguageStats& s);

}  // namespace dense::dataset
