#include "dense/dataset/stats.hpp"

#include <algorithm>

#include "dense/core/utf8.hpp"

namespace dense::dataset {

std::size_t lower_median(std::vector<std::size_t> values) {
  if (values.empty()) return 0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

ExportStats compute_stats(const std::vector<Caption>& captions) {
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> counts;
  for (const auto& c : captions) {
    auto& [words, chars] = counts[c.language];
    words.push_back(utf8::word_count(c.text));
    chars.push_back(utf8::scalar_count(c.text));
  }
  ExportStats out;
  for (auto& [lang, wc] : counts) {
    out[lang] = {wc.first.size(), lower_median(wc.first), lower_median(wc.second)};
  }
  return out;
}

std::string render_stats(const ExportStats& stats) {
  std::string out = "language\tannotations\tmedian_words\tmedian_chars\n";
  for (const auto& [lang, s] : stats) {
    out += lang + "\t" + std::to_string(s.annotation_count) + "\t" + std::to_string(s.median_word_count) + "\t" +
           std::to_string(s.median_char_count) + "\n";
  }
  return out;
}

void to_json(nlohmann::json& j, const LanguageStats& s) {
  j = {{"annotation_count", s.annotation_count},
       {"median_word_count", s.median_word_count},
       {"median_char_count", s.median_char_count}};
}

void from_json(const nlohmann::json& j, LanguageStats& s) {
  s.annotation_count = j.at("annotation_count").get<std::size_t>();
  s.median_word_count = j.at("median_word_count").get<std::size_t>();
  s.median_char_count = j.at("median_char_count").get<std::size_t>();
}

}  // namespace dense::dataset
