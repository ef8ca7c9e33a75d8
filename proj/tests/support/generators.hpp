#pragma once

// Hand-rolled generators for property tests.

#include <string>
#include <vector>

#include "dense/core/rng.hpp"
#include "dense/core/types.hpp"
#include "dense/core/utf8.hpp"

namespace dense::testgen {

inline std::string pick(Rng& rng, const std::vector<std::string>& pool) { return pool[rng.below(pool.size())]; }

// Point names: trimmed, non-empty, free of '<' and ';'.
inline std::string point_name(Rng& rng) {
  static const std::vector<std::string> parts = {
      "table", "food", "red", "cup", "桌子", "café", "straße", "a", "1", "multi word", "x-y", "(lamp)",
      "\"quoted\"", "tab\there", "line\nbreak", "🙂", "42.5", ",", ">", "/point"};
  std::string out;
  const std::size_t n = 1 + rng.below(3);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += pick(rng, parts);
  }
  return std::string(utf8::trim(out));
}

inline Percent coordinate(Rng& rng) {
  switch (rng.below(8)) {
    case 0: return Percent::from_hundredths(0);
    case 1: return Percent::from_hundredths(10000);
    default: return Percent::from_hundredths(static_cast<std::int64_t>(rng.below(10001)));
  }
}

inline std::vector<PointAnnotation> point_list(Rng& rng, std::size_t max_len = 8) {
  std::vector<PointAnnotation> out;
  const std::size_t n = rng.below(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({point_name(rng), coordinate(rng), coordinate(rng), static_cast<int>(i)});
  }
  return out;
}

// Captions: trimmed, non-empty, never containing the "<point>" opener.
inline std::string caption(Rng& rng) {
  static const std::vector<std::string> words = {
      "a", "table", "with", "food", "桌子上有一碗面", "こんにちは", "naïve", "<", ">", ";", "</point>",
      "point>", "65.20,63.90", "\n", "  ", "\t", "—", "मंदिर", "5%", "end."};
  std::string out;
  const std::size_t n = 1 + rng.below(12);
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += pick(rng, words);
  }
  std::string trimmed(utf8::trim(out));
  return trimmed.empty() ? "caption" : trimmed;
}

inline std::string random_bytes(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> tokens = {"<point>", "</point>", ",", ";", " ", "\n", "1", "50.5",
                                                  "100.01", "-3", "name", "<", ">", "\xff", "\xe6\xa1", "."};
  std::string out;
  const std::size_t n = rng.below(max_len + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.below(3) == 0) {
      out.push_back(static_cast<char>(rng.below(256)));
    } else {
      out += pick(rng, tokens);
    }
  }
  return out;
}

}  // namespace dense::testgen
