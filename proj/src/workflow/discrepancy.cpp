#include "dense/workflow/discrepancy.hpp"

#include <algorithm>
#include <vector>

#include "dense/core/utf8.hpp"

namespace dense::workflow {

double transcript_discrepancy(std::string_view automatic, std::string_view edited) {
  const std::u32string a = utf8::decode(automatic);
  const std::u32string b = utf8::decode(edited);
  const std::size_t denom = std::max({a.size(), b.size(), std::size_t{1}});
  if (a == b) return 0.0;

  // Two-row Wagner-Fischer over the shorter string.
  const std::u32string& longer = a.size() >= b.size() ? a : b;
  const std::u32string& shorter = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> prev(shorter.size() + 1);
  std::vector<std::size_t> cur(shorter.size() + 1);
  for (std::size_t j = 0; j <= shorter.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (longer[i - 1] == shorter[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[shorter.size()]) / static_cast<double>(denom);
}

}  // namespace dense::workflow
