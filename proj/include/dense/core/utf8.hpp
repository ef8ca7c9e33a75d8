#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace dense::utf8 {

// Decodes UTF-8 into Unicode scalar values. Ill-formed sequences decode to
// U+FFFD, one replacement per maximal invalid subpart.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);

std::size_t scalar_count(std::string_view text);

// Unicode White_Space property.
bool is_space(char32_t c) noexcept;

// Number of maximal runs of non-whitespace scalars.
std::size_t word_count(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

}  // namespace dense::utf8
