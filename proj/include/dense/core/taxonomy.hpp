#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dense/core/types.hpp"

namespace dense::taxonomy {

struct Category {
  std::string_view name;
  Site site;
  std::span<const std::string_view> subcategories;
};

struct Subcategory {
  std::string_view name;
  std::string_view category;
  Site site;
};

// Seven categories, fifty subcategories, in table order.
std::span<const Category> categories();

const std::vector<Subcategory>& subcategories();

std::optional<Subcategory> find_subcategory(std::string_view name);

}  // namespace dense::taxonomy
