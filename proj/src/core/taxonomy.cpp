#include "dense/core/taxonomy.hpp"

#include <array>

namespace dense::taxonomy {

namespace {

using namespace std::string_view_literals;

constexpr std::array kHome{"Bedroom"sv, "Living Room"sv, "Kitchen"sv, "Dining Room"sv,
                           "Study Room"sv, "Bathroom"sv, "Children's Room"sv, "Balcony"sv};
constexpr std::array kWork{"Office"sv, "Meeting Room"sv, "Library"sv, "Study Hall"sv,
                           "Classroom"sv, "Laboratory"sv, "Recording Studio"sv, "Hospital Ward"sv};
constexpr std::array kCommercial{"Coffee Shop"sv, "Restaurant"sv, "Supermarket"sv, "Bar"sv,
                                 "Bookstore"sv, "Indoor Market"sv, "Hair Salon"sv, "Clinic"sv};
constexpr std::array kPublic{"Museum"sv, "Church"sv, "Theater"sv, "Music Room"sv,
                             "Activity Room"sv, "Indoor Workshop"sv,
                             "Indoor Flower Exhibition Hall"sv, "Gym"sv};
constexpr std::array kNature{"Beach"sv, "Forest Camping Site"sv, "Garden"sv,
                             "Mountain Cabin"sv, "Desert Oasis"sv, "Lake Side"sv};
constexpr std::array kUrban{"Amusement Park"sv, "City Square"sv, "Bus Terminal"sv,
                            "Rooftop Viewpoint"sv, "School Playground"sv, "Pedestrian Street"sv};
constexpr std::array kRural{"Farmland"sv, "Ranch"sv, "Fishing Village Dock"sv,
                            "Mountain Village"sv, "Marketplace"sv, "Orchard"sv};

const std::array<Category, 7> kCategories{{
    {"Home", Site::Indoor, kHome},
    {"Work Space", Site::Indoor, kWork},
    {"Commercial Space", Site::Indoor, kCommercial},
    {"Public Space", Site::Indoor, kPublic},
    {"Nature", Site::Outdoor, kNature},
    {"Urban Space", Site::Outdoor, kUrban},
    {"Rural", Site::Outdoor, kRural},
}};

}  // namespace

std::span<const Category> categories() { return kCategories; }

const std::vector<Subcategory>& subcategories() {
  static const std::vector<Subcategory> all = [] {
    std::vector<Subcategory> out;
    for (const auto& c : kCategories) {
      for (auto name : c.subcategories) out.push_back({name, c.name, c.site});
    }
    return out;
  }();
  return all;
}

std::optional<Subcategory> find_subcategory(std::string_view name) {
  for (const auto& s : subcategories()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

}  // namespace dense::taxonomy
