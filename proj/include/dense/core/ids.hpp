#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <json.hpp>

namespace dense {

// Opaque string identifier, distinct per entity kind.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

template <class Tag>
void to_json(nlohmann::json& j, const Id<Tag>& id) {
  j = id.str();
}

template <class Tag>
void from_json(const nlohmann::json& j, Id<Tag>& id) {
  id = Id<Tag>(j.get<std::string>());
}

using TaskId = Id<struct TaskTag>;
using AssetId = Id<struct AssetTag>;
using ObjectId = Id<struct ObjectTag>;
using SessionId = Id<struct SessionTag>;
using RecordingId = Id<struct RecordingTag>;
using PrincipalId = Id<struct PrincipalTag>;
using OrgId = Id<struct OrgTag>;
using JobId = Id<struct JobTag>;

// UUID-v4 shaped identifiers. A fixed seed makes the sequence reproducible,
// which the end-to-end tests rely on; production uses std::random_device.
class IdGenerator {
 public:
  explicit IdGenerator(std::optional<std::uint64_t> seed = std::nullopt);

  std::string next();

  template <class IdT>
  IdT next_id() {
    return IdT(next());
  }

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

}  // namespace dense

template <class Tag>
struct std::hash<dense::Id<Tag>> {
  std::size_t operator()(const dense::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
