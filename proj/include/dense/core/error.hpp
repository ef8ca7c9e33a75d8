#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace dense {

// Failure carrying a machine-readable code ("NOT_FOUND", "STAGE_LOCKED", ...).
// `context` holds structured detail such as the list of incomplete objects.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string detail, nlohmann::json context = nullptr);

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const nlohmann::json& context() const noexcept { return context_; }

 private:
  std::string code_;
  std::string detail_;
  nlohmann::json context_;
};

}  // namespace dense
