#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dense/core/ids.hpp"

namespace dense::service {

enum class Role { Admin, Annotator };

struct Principal {
  PrincipalId principal_id;
  OrgId org_id;
  Role role = Role::Annotator;
  std::string token;
};

const char* to_string(Role r);
void from_json(const nlohmann::json& j, Principal& p);

// Static bearer tokens.
class Principals {
 public:
  Principals() = default;
  explicit Principals(std::vector<Principal> list);

  // [{"principal_id", "org_id", "role": "ADMIN"|"ANNOTATOR", "token"}]
  static Principals from_json_text(const std::string& text);

  const Principal* by_token(const std::string& token) const;
  // Parses "Bearer <token>".
  const Principal* by_header(const std::string& authorization) const;

 private:
  std::map<std::string, Principal> by_token_;
};

}  // namespace dense::service
