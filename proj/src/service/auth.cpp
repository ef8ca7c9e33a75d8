#include "dense/service/auth.hpp"

#include "dense/core/error.hpp"

namespace dense::service {

const char* to_string(Role r) { return r == Role::Admin ? "ADMIN" : "ANNOTATOR"; }

void from_json(const nlohmann::json& j, Principal& p) {
  p.principal_id = j.at("principal_id").get<PrincipalId>();
  p.org_id = j.at("org_id").get<OrgId>();
  const auto role = j.at("role").get<std::string>();
  if (role == "ADMIN") {
    p.role = Role::Admin;
  } else if (role == "ANNOTATOR") {
    p.role = Role::Annotator;
  } else {
    throw Error("CONFIG", "unknown role '" + role + "'");
  }
  p.token = j.at("token").get<std::string>();
  if (p.token.empty()) throw Error("CONFIG", "empty token for " + p.principal_id.str());
}

Principals::Principals(std::vector<Principal> list) {
  for (auto& p : list) {
    const std::string token = p.token;
    if (!by_token_.emplace(token, std::move(p)).second) throw Error("CONFIG", "duplicate token");
  }
}

Principals Principals::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_array()) throw Error("CONFIG", "principals must be a JSON array");
  return Principals(j.get<std::vector<Principal>>());
}

const Principal* Principals::by_token(const std::string& token) const {
  const auto it = by_token_.find(token);
  return it == by_token_.end() ? nullptr : &it->second;
}

const Principal* Principals::by_header(const std::string& authorization) const {
  constexpr std::string_view prefix = "Bearer ";
  if (authorization.size() <= prefix.size() || authorization.compare(0, prefix.size(), prefix) != 0) return nullptr;
  return by_token(authorization.substr(prefix.size()));
}

}  // namespace dense::service
