#include "dense/core/error.hpp"

namespace dense {

Error::Error(std::string code, std::string detail, nlohmann::json context)
    : std::runtime_error(code + ": " + detail),
      code_(std::move(code)),
      detail_(std::move(detail)),
      context_(std::move(context)) {}

}  // namespace dense
