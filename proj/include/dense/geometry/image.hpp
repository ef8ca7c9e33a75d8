#pragma once

#include <string_view>

#include "dense/geometry/mesh.hpp"

namespace dense::geometry {

// PNG or JPEG, detected from the signature. Throws Error{BAD_TEXTURE}.
Image decode_image(std::string_view bytes);

}  // namespace dense::geometry
