#pragma once

#include <string_view>
#include <vector>

#include "dense/geometry/mesh.hpp"

namespace dense::geometry {

// glTF 2.0 binary container. One TriangleMesh per triangle primitive of every
// node reachable from the default scene, in depth-first node order.
// Errors: BAD_MAGIC, MALFORMED_CHUNK, UNSUPPORTED_PRIMITIVE_MODE,
// MISSING_POSITION, BAD_TEXTURE.
std::vector<TriangleMesh> parse_glb(std::string_view bytes);

}  // namespace dense::geometry
