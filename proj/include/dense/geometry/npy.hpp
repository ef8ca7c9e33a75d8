#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>

#include "dense/core/types.hpp"

namespace dense::geometry {

// `.npy` version 1.0, '<f4', C order, shape (N, 6). The header matches what
// numpy writes for the same array.
// Magic, version, length and padded header text for an (rows, 6) array.
std::string npy_header(std::size_t rows);
std::string npy_bytes(const PointCloud& cloud);
std::size_t write_npy(const PointCloud& cloud, std::ostream& sink);

// Reads back files of that same layout. Throws Error{BAD_NPY}.
PointCloud read_npy(std::string_view bytes);

}  // namespace dense::geometry
