#include "dense/geometry/npy.hpp"

#include <bit>
#include <cstring>
#include <regex>

#include "dense/core/error.hpp"

namespace dense::geometry {

namespace {

constexpr std::size_t kGrowthDigits = 21;
constexpr std::size_t kAlign = 64;

std::string header_text(std::size_t rows) {
  const std::string n = std::to_string(rows);
  std::string h = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + n + ", 6), }";
  h.append(kGrowthDigits > n.size() ? kGrowthDigits - n.size() : 0, ' ');
  const std::size_t hlen = h.size() + 1;
  const std::size_t pad = kAlign - ((10 + hlen) % kAlign);
  h.append(pad, ' ');
  h.push_back('\n');
  return h;
}

}  // namespace

std::string npy_header(std::size_t rows) {
  const std::string header = header_text(rows);
  std::string out = "\x93NUMPY";
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xFF));
  out.push_back(static_cast<char>(header.size() >> 8));
  return out + header;
}

std::string npy_bytes(const PointCloud& cloud) {
  if (cloud.points.size() != cloud.n * kCloudColumns) {
    throw Error("SHAPE_MISMATCH", "point buffer does not hold n x 6 values");
  }
  std::string out = npy_header(cloud.n);
  out.reserve(out.size() + cloud.points.size() * 4);
  for (float f : cloud.points) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  return out;
}

std::size_t write_npy(const PointCloud& cloud, std::ostream& sink) {
  const std::string bytes = npy_bytes(cloud);
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw Error("IO_ERROR", "failed writing .npy output");
  return bytes.size();
}

PointCloud read_npy(std::string_view bytes) {
  if (bytes.size() < 10 || bytes.substr(0, 6) != "\x93NUMPY" || bytes[6] != '\x01') {
    throw Error("BAD_NPY", "not an .npy version 1.0 file");
  }
  const std::size_t hlen = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  if (bytes.size() < 10 + hlen) throw Error("BAD_NPY", "truncated header");
  const std::string header(bytes.substr(10, hlen));
  static const std::regex re(
      R"(^\{'descr': '<f4', 'fortran_order': False, 'shape': \((\d+), 6\), \} *\n$)");
  std::smatch m;
  if (!std::regex_match(header, m, re)) throw Error("BAD_NPY", "expected a C-order <f4 array of shape (N, 6)");
  PointCloud cloud;
  cloud.n = std::stoull(m[1].str());
  const std::string_view data = bytes.substr(10 + hlen);
  if (data.size() != cloud.n * kCloudColumns * 4) throw Error("BAD_NPY", "data length does not match shape");
  cloud.points.resize(cloud.n * kCloudColumns);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(data[i * 4 + static_cast<std::size_t>(b)]);
    cloud.points[i] = std::bit_cast<float>(bits);
  }
  return cloud;
}

}  // namespace dense::geometry
