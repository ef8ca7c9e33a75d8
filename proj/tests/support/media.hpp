#pragma once

// Byte-level builders for audio containers used as probe inputs.

#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <string>

namespace dense::testmedia {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// 16-bit PCM silence.
inline std::string wav(double seconds, std::uint32_t rate = 16000, std::uint16_t channels = 1) {
  const std::uint32_t byte_rate = rate * channels * 2;
  const auto data = static_cast<std::uint32_t>(seconds * byte_rate + 0.5);
  std::string out = "RIFF";
  put_le(out, 36 + data, 4);
  out += "WAVEfmt ";
  put_le(out, 16, 4);
  put_le(out, 1, 2);
  put_le(out, channels, 2);
  put_le(out, rate, 4);
  put_le(out, byte_rate, 4);
  put_le(out, channels * 2, 2);
  put_le(out, 16, 2);
  out += "data";
  put_le(out, data, 4);
  out.append(data, '\0');
  return out;
}

namespace ebml {

inline std::string id(std::uint32_t v) {
  std::string out;
  for (int shift = 24; shift >= 0; shift -= 8) {
    const auto b = static_cast<char>((v >> shift) & 0xFF);
    if (!out.empty() || b) out.push_back(b);
  }
  return out;
}

inline std::string size8(std::uint64_t n) {
  std::string out(1, '\x01');
  for (int shift = 48; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xFF));
  return out;
}

inline std::string el(std::uint32_t i, const std::string& payload) { return id(i) + size8(payload.size()) + payload; }

inline std::string el(std::uint32_t i, std::initializer_list<std::string> children) {
  std::string p;
  for (const auto& c : children) p += c;
  return el(i, p);
}

// "Unknown" size, as written by live encoders.
inline std::string open(std::uint32_t i) { return id(i) + "\x01\xFF\xFF\xFF\xFF\xFF\xFF\xFF"; }

inline std::string uint(std::uint32_t i, std::uint64_t v) {
  std::string p;
  for (int shift = 56; shift >= 0; shift -= 8) p.push_back(static_cast<char>((v >> shift) & 0xFF));
  return el(i, p);
}

inline std::string real(std::uint32_t i, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  std::string p;
  for (int shift = 56; shift >= 0; shift -= 8) p.push_back(static_cast<char>((bits >> shift) & 0xFF));
  return el(i, p);
}

inline std::string real32(std::uint32_t i, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  std::string p;
  for (int shift = 24; shift >= 0; shift -= 8) p.push_back(static_cast<char>((bits >> shift) & 0xFF));
  return el(i, p);
}

inline std::string str(std::uint32_t i, const std::string& s) { return el(i, s); }

}  // namespace ebml

struct WebmOptions {
  std::string codec = "A_OPUS";
  std::string doc_type = "webm";
  bool write_duration = true;
  bool float32_duration = false;
  bool live = false;  // unknown-size Segment and Clusters
  unsigned char toc = 0xF8;  // CELT fullband 20 ms, one frame
};

// Opus stream of `packets` packets of 20 ms, one cluster per second.
inline std::string webm(std::size_t packets, WebmOptions o = {}) {
  using namespace ebml;
  std::string info = uint(0x2AD7B1, 1'000'000);
  const double ms = static_cast<double>(packets) * 20.0;
  if (o.write_duration) info += o.float32_duration ? real32(0x4489, static_cast<float>(ms)) : real(0x4489, ms);
  std::string body = el(0x1549A966, info);
  body += el(0x1654AE6B, {el(0xAE, {uint(0xD7, 1), uint(0x83, 2), str(0x86, o.codec)})});
  for (std::size_t first = 0; first < packets; first += 50) {
    std::string cluster = uint(0xE7, first * 20);
    for (std::size_t k = first; k < packets && k < first + 50; ++k) {
      const auto rel = static_cast<std::uint16_t>((k - first) * 20);
      std::string block = "\x81";
      block.push_back(static_cast<char>(rel >> 8));
      block.push_back(static_cast<char>(rel & 0xFF));
      block.push_back('\x80');
      block.push_back(static_cast<char>(o.toc));
      block += "\x01\x02\x03";
      cluster += el(0xA3, block);
    }
    body += o.live ? open(0x1F43B675) + cluster : el(0x1F43B675, cluster);
  }
  const std::string header = el(0x1A45DFA3, {uint(0x4286, 1), str(0x4282, o.doc_type)});
  return header + (o.live ? open(0x18538067) + body : el(0x18538067, body));
}

}  // namespace dense::testmedia
