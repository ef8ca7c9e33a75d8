#include "dense/workflow/audio.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <optional>
#include <vector>

#include "dense/core/error.hpp"

namespace dense::workflow::audio {

namespace {

std::uint32_t le32(std::string_view d, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(d[at + static_cast<std::size_t>(i)]);
  return v;
}

std::uint16_t le16(std::string_view d, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(d[at]) |
                                    (static_cast<unsigned char>(d[at + 1]) << 8));
}

AudioInfo probe_wav(std::string_view d) {
  if (d.size() < 12) throw Error("MALFORMED_AUDIO", "truncated RIFF header");
  std::uint32_t byte_rate = 0;
  std::optional<std::uint64_t> data_bytes;
  std::size_t pos = 12;
  while (pos + 8 <= d.size()) {
    const std::string_view id = d.substr(pos, 4);
    const std::uint64_t size = le32(d, pos + 4);
    const std::size_t body = pos + 8;
    const std::uint64_t available = d.size() - body;
    if (id == "fmt ") {
      if (size < 16 || available < 16) throw Error("MALFORMED_AUDIO", "short fmt chunk");
      byte_rate = le32(d, body + 8);
      if (le16(d, body + 2) == 0) throw Error("MALFORMED_AUDIO", "zero channels");
    } else if (id == "data") {
      // Streaming writers leave the size at 0 or 0xFFFFFFFF.
      data_bytes = (size == 0 || size > available) ? available : size;
      if (byte_rate) break;
    }
    pos = body + static_cast<std::size_t>(std::min(size, available)) + (size & 1);
  }
  if (!byte_rate) throw Error("MALFORMED_AUDIO", "missing or empty fmt chunk");
  if (!data_bytes) throw Error("MALFORMED_AUDIO", "missing data chunk");
  return {Container::Wav, static_cast<double>(*data_bytes) / byte_rate, "audio/wav"};
}

// --- EBML / Matroska ------------------------------------------------------

constexpr std::uint32_t kEbmlHeader = 0x1A45DFA3;
constexpr std::uint32_t kDocType = 0x4282;
constexpr std::uint32_t kSegment = 0x18538067;
constexpr std::uint32_t kInfo = 0x1549A966;
constexpr std::uint32_t kTimecodeScale = 0x2AD7B1;
constexpr std::uint32_t kDuration = 0x4489;
constexpr std::uint32_t kTracks = 0x1654AE6B;
constexpr std::uint32_t kTrackEntry = 0xAE;
constexpr std::uint32_t kCodecId = 0x86;
constexpr std::uint32_t kCluster = 0x1F43B675;
constexpr std::uint32_t kTimecode = 0xE7;
constexpr std::uint32_t kSimpleBlock = 0xA3;
constexpr std::uint32_t kBlockGroup = 0xA0;
constexpr std::uint32_t kBlock = 0xA1;
constexpr std::uint32_t kBlockDuration = 0x9B;
constexpr std::uint32_t kPosition = 0xA7;
constexpr std::uint32_t kPrevSize = 0xAB;

struct Element {
  std::uint32_t id = 0;
  std::size_t data = 0;  // offset of payload
  std::size_t end = 0;   // one past payload
  bool unknown_size = false;
};

class Ebml {
 public:
  explicit Ebml(std::string_view d) : d_(d) {}

  // Reads the element header at `pos`; `limit` bounds unknown or oversized payloads.
  std::optional<Element> read(std::size_t pos, std::size_t limit) const {
    if (pos >= limit) return std::nullopt;
    const auto b0 = static_cast<unsigned char>(d_[pos]);
    if (b0 == 0) return std::nullopt;
    const int id_len = std::countl_zero(b0) + 1;
    if (id_len > 4 || pos + static_cast<std::size_t>(id_len) > limit) return std::nullopt;
    Element e;
    for (int i = 0; i < id_len; ++i) e.id = (e.id << 8) | static_cast<unsigned char>(d_[pos + static_cast<std::size_t>(i)]);
    std::size_t p = pos + static_cast<std::size_t>(id_len);
    if (p >= limit) return std::nullopt;
    const auto s0 = static_cast<unsigned char>(d_[p]);
    if (s0 == 0) return std::nullopt;
    const int size_len = std::countl_zero(s0) + 1;
    if (p + static_cast<std::size_t>(size_len) > limit) return std::nullopt;
    std::uint64_t size = s0 & (0xFFu >> size_len);
    bool all_ones = size == (0xFFu >> size_len);
    for (int i = 1; i < size_len; ++i) {
      const auto b = static_cast<unsigned char>(d_[p + static_cast<std::size_t>(i)]);
      size = (size << 8) | b;
      all_ones = all_ones && b == 0xFF;
    }
    p += static_cast<std::size_t>(size_len);
    e.data = p;
    e.unknown_size = all_ones;
    e.end = (all_ones || size > limit - p) ? limit : p + static_cast<std::size_t>(size);
    return e;
  }

  std::uint64_t uint(const Element& e) const {
    std::uint64_t v = 0;
    for (std::size_t i = e.data; i < e.end && i < e.data + 8; ++i) v = (v << 8) | static_cast<unsigned char>(d_[i]);
    return v;
  }

  double real(const Element& e) const {
    const std::size_t n = e.end - e.data;
    std::uint64_t bits = uint(e);
    if (n == 4) {
      float f;
      const auto b32 = static_cast<std::uint32_t>(bits);
      std::memcpy(&f, &b32, 4);
      return f;
    }
    if (n == 8) {
      double v;
      std::memcpy(&v, &bits, 8);
      return v;
    }
    return 0.0;
  }

  std::string_view bytes(const Element& e) const { return d_.substr(e.data, e.end - e.data); }

 private:
  std::string_view d_;
};

// Duration of one Opus packet from its TOC byte, in seconds.
double opus_packet_seconds(std::string_view packet) {
  if (packet.empty()) return 0.0;
  const auto toc = static_cast<unsigned char>(packet[0]);
  const unsigned config = toc >> 3;
  double frame_ms = 0.0;
  if (config < 12) {
    constexpr double silk[] = {10, 20, 40, 60};
    frame_ms = silk[config % 4];
  } else if (config < 16) {
    frame_ms = (config % 2) ? 20 : 10;
  } else {
    constexpr double celt[] = {2.5, 5, 10, 20};
    frame_ms = celt[config % 4];
  }
  unsigned frames = 1;
  switch (toc & 3) {
    case 0: frames = 1; break;
    case 1:
    case 2: frames = 2; break;
    default: frames = packet.size() > 1 ? (static_cast<unsigned char>(packet[1]) & 0x3F) : 1; break;
  }
  return frame_ms * frames / 1000.0;
}

struct BlockTiming {
  std::int64_t relative_ticks = 0;
  double payload_s = 0.0;
};

std::optional<BlockTiming> read_block(std::string_view b) {
  if (b.empty()) return std::nullopt;
  const auto t0 = static_cast<unsigned char>(b[0]);
  if (t0 == 0) return std::nullopt;
  const std::size_t track_len = static_cast<std::size_t>(std::countl_zero(t0)) + 1;
  if (b.size() < track_len + 3) return std::nullopt;
  const auto hi = static_cast<unsigned char>(b[track_len]);
  const auto lo = static_cast<unsigned char>(b[track_len + 1]);
  BlockTiming t;
  t.relative_ticks = static_cast<std::int16_t>(static_cast<std::uint16_t>((hi << 8) | lo));
  const auto flags = static_cast<unsigned char>(b[track_len + 2]);
  std::string_view frames = b.substr(track_len + 3);
  std::size_t count = 1;
  const unsigned lacing = (flags >> 1) & 3;
  if (lacing != 0) {
    // Every frame in a lace is assumed to share the first frame's TOC.
    if (frames.empty()) return t;
    count = static_cast<unsigned char>(frames[0]) + 1u;
    std::size_t pos = 1;
    if (lacing == 1) {  // Xiph: sizes as runs of 255
      for (std::size_t f = 0; f + 1 < count && pos < frames.size(); ++f) {
        while (pos < frames.size() && static_cast<unsigned char>(frames[pos]) == 0xFF) ++pos;
        ++pos;
      }
    } else if (lacing == 3) {  // EBML: one unsigned vint then signed vint deltas
      for (std::size_t f = 0; f + 1 < count && pos < frames.size(); ++f) {
        const auto v0 = static_cast<unsigned char>(frames[pos]);
        if (v0 == 0) return t;
        pos += static_cast<std::size_t>(std::countl_zero(v0)) + 1;
      }
    }
    frames = frames.substr(std::min(pos, frames.size()));
  }
  t.payload_s = opus_packet_seconds(frames) * static_cast<double>(count);
  return t;
}

bool is_cluster_child(std::uint32_t id) {
  return id == kTimecode || id == kSimpleBlock || id == kBlockGroup || id == kPosition || id == kPrevSize;
}

AudioInfo probe_webm(std::string_view d) {
  const Ebml ebml(d);
  const auto header = ebml.read(0, d.size());
  if (!header || header->id != kEbmlHeader) throw Error("MALFORMED_AUDIO", "missing EBML header");
  std::string doc_type;
  for (std::size_t p = header->data; p < header->end;) {
    const auto e = ebml.read(p, header->end);
    if (!e) break;
    if (e->id == kDocType) doc_type = std::string(ebml.bytes(*e));
    p = e->end;
  }
  doc_type.erase(std::find(doc_type.begin(), doc_type.end(), '\0'), doc_type.end());
  if (doc_type != "webm" && doc_type != "matroska") {
    throw Error("UNSUPPORTED_MEDIA", "EBML document type '" + doc_type + "' is not WebM");
  }

  const auto segment = ebml.read(header->end, d.size());
  if (!segment || segment->id != kSegment) throw Error("MALFORMED_AUDIO", "missing Segment element");

  std::uint64_t scale_ns = 1'000'000;
  std::optional<double> info_duration;
  std::vector<std::string> codecs;
  double end_s = 0.0;
  bool saw_block = false;

  auto note_block = [&](std::uint64_t cluster_tc, std::string_view payload, std::optional<std::uint64_t> dur_ticks) {
    const auto t = read_block(payload);
    if (!t) return;
    saw_block = true;
    const double start = static_cast<double>(static_cast<std::int64_t>(cluster_tc) + t->relative_ticks) *
                         static_cast<double>(scale_ns) / 1e9;
    const double len = dur_ticks ? static_cast<double>(*dur_ticks) * static_cast<double>(scale_ns) / 1e9 : t->payload_s;
    end_s = std::max(end_s, start + len);
  };

  std::size_t p = segment->data;
  while (p < segment->end) {
    const auto e = ebml.read(p, segment->end);
    if (!e) break;
    if (e->id == kInfo) {
      for (std::size_t q = e->data; q < e->end;) {
        const auto c = ebml.read(q, e->end);
        if (!c) break;
        if (c->id == kTimecodeScale) scale_ns = ebml.uint(*c);
        if (c->id == kDuration) info_duration = ebml.real(*c);
        q = c->end;
      }
      p = e->end;
    } else if (e->id == kTracks) {
      for (std::size_t q = e->data; q < e->end;) {
        const auto t = ebml.read(q, e->end);
        if (!t) break;
        if (t->id == kTrackEntry) {
          for (std::size_t r = t->data; r < t->end;) {
            const auto c = ebml.read(r, t->end);
            if (!c) break;
            if (c->id == kCodecId) codecs.emplace_back(ebml.bytes(*c));
            r = c->end;
          }
        }
        q = t->end;
      }
      p = e->end;
    } else if (e->id == kCluster) {
      std::uint64_t cluster_tc = 0;
      std::size_t q = e->data;
      while (q < e->end) {
        const auto c = ebml.read(q, e->end);
        if (!c) break;
        if (e->unknown_size && !is_cluster_child(c->id)) break;  // next top-level element
        if (c->id == kTimecode) cluster_tc = ebml.uint(*c);
        if (c->id == kSimpleBlock) note_block(cluster_tc, ebml.bytes(*c), std::nullopt);
        if (c->id == kBlockGroup) {
          std::string_view block;
          std::optional<std::uint64_t> dur;
          for (std::size_t r = c->data; r < c->end;) {
            const auto g = ebml.read(r, c->end);
            if (!g) break;
            if (g->id == kBlock) block = ebml.bytes(*g);
            if (g->id == kBlockDuration) dur = ebml.uint(*g);
            r = g->end;
          }
          note_block(cluster_tc, block, dur);
        }
        q = c->end;
      }
      p = q;
    } else {
      if (e->unknown_size) break;
      p = e->end;
    }
  }

  for (auto& c : codecs) c.erase(std::find(c.begin(), c.end(), '\0'), c.end());
  if (std::find(codecs.begin(), codecs.end(), "A_OPUS") == codecs.end()) {
    throw Error("UNSUPPORTED_MEDIA", "WebM upload carries no Opus audio track");
  }
  double duration = 0.0;
  if (info_duration && *info_duration > 0.0) {
    duration = *info_duration * static_cast<double>(scale_ns) / 1e9;
  } else if (saw_block) {
    duration = end_s;
  }
  return {Container::WebmOpus, duration, "audio/webm"};
}

}  // namespace

AudioInfo probe(std::string_view bytes) {
  if (bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WAVE") return probe_wav(bytes);
  if (bytes.size() >= 4 && static_cast<unsigned char>(bytes[0]) == 0x1A && static_cast<unsigned char>(bytes[1]) == 0x45 &&
      static_cast<unsigned char>(bytes[2]) == 0xDF && static_cast<unsigned char>(bytes[3]) == 0xA3) {
    return probe_webm(bytes);
  }
  throw Error("UNSUPPORTED_MEDIA", "audio must be WAV or WebM/Opus");
}

}  // namespace dense::workflow::audio
