#pragma once

#include <string>
#include <string_view>

// Server-side duration decoding for uploaded narration. QC never trusts the
// duration a client claims.
namespace dense::workflow::audio {

enum class Container { Wav, WebmOpus };

struct AudioInfo {
  Container container = Container::Wav;
  double duration_s = 0.0;
  const char* mime = "audio/wav";
};

// Throws Error{UNSUPPORTED_MEDIA} for any other container or codec and
// Error{MALFORMED_AUDIO} when a recognized container is structurally broken.
AudioInfo probe(std::string_view bytes);

}  // namespace dense::workflow::audio
