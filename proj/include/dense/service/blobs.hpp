#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace dense::service {

// Content-addressed files under <root>/<2 hex>/<digest>. Blobs are immutable:
// a second put of the same bytes is a no-op.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  std::string put(std::string_view bytes);
  // Errors: BLOB_CORRUPT when the stored bytes no longer match the digest.
  std::optional<std::string> get(const std::string& digest) const;
  bool contains(const std::string& digest) const;

 private:
  std::filesystem::path path_for(const std::string& digest) const;
  std::filesystem::path root_;
};

}  // namespace dense::service
