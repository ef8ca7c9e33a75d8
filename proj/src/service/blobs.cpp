#include "dense/service/blobs.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "dense/core/digest.hpp"
#include "dense/core/error.hpp"

namespace dense::service {

namespace fs = std::filesystem;

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

fs::path BlobStore::path_for(const std::string& digest) const {
  if (digest.size() != 64 || digest.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw Error("BAD_REQUEST", "malformed blob digest");
  }
  return root_ / digest.substr(0, 2) / digest;
}

std::string BlobStore::put(std::string_view bytes) {
  const std::string digest = sha256_hex(bytes);
  const fs::path target = path_for(digest);
  if (fs::exists(target)) return digest;
  fs::create_directories(target.parent_path());
  static std::atomic<unsigned> counter{0};
  std::ostringstream tmp_name;
  tmp_name << target.string() << ".tmp" << std::this_thread::get_id() << "." << counter++;
  const fs::path tmp = tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("STORAGE_UNAVAILABLE", "cannot write blob " + digest);
  }
  fs::rename(tmp, target);
  return digest;
}

std::optional<std::string> BlobStore::get(const std::string& digest) const {
  const fs::path p = path_for(digest);
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string bytes = ss.str();
  if (sha256_hex(bytes) != digest) throw Error("BLOB_CORRUPT", "blob " + digest + " fails verification");
  return bytes;
}

bool BlobStore::contains(const std::string& digest) const { return fs::exists(path_for(digest)); }

}  // namespace dense::service
