#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace soergel {

// SHA-256 hex digest of a byte string; the content address used by the
// on-disk cache and the morphism integrity digests.
std::string sha256_hex(const std::string& data);

// Content-addressed key for a cached computation.  Stable across runs and
// platforms: the datum fingerprint already includes the braid-path
// tie-breaking version tag, so changed path choices change every key.
std::string cache_key(const std::string& operation, const std::string& args,
                      const std::string& datum_fingerprint);

// Minimal content-addressed file store.  Entries are JSON documents wrapped
// in a versioned envelope; entries with a different format version are
// ignored, never misread.
class CacheStore {
 public:
  CacheStore() = default;  // disabled store
  explicit CacheStore(std::filesystem::path dir);

  bool enabled() const { return !dir_.empty(); }
  // Payload JSON text, or nullopt on miss / version mismatch / corruption.
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& payload_json) const;

  static constexpr int kFormatVersion = 1;

 private:
  std::filesystem::path dir_;
};

}  // namespace soergel
