#include "soergel/cache.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "soergel/error.hpp"

namespace soergel {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw TheoryError("sha256 failure");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

std::string cache_key(const std::string& operation, const std::string& args,
                      const std::string& datum_fingerprint) {
  return sha256_hex("v1\x1f" + operation + "\x1f" + args + "\x1f" + datum_fingerprint);
}

CacheStore::CacheStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::optional<std::string> CacheStore::get(const std::string& key) const {
  if (!enabled()) return std::nullopt;
  std::filesystem::path p = dir_ / (key + ".json");
  std::ifstream in(p);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    nlohmann::json doc = nlohmann::json::parse(buf.str());
    if (!doc.is_object() || doc.value("format_version", -1) != kFormatVersion) return std::nullopt;
    if (!doc.contains("payload")) return std::nullopt;
    return doc["payload"].dump();
  } catch (...) {
    return std::nullopt;
  }
}

void CacheStore::put(const std::string& key, const std::string& payload_json) const {
  if (!enabled()) return;
  nlohmann::json doc;
  doc["format_version"] = kFormatVersion;
  doc["payload"] = nlohmann::json::parse(payload_json);
  std::filesystem::path p = dir_ / (key + ".json");
  std::filesystem::path tmp = dir_ / (key + ".tmp");
  {
    std::ofstream out(tmp);
    out << doc.dump();
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace soergel
