#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cpc {

// Incremental SHA-256 producing lowercase hex.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::string_view bytes);
  // Length-prefixed update, so adjacent fields cannot alias each other.
  Sha256& update_field(std::string_view bytes);
  Sha256& update_file(const std::filesystem::path& path);
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view bytes);

std::string read_file_bytes(const std::filesystem::path& path);

std::string base64_encode(std::string_view bytes);

// SplitMix64 step; used to derive per-item seeds independent of iteration order.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);

}  // namespace cpc
