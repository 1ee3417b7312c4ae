#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>

namespace pdet::textio {

// shortest round-trip decimal form; identical input bits give identical text
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// FNV-1a over raw bytes
inline std::uint64_t fnv1a(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path);

std::string hex64(std::uint64_t v);

}  // namespace pdet::textio
