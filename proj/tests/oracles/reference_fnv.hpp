#pragma once

// Byte-at-a-time FNV-1a 64 written from the published constants, kept
// separate from the library's incremental hasher.

#include <cstdint>
#include <vector>

namespace oracle {

inline std::uint64_t fnv1a64_reference(const std::vector<unsigned char>& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::vector<unsigned char> le32_bytes(const std::vector<std::uint32_t>& values) {
  std::vector<unsigned char> out;
  for (std::uint32_t v : values)
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xffu));
  return out;
}

}  // namespace oracle
