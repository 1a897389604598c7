#include "cited/hash.hpp"

namespace cited {

Fnv1a64& Fnv1a64::update(std::span<const std::byte> bytes) noexcept {
  for (std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= kFnvPrime;
  }
  return *this;
}

Fnv1a64& Fnv1a64::update_u32_le(std::uint32_t value) noexcept {
  for (int i = 0; i < 4; ++i) {
    state_ ^= (value >> (8 * i)) & 0xffU;
    state_ *= kFnvPrime;
  }
  return *this;
}

Fnv1a64& Fnv1a64::update_u64_le(std::uint64_t value) noexcept {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xffU;
    state_ *= kFnvPrime;
  }
  return *this;
}

Fnv1a64& Fnv1a64::update(std::string_view text) noexcept {
  for (char ch : text) {
    state_ ^= static_cast<unsigned char>(ch);
    state_ *= kFnvPrime;
  }
  return *this;
}

std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept {
  return Fnv1a64{}.update(bytes).digest();
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept {
  return Fnv1a64{}.update_u64_le(master).update(tag).digest();
}

}  // namespace cited
