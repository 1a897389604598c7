#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace cited {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// Incremental FNV-1a 64. Used both for signature commitments and for
/// deriving per-stage seeds, so every hash in the project is bit-exact.
class Fnv1a64 {
 public:
  Fnv1a64& update(std::span<const std::byte> bytes) noexcept;
  Fnv1a64& update_u32_le(std::uint32_t value) noexcept;
  Fnv1a64& update_u64_le(std::uint64_t value) noexcept;
  Fnv1a64& update(std::string_view text) noexcept;

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kFnvOffsetBasis;
};

std::uint64_t fnv1a64(std::span<const std::byte> bytes) noexcept;

/// seed = FNV-1a64( master as 8 LE bytes || tag bytes ).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept;

}  // namespace cited
