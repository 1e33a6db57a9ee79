#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace obfusclab::asm_core {

// General-purpose register families in enumeration order. The order is used
// for deterministic tie-breaks wherever a register has to be picked.
enum class RegFamily : std::uint8_t {
  rax, rbx, rcx, rdx, rsi, rdi, rbp, rsp,
  r8, r9, r10, r11, r12, r13, r14, r15,
};

inline constexpr std::size_t kFamilyCount = 16;

inline constexpr std::array<RegFamily, kFamilyCount> kAllFamilies = {
    RegFamily::rax, RegFamily::rbx, RegFamily::rcx, RegFamily::rdx,
    RegFamily::rsi, RegFamily::rdi, RegFamily::rbp, RegFamily::rsp,
    RegFamily::r8,  RegFamily::r9,  RegFamily::r10, RegFamily::r11,
    RegFamily::r12, RegFamily::r13, RegFamily::r14, RegFamily::r15,
};

constexpr std::size_t family_index(RegFamily f) noexcept { return static_cast<std::size_t>(f); }

struct Register {
  RegFamily family = RegFamily::rax;
  std::uint8_t width = 64;  // 8, 16, 32 or 64
  bool high_byte = false;   // ah, bh, ch, dh

  static constexpr Register full(RegFamily f) noexcept { return {f, 64, false}; }

  // Bit offset of this register inside its 64-bit family.
  constexpr unsigned shift() const noexcept { return high_byte ? 8 : 0; }
  constexpr std::uint64_t mask() const noexcept {
    return width == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1) << shift();
  }

  friend constexpr bool operator==(const Register&, const Register&) = default;
};

// Canonical spelling, e.g. "rax", "r10d", "sil", "ah".
std::string_view register_name(const Register& r) noexcept;

// Resolves any supported register spelling (lowercase); nullopt otherwise.
std::optional<Register> lookup_register(std::string_view name) noexcept;

std::string_view family_name(RegFamily f) noexcept;

}  // namespace obfusclab::asm_core
