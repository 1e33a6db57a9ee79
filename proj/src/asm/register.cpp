#include "obfusclab/asm/register.hpp"

#include <string_view>

namespace obfusclab::asm_core {

namespace {

struct NameRow {
  std::string_view q, d, w, b;
};

// Indexed by family.
constexpr std::array<NameRow, kFamilyCount> kNames = {{
    {"rax", "eax", "ax", "al"},
    {"rbx", "ebx", "bx", "bl"},
    {"rcx", "ecx", "cx", "cl"},
    {"rdx", "edx", "dx", "dl"},
    {"rsi", "esi", "si", "sil"},
    {"rdi", "edi", "di", "dil"},
    {"rbp", "ebp", "bp", "bpl"},
    {"rsp", "esp", "sp", "spl"},
    {"r8", "r8d", "r8w", "r8b"},
    {"r9", "r9d", "r9w", "r9b"},
    {"r10", "r10d", "r10w", "r10b"},
    {"r11", "r11d", "r11w", "r11b"},
    {"r12", "r12d", "r12w", "r12b"},
    {"r13", "r13d", "r13w", "r13b"},
    {"r14", "r14d", "r14w", "r14b"},
    {"r15", "r15d", "r15w", "r15b"},
}};

constexpr std::array<std::string_view, 4> kHighNames = {"ah", "bh", "ch", "dh"};

}  // namespace

std::string_view register_name(const Register& r) noexcept {
  const auto i = family_index(r.family);
  if (r.high_byte) return i < kHighNames.size() ? kHighNames[i] : std::string_view{};
  switch (r.width) {
    case 64: return kNames[i].q;
    case 32: return kNames[i].d;
    case 16: return kNames[i].w;
    case 8: return kNames[i].b;
    default: return {};
  }
}

std::string_view family_name(RegFamily f) noexcept { return kNames[family_index(f)].q; }

std::optional<Register> lookup_register(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kFamilyCount; ++i) {
    const auto f = kAllFamilies[i];
    if (name == kNames[i].q) return Register{f, 64, false};
    if (name == kNames[i].d) return Register{f, 32, false};
    if (name == kNames[i].w) return Register{f, 16, false};
    if (name == kNames[i].b) return Register{f, 8, false};
  }
  for (std::size_t i = 0; i < kHighNames.size(); ++i) {
    if (name == kHighNames[i]) return Register{kAllFamilies[i], 8, true};
  }
  return std::nullopt;
}

}  // namespace obfusclab::asm_core
