#include "obfusclab/generator.hpp"

#include <array>
#include <vector>

#include "obfusclab/asm/program.hpp"
#include "obfusclab/rng.hpp"

namespace obfusclab {

namespace {

using asm_core::RegFamily;
using asm_core::Register;

class Writer {
 public:
  Writer(std::uint64_t seed) : rng_(seed) {
    for (auto f : asm_core::kAllFamilies) {
      if (f == RegFamily::rsp) continue;
      families_.push_back(f);
      const auto roll = rng_.below(10);
      widths_[asm_core::family_index(f)] = roll < 7 ? 64 : roll < 9 ? 32 : 8;
    }
  }

  std::string instruction();

 private:
  RegFamily any_family() { return families_[rng_.below(families_.size())]; }

  // Usually the family's own width; now and then a foreign one.
  std::uint8_t width_of(RegFamily f) {
    if (rng_.chance(1, 30)) return std::array<std::uint8_t, 3>{64, 32, 16}[rng_.below(3)];
    return widths_[asm_core::family_index(f)];
  }

  static std::string name_at(RegFamily f, std::uint8_t w) {
    return std::string(asm_core::register_name(Register{f, w, false}));
  }

  // Some family spelled at width w, preferring families that live at w.
  std::string partner(std::uint8_t w) {
    for (int tries = 0; tries < 8; ++tries) {
      const auto g = any_family();
      if (widths_[asm_core::family_index(g)] == w) return name_at(g, w);
    }
    return name_at(any_family(), w);
  }

  std::string immediate(std::uint8_t w) {
    const std::uint64_t cap = w == 8 ? 0x100 : w == 16 ? 0x10000 : 0x80000000ULL;
    const std::uint64_t v = rng_.chance(1, 2) ? rng_.below(64) : rng_.below(cap);
    return asm_core::format_immediate(static_cast<std::int64_t>(v), rng_.chance(2, 3) ? 16 : 10);
  }

  RegFamily wide_family() {
    for (int tries = 0; tries < 16; ++tries) {
      const auto f = any_family();
      if (widths_[asm_core::family_index(f)] == 64) return f;
    }
    return RegFamily::rax;
  }

  SplitMix64 rng_;
  std::vector<RegFamily> families_;
  std::array<std::uint8_t, asm_core::kFamilyCount> widths_{};
  std::size_t depth_ = 0;
};

std::string Writer::instruction() {
  static constexpr std::array<std::string_view, 5> kAlu = {"add", "sub", "xor", "and", "or"};
  const auto f = any_family();
  const auto w = width_of(f);
  const auto n = name_at(f, w);
  const auto roll = rng_.below(100);
  if (roll < 12) return "mov " + n + ", " + immediate(w);
  if (roll < 17) return "mov " + n + ", 0";
  if (roll < 29) return "mov " + n + ", " + partner(w);
  if (roll < 37) return std::string(rng_.chance(1, 2) ? "add " : "sub ") + n + ", " + immediate(w);
  if (roll < 42) return std::string(rng_.chance(1, 2) ? "add " : "sub ") + n + ", 1";
  if (roll < 55) return std::string(kAlu[rng_.below(kAlu.size())]) + " " + n + ", " + partner(w);
  if (roll < 61) return std::string(rng_.chance(1, 2) ? "inc " : "dec ") + n;
  if (roll < 68 || (roll < 74 && depth_ == 0)) {
    ++depth_;
    return "push " + name_at(wide_family(), 64);
  }
  if (roll < 74) {
    --depth_;
    return "pop " + name_at(wide_family(), 64);
  }
  if (roll < 79) return "xchg " + n + ", " + partner(w);
  if (roll < 85) {
    static constexpr std::array<int, 4> kScales = {1, 2, 4, 8};
    std::string mem = "[" + name_at(wide_family(), 64) + "+" + std::to_string(kScales[rng_.below(4)]) + "*" +
                      name_at(wide_family(), 64);
    if (rng_.chance(1, 2)) mem += "+" + asm_core::format_immediate(static_cast<std::int64_t>(rng_.below(0x200)), 16);
    return "lea " + name_at(wide_family(), 64) + ", " + mem + "]";
  }
  if (roll < 88) return "nop";
  if (roll < 93) return "test " + n + ", " + n;
  if (roll < 97) return "cmp " + n + ", " + (rng_.chance(1, 2) ? immediate(w) : partner(w));
  return "xor " + n + ", " + n;
}

}  // namespace

std::string generate_listing(std::uint64_t seed, const GeneratorOptions& options) {
  Writer writer(seed);
  SplitMix64 layout(derive_seed(seed, 0x6C61796F7574ULL));
  std::string out;
  if (options.decorate) out += ".section '.text' rwx\n.entrypoint\n\nentrypoint_0:\n";
  for (std::size_t i = 0; i < options.instructions; ++i) {
    if (options.decorate && i > 0 && layout.chance(1, 25)) out += layout.chance(1, 2) ? "\n" : "// block\n";
    out += "    " + writer.instruction() + "\n";
  }
  if (options.decorate) out += "db 0c3h, 90h, \"end\", 0\n";
  return out;
}

}  // namespace obfusclab
