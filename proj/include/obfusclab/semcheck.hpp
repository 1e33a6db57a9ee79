#pragma once

// Register-machine evaluator for straight-line listings, used to check that
// two programs leave the same registers and memory behind.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "obfusclab/asm/program.hpp"
#include "obfusclab/rng.hpp"

namespace obfusclab::semcheck {

using asm_core::Instruction;
using asm_core::Program;
using asm_core::Register;

struct Flags {
  bool zf = false;
  bool sf = false;
  bool cf = false;

  friend bool operator==(const Flags&, const Flags&) = default;
};

struct MachineState {
  std::array<std::uint64_t, asm_core::kFamilyCount> regs{};
  Flags flags;
  // Sparse byte memory; addresses never written read as 0.
  std::map<std::uint64_t, std::uint8_t> memory;

  std::uint64_t read(const Register& r) const noexcept;
  // 32-bit writes clear the upper half; 8- and 16-bit writes merge.
  void write(const Register& r, std::uint64_t value) noexcept;

  std::uint64_t rsp() const noexcept { return regs[asm_core::family_index(asm_core::RegFamily::rsp)]; }

  std::uint8_t load_byte(std::uint64_t addr) const;
  std::uint64_t load(std::uint64_t addr, unsigned bytes) const;  // little endian
  void store(std::uint64_t addr, std::uint64_t value, unsigned bytes);

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

inline constexpr std::uint64_t kInitialStackPointer = std::uint64_t{1} << 32;

// Registers uniform over 64 bits, flags random, rsp fixed at
// kInitialStackPointer, memory empty.
MachineState random_state(SplitMix64& rng);

enum class Halt { Normal, StepLimit, Unsupported };

struct ExecutionOutcome {
  MachineState final;
  std::size_t steps = 0;
  Halt halted = Halt::Normal;
  std::string unsupported_mnemonic;
  std::set<std::uint64_t> written;  // every byte address stored to
};

// True for the mnemonics execute_block can evaluate.
bool is_evaluable(const Instruction& ins) noexcept;

// Runs until the end of the list, the first control transfer (not executed),
// the first instruction outside the evaluable subset, or step_limit.
ExecutionOutcome execute_block(const std::vector<Instruction>& instrs, const MachineState& init,
                               std::size_t step_limit = 1'000'000);

// Instruction lines of p in order; labels, comments and data are skipped.
std::vector<Instruction> instructions_of(const Program& p);

// Stack bytes this far below the final rsp are free space and not observed.
inline constexpr std::uint64_t kDeadStackSpan = 64 * 1024;

struct Divergence {
  std::size_t trial = 0;
  std::string location;  // register name or "mem[0x...]"
  std::uint64_t left = 0;
  std::uint64_t right = 0;
};

enum class Verdict { Equal, Diverged, Inconclusive };

struct EquivalenceReport {
  Verdict verdict = Verdict::Equal;
  std::size_t trials = 0;
  std::optional<Divergence> first_divergence;
  std::string unsupported_mnemonic;

  bool equal() const noexcept { return verdict == Verdict::Equal; }
  bool inconclusive() const noexcept { return verdict == Verdict::Inconclusive; }
  std::string to_string() const;
};

// Observation: all 16 registers including rsp, plus every byte either
// program wrote outside the dead stack span below the final rsp. Flags are
// not observed.
EquivalenceReport equivalent(const Program& a, const Program& b, std::size_t trials, std::uint64_t seed);
EquivalenceReport equivalent(const std::vector<Instruction>& a, const std::vector<Instruction>& b,
                             std::size_t trials, std::uint64_t seed);

}  // namespace obfusclab::semcheck
