#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "obfusclab/asm/program.hpp"

namespace obfusclab::asm_core {

struct MnemonicInfo {
  std::string_view name;
  std::uint8_t min_operands;
  std::uint8_t max_operands;
  bool control_transfer;  // call, jmp, jcc, loop
  bool reads_flags;       // conditional branches, loop, jrcxz/jecxz
  bool defines_flags;     // overwrites all of ZF/SF/CF
};

// nullptr for mnemonics outside the supported subset.
const MnemonicInfo* mnemonic_info(std::string_view mnemonic) noexcept;

bool is_control_transfer(const Instruction& ins) noexcept;
bool reads_flags(const Instruction& ins) noexcept;
bool defines_flags(const Instruction& ins) noexcept;
// Touches ZF/SF/CF at all (fully or partially).
bool modifies_flags(const Instruction& ins) noexcept;

struct RegisterUse {
  std::vector<Register> read;
  std::vector<Register> written;
  // Families used without being named as an operand (rsp for push/pop,
  // rsi/rax for lodsb, rcx for loop, every family for pushad/popad).
  std::vector<RegFamily> implicit;
};

RegisterUse register_use(const Instruction& ins);

// Every register spelled in the operands, including memory base/index.
std::vector<Register> explicit_registers(const Instruction& ins);

}  // namespace obfusclab::asm_core
