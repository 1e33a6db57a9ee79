#include "obfusclab/asm/instruction_info.hpp"

#include <array>

namespace obfusclab::asm_core {

namespace {

constexpr std::array<MnemonicInfo, 29> kMnemonics = {{
    {"mov", 2, 2, false, false, false},
    {"add", 2, 2, false, false, true},
    {"sub", 2, 2, false, false, true},
    {"xor", 2, 2, false, false, true},
    {"and", 2, 2, false, false, true},
    {"or", 2, 2, false, false, true},
    {"inc", 1, 1, false, false, false},
    {"dec", 1, 1, false, false, false},
    {"push", 1, 1, false, false, false},
    {"pop", 1, 1, false, false, false},
    {"xchg", 2, 2, false, false, false},
    {"lea", 2, 2, false, false, false},
    {"nop", 0, 0, false, false, false},
    {"test", 2, 2, false, false, true},
    {"cmp", 2, 2, false, false, true},
    {"call", 1, 1, true, false, false},
    {"jmp", 1, 1, true, false, false},
    {"jz", 1, 1, true, true, false},
    {"jnz", 1, 1, true, true, false},
    {"jl", 1, 1, true, true, false},
    {"jrcxz", 1, 1, true, true, false},
    {"jecxz", 1, 1, true, true, false},
    {"loop", 1, 1, true, true, false},
    {"ror", 2, 2, false, false, false},
    {"lodsb", 0, 0, false, false, false},
    {"cld", 0, 0, false, false, false},
    {"movzx", 2, 2, false, false, false},
    {"pushad", 0, 0, false, false, false},
    {"popad", 0, 0, false, false, false},
}};

bool is(const Instruction& ins, std::string_view m) { return ins.mnemonic == m; }

}  // namespace

const MnemonicInfo* mnemonic_info(std::string_view mnemonic) noexcept {
  for (const auto& m : kMnemonics) {
    if (m.name == mnemonic) return &m;
  }
  return nullptr;
}

bool is_control_transfer(const Instruction& ins) noexcept {
  const auto* info = mnemonic_info(ins.mnemonic);
  return info != nullptr && info->control_transfer;
}

bool reads_flags(const Instruction& ins) noexcept {
  const auto* info = mnemonic_info(ins.mnemonic);
  return info != nullptr && info->reads_flags;
}

bool defines_flags(const Instruction& ins) noexcept {
  const auto* info = mnemonic_info(ins.mnemonic);
  return info != nullptr && info->defines_flags;
}

bool modifies_flags(const Instruction& ins) noexcept {
  return defines_flags(ins) || is(ins, "inc") || is(ins, "dec") || is(ins, "ror");
}

std::vector<Register> explicit_registers(const Instruction& ins) {
  std::vector<Register> out;
  for (const auto& op : ins.operands) {
    if (const auto* r = op.reg()) out.push_back(*r);
    if (const auto* m = op.mem()) {
      if (m->base) out.push_back(*m->base);
      if (m->index) out.push_back(*m->index);
    }
  }
  return out;
}

RegisterUse register_use(const Instruction& ins) {
  RegisterUse use;
  auto note_memory = [&](const Operand& op) {
    if (const auto* m = op.mem()) {
      if (m->base) use.read.push_back(*m->base);
      if (m->index) use.read.push_back(*m->index);
    }
  };
  for (const auto& op : ins.operands) note_memory(op);

  const auto& ops = ins.operands;
  auto reg_at = [&](std::size_t i) -> const Register* { return i < ops.size() ? ops[i].reg() : nullptr; };
  const std::string_view m = ins.mnemonic;

  if (m == "mov" || m == "lea" || m == "movzx") {
    if (const auto* d = reg_at(0)) use.written.push_back(*d);
    if (const auto* s = reg_at(1)) use.read.push_back(*s);
  } else if (m == "add" || m == "sub" || m == "xor" || m == "and" || m == "or" || m == "ror") {
    if (const auto* d = reg_at(0)) {
      use.read.push_back(*d);
      use.written.push_back(*d);
    }
    if (const auto* s = reg_at(1)) use.read.push_back(*s);
  } else if (m == "xchg") {
    for (std::size_t i = 0; i < 2; ++i) {
      if (const auto* r = reg_at(i)) {
        use.read.push_back(*r);
        use.written.push_back(*r);
      }
    }
  } else if (m == "inc" || m == "dec") {
    if (const auto* d = reg_at(0)) {
      use.read.push_back(*d);
      use.written.push_back(*d);
    }
  } else if (m == "test" || m == "cmp") {
    for (std::size_t i = 0; i < 2; ++i) {
      if (const auto* r = reg_at(i)) use.read.push_back(*r);
    }
  } else if (m == "push") {
    if (const auto* r = reg_at(0)) use.read.push_back(*r);
    use.implicit.push_back(RegFamily::rsp);
  } else if (m == "pop") {
    if (const auto* r = reg_at(0)) use.written.push_back(*r);
    use.implicit.push_back(RegFamily::rsp);
  } else if (m == "call" || m == "jmp") {
    if (const auto* r = reg_at(0)) use.read.push_back(*r);
    if (m == "call") use.implicit.push_back(RegFamily::rsp);
  } else if (m == "loop" || m == "jrcxz" || m == "jecxz") {
    use.implicit.push_back(RegFamily::rcx);
  } else if (m == "lodsb") {
    use.implicit.push_back(RegFamily::rsi);
    use.implicit.push_back(RegFamily::rax);
  } else if (m == "pushad" || m == "popad") {
    use.implicit.assign(kAllFamilies.begin(), kAllFamilies.end());
  }
  return use;
}

}  // namespace obfusclab::asm_core
