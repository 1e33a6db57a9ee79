#include "obfusclab/semcheck.hpp"

#include <array>
#include <cstdio>
#include <string_view>

#include "obfusclab/asm/instruction_info.hpp"

namespace obfusclab::semcheck {

using asm_core::Operand;
using asm_core::RegFamily;

std::uint64_t MachineState::read(const Register& r) const noexcept {
  const std::uint64_t full = regs[asm_core::family_index(r.family)];
  return (full & r.mask()) >> r.shift();
}

void MachineState::write(const Register& r, std::uint64_t value) noexcept {
  std::uint64_t& full = regs[asm_core::family_index(r.family)];
  if (r.width == 64) {
    full = value;
  } else if (r.width == 32) {
    full = value & 0xFFFFFFFFULL;
  } else {
    full = (full & ~r.mask()) | ((value << r.shift()) & r.mask());
  }
}

std::uint8_t MachineState::load_byte(std::uint64_t addr) const {
  const auto it = memory.find(addr);
  return it == memory.end() ? 0 : it->second;
}

std::uint64_t MachineState::load(std::uint64_t addr, unsigned bytes) const {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < bytes; ++i) v |= std::uint64_t{load_byte(addr + i)} << (8 * i);
  return v;
}

void MachineState::store(std::uint64_t addr, std::uint64_t value, unsigned bytes) {
  for (unsigned i = 0; i < bytes; ++i) memory[addr + i] = static_cast<std::uint8_t>(value >> (8 * i));
}

MachineState random_state(SplitMix64& rng) {
  MachineState s;
  for (auto& r : s.regs) r = rng.next();
  s.regs[asm_core::family_index(RegFamily::rsp)] = kInitialStackPointer;
  const auto bits = rng.next();
  s.flags = {(bits & 1) != 0, (bits & 2) != 0, (bits & 4) != 0};
  return s;
}

namespace {

constexpr std::array<std::string_view, 15> kEvaluable = {
    "mov", "add", "sub", "xor", "and", "or", "inc", "dec", "push", "pop", "xchg", "lea", "nop", "test", "cmp",
};

std::uint64_t width_mask(unsigned bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }

class Executor {
 public:
  explicit Executor(ExecutionOutcome& out) : out_(out), s_(out.final) {}

  void run(const Instruction& ins);

 private:
  unsigned operand_bits(const Instruction& ins, std::size_t i) const {
    const Operand& op = ins.operands[i];
    if (const auto* r = op.reg()) return r->width;
    if (const auto* m = op.mem(); m && m->size_bits) return *m->size_bits;
    for (const auto& other : ins.operands) {
      if (const auto* r = other.reg()) return r->width;
    }
    return 64;
  }

  std::uint64_t address(const asm_core::MemoryRef& m) const {
    std::uint64_t a = static_cast<std::uint64_t>(m.displacement);
    if (m.base) a += s_.read(*m.base);
    if (m.index) a += s_.read(*m.index) * m.scale;
    return a;
  }

  std::uint64_t get(const Operand& op, unsigned bits) const {
    if (const auto* r = op.reg()) return s_.read(*r);
    if (const auto* i = op.imm()) return static_cast<std::uint64_t>(i->value) & width_mask(bits);
    if (const auto* m = op.mem()) return s_.load(address(*m), bits / 8);
    return 0;
  }

  void put(const Operand& op, std::uint64_t value, unsigned bits) {
    value &= width_mask(bits);
    if (const auto* r = op.reg()) {
      s_.write(*r, value);
    } else if (const auto* m = op.mem()) {
      const auto a = address(*m);
      s_.store(a, value, bits / 8);
      for (unsigned k = 0; k < bits / 8; ++k) out_.written.insert(a + k);
    }
  }

  void set_zs(std::uint64_t result, unsigned bits) {
    result &= width_mask(bits);
    s_.flags.zf = result == 0;
    s_.flags.sf = ((result >> (bits - 1)) & 1) != 0;
  }

  void push64(std::uint64_t v) {
    auto& rsp = s_.regs[asm_core::family_index(RegFamily::rsp)];
    rsp -= 8;
    s_.store(rsp, v, 8);
    for (unsigned k = 0; k < 8; ++k) out_.written.insert(rsp + k);
  }

  std::uint64_t pop64() {
    auto& rsp = s_.regs[asm_core::family_index(RegFamily::rsp)];
    const auto v = s_.load(rsp, 8);
    rsp += 8;
    return v;
  }

  ExecutionOutcome& out_;
  MachineState& s_;
};

void Executor::run(const Instruction& ins) {
  const std::string_view m = ins.mnemonic;
  const auto& ops = ins.operands;

  if (m == "nop") return;
  if (m == "mov") {
    const unsigned bits = operand_bits(ins, 0);
    put(ops[0], get(ops[1], bits), bits);
  } else if (m == "lea") {
    const unsigned bits = operand_bits(ins, 0);
    if (const auto* mem = ops[1].mem()) put(ops[0], address(*mem), bits);
  } else if (m == "xchg") {
    const unsigned bits = operand_bits(ins, 0);
    const auto a = get(ops[0], bits);
    const auto b = get(ops[1], bits);
    put(ops[0], b, bits);
    put(ops[1], a, bits);
  } else if (m == "push") {
    push64(get(ops[0], 64));
  } else if (m == "pop") {
    const unsigned bits = operand_bits(ins, 0);
    put(ops[0], pop64(), bits);
  } else if (m == "inc" || m == "dec") {
    const unsigned bits = operand_bits(ins, 0);
    const auto r = get(ops[0], bits) + (m == "inc" ? 1 : ~std::uint64_t{0});
    put(ops[0], r, bits);
    set_zs(r, bits);
  } else {
    // Two-operand ALU forms.
    const unsigned bits = operand_bits(ins, 0);
    const auto mask = width_mask(bits);
    const auto a = get(ops[0], bits);
    const auto b = get(ops[1], bits);
    std::uint64_t r = 0;
    bool carry = false;
    if (m == "add") {
      r = (a + b) & mask;
      carry = r < a;
    } else if (m == "sub" || m == "cmp") {
      r = (a - b) & mask;
      carry = a < b;
    } else if (m == "and" || m == "test") {
      r = a & b;
    } else if (m == "or") {
      r = a | b;
    } else if (m == "xor") {
      r = a ^ b;
    }
    set_zs(r, bits);
    s_.flags.cf = carry;
    if (m != "cmp" && m != "test") put(ops[0], r, bits);
  }
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

bool is_evaluable(const Instruction& ins) noexcept {
  for (auto m : kEvaluable) {
    if (ins.mnemonic == m) return true;
  }
  return false;
}

ExecutionOutcome execute_block(const std::vector<Instruction>& instrs, const MachineState& init,
                               std::size_t step_limit) {
  ExecutionOutcome out;
  out.final = init;
  Executor exec(out);
  for (const auto& ins : instrs) {
    if (asm_core::is_control_transfer(ins)) break;
    if (!is_evaluable(ins)) {
      out.halted = Halt::Unsupported;
      out.unsupported_mnemonic = ins.mnemonic;
      return out;
    }
    if (out.steps == step_limit) {
      out.halted = Halt::StepLimit;
      return out;
    }
    exec.run(ins);
    ++out.steps;
  }
  return out;
}

std::vector<Instruction> instructions_of(const Program& p) {
  std::vector<Instruction> out;
  for (const auto& line : p.lines) {
    if (line.kind == asm_core::LineKind::Instruction && line.instruction) out.push_back(*line.instruction);
  }
  return out;
}

EquivalenceReport equivalent(const Program& a, const Program& b, std::size_t trials, std::uint64_t seed) {
  return equivalent(instructions_of(a), instructions_of(b), trials, seed);
}

EquivalenceReport equivalent(const std::vector<Instruction>& a, const std::vector<Instruction>& b,
                             std::size_t trials, std::uint64_t seed) {
  EquivalenceReport report;
  for (const auto* list : {&a, &b}) {
    for (const auto& ins : *list) {
      if (asm_core::is_control_transfer(ins)) break;
      if (!is_evaluable(ins)) {
        report.verdict = Verdict::Inconclusive;
        report.unsupported_mnemonic = ins.mnemonic;
        return report;
      }
    }
  }

  SplitMix64 rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    const MachineState init = random_state(rng);
    const auto ra = execute_block(a, init);
    const auto rb = execute_block(b, init);
    ++report.trials;
    if (ra.halted == Halt::StepLimit || rb.halted == Halt::StepLimit) {
      report.verdict = Verdict::Inconclusive;
      return report;
    }

    auto diverge = [&](std::string where, std::uint64_t l, std::uint64_t r) {
      report.verdict = Verdict::Diverged;
      report.first_divergence = Divergence{t, std::move(where), l, r};
    };
    for (auto f : asm_core::kAllFamilies) {
      const auto i = asm_core::family_index(f);
      if (ra.final.regs[i] != rb.final.regs[i]) {
        diverge(std::string(asm_core::family_name(f)), ra.final.regs[i], rb.final.regs[i]);
        return report;
      }
    }
    const std::uint64_t top = ra.final.rsp();
    std::set<std::uint64_t> observed = ra.written;
    observed.insert(rb.written.begin(), rb.written.end());
    for (auto addr : observed) {
      if (addr < top && top - addr <= kDeadStackSpan) continue;
      const auto l = ra.final.load_byte(addr);
      const auto r = rb.final.load_byte(addr);
      if (l != r) {
        diverge("mem[" + hex(addr) + "]", l, r);
        return report;
      }
    }
  }
  return report;
}

std::string EquivalenceReport::to_string() const {
  switch (verdict) {
    case Verdict::Equal:
      return "equivalent over " + std::to_string(trials) + " trials";
    case Verdict::Inconclusive:
      return unsupported_mnemonic.empty() ? "inconclusive: step limit reached"
                                          : "inconclusive: unsupported instruction '" + unsupported_mnemonic + "'";
    case Verdict::Diverged: {
      const auto& d = *first_divergence;
      return "diverged at trial " + std::to_string(d.trial) + ": " + d.location + " " + hex(d.left) + " vs " +
             hex(d.right);
    }
  }
  return {};
}

}  // namespace obfusclab::semcheck
