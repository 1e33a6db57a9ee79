#include "obfusclab/rng.hpp"
#include "stage.hpp"

namespace obfusclab::transforms {

namespace detail {

namespace {

using asm_core::Instruction;
using asm_core::Operand;
using asm_core::Register;

bool is_imm(const Operand& op, std::int64_t v) { return op.imm() != nullptr && op.imm()->value == v; }

Operand bare(Register r) { return Operand(r); }

Instruction make(std::string m, std::vector<Operand> ops) { return Instruction{std::move(m), std::move(ops)}; }

}  // namespace

Stage replace_stage(const Program& p, const TransformConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  Stage out = start_stage(p);

  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const auto& line = p.lines[i];
    if (line.kind != asm_core::LineKind::Instruction || !line.instruction) {
      out.keep(line, i);
      continue;
    }
    const Instruction& ins = *line.instruction;
    const auto& ops = ins.operands;
    const Register* dst = ops.empty() ? nullptr : ops[0].reg();
    const Register* src = ops.size() < 2 ? nullptr : ops[1].reg();
    const bool flags_free = !flags_live_after(p.lines, i);

    std::vector<Instruction> replacement;
    if (ins.mnemonic == "mov" && dst && ops.size() == 2 && is_imm(ops[1], 0) && flags_free) {
      switch (rng.below(3)) {
        case 0: replacement.push_back(make("xor", {bare(*dst), bare(*dst)})); break;
        case 1: replacement.push_back(make("and", {bare(*dst), imm_operand(0)})); break;
        default: replacement.push_back(make("sub", {bare(*dst), bare(*dst)})); break;
      }
    } else if (ins.mnemonic == "mov" && dst && src && dst->width == 64 && src->width == 64 &&
               dst->family != RegFamily::rsp) {
      replacement.push_back(make("push", {bare(*src)}));
      replacement.push_back(make("pop", {bare(*dst)}));
    } else if (ins.mnemonic == "test" && dst && src && *dst == *src) {
      replacement.push_back(make("cmp", {bare(*dst), imm_operand(0)}));
    } else if ((ins.mnemonic == "add" || ins.mnemonic == "sub") && dst && ops.size() == 2 && is_imm(ops[1], 1) &&
               flags_free) {
      replacement.push_back(make(ins.mnemonic == "add" ? "inc" : "dec", {bare(*dst)}));
    }

    if (replacement.empty()) {
      out.keep(line, i);
      continue;
    }
    std::string detail = asm_core::format_instruction(ins) + " ->";
    for (std::size_t k = 0; k < replacement.size(); ++k) {
      detail += k == 0 ? " " : "; ";
      detail += asm_core::format_instruction(replacement[k]);
    }
    out.entries.push_back({out.program.lines.size(), ChangeKind::InstructionReplaced, Technique::InstrReplace, detail});
    for (auto& r : replacement) {
      out.program.lines.push_back(asm_core::Line::from_instruction(std::move(r)));
      out.origin.push_back(i);
    }
  }
  return out;
}

}  // namespace detail

TransformResult replace_instructions(const Program& p, const TransformConfig& cfg) {
  return detail::finish(detail::replace_stage(p, cfg), Technique::InstrReplace);
}

}  // namespace obfusclab::transforms
