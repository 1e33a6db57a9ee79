#include <algorithm>
#include <optional>

#include "obfusclab/rng.hpp"
#include "stage.hpp"

namespace obfusclab::transforms {

namespace detail {

namespace {

using asm_core::Instruction;
using asm_core::LineKind;
using asm_core::Register;

const Instruction* instruction_at(const Program& p, std::size_t i) {
  const auto& line = p.lines[i];
  return line.kind == LineKind::Instruction && line.instruction ? &*line.instruction : nullptr;
}

std::optional<RegFamily> lowest_family(const std::vector<Register>& regs) {
  std::optional<RegFamily> best;
  for (const auto& r : regs) {
    if (r.family == RegFamily::rsp) continue;
    if (!best || r.family < *best) best = r.family;
  }
  return best;
}

// Register for a no-effect instruction: written by the previous instruction,
// else read by it, else used by the next one.
std::optional<RegFamily> adjacent_register(const Instruction* prev, const Instruction* next) {
  if (prev) {
    const auto use = asm_core::register_use(*prev);
    if (auto f = lowest_family(use.written)) return f;
    if (auto f = lowest_family(use.read)) return f;
  }
  if (next) {
    if (auto f = lowest_family(asm_core::explicit_registers(*next))) return f;
  }
  return std::nullopt;
}

bool references_family(const Instruction& ins, RegFamily f) {
  for (const auto& r : asm_core::explicit_registers(ins)) {
    if (r.family == f) return true;
  }
  const auto use = asm_core::register_use(ins);
  return std::find(use.implicit.begin(), use.implicit.end(), f) != use.implicit.end();
}

bool has_memory_operand(const Instruction& ins) {
  return std::any_of(ins.operands.begin(), ins.operands.end(), [](const auto& op) { return op.mem() != nullptr; });
}

enum class PairKind { PushPop, IncDec };

struct OpenPair {
  PairKind kind;
  RegFamily reg;
};

// Checks whether lines (first, last] can sit between the two halves of a
// reversible pair on `reg`, where `last` is the line after which the closing
// half goes.
bool pair_fits(const Program& p, std::size_t first, std::size_t last, PairKind kind, RegFamily reg) {
  for (std::size_t i = first + 1; i <= last; ++i) {
    const auto& line = p.lines[i];
    if (line.kind == LineKind::LabelDef || line.kind == LineKind::Data || line.kind == LineKind::Directive) {
      return false;
    }
    const Instruction* ins = instruction_at(p, i);
    if (!ins) continue;
    if (asm_core::is_control_transfer(*ins) || references_family(*ins, reg)) return false;
    if (ins->mnemonic == "pushad" || ins->mnemonic == "popad") return false;
    if (kind == PairKind::PushPop && (references_family(*ins, RegFamily::rsp) || has_memory_operand(*ins))) {
      return false;
    }
    if (kind == PairKind::IncDec && asm_core::reads_flags(*ins)) return false;
  }
  return kind != PairKind::IncDec || !flags_live_after(p.lines, last);
}

std::optional<RegFamily> free_family(const Program& p, std::size_t first, std::size_t last) {
  for (auto f : asm_core::kAllFamilies) {
    if (f == RegFamily::rsp || f == RegFamily::rbp) continue;
    bool used = false;
    for (std::size_t i = first + 1; i <= last && !used; ++i) {
      if (const Instruction* ins = instruction_at(p, i)) used = references_family(*ins, f);
    }
    if (!used) return f;
  }
  return std::nullopt;
}

}  // namespace

Stage dead_code_stage(const Program& p, const TransformConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  auto draw_period = [&] {
    return static_cast<std::size_t>(rng.between(cfg.insertion_period_min, cfg.insertion_period_max));
  };

  // Insertion points: after every k-th instruction line, k drawn per step.
  std::vector<std::size_t> points;
  {
    std::size_t period = draw_period();
    std::size_t seen = 0;
    for (std::size_t i = 0; i < p.lines.size(); ++i) {
      if (!instruction_at(p, i)) continue;
      if (++seen == period) {
        points.push_back(i);
        seen = 0;
        period = draw_period();
      }
    }
  }

  Stage out = start_stage(p);
  std::optional<OpenPair> open;
  std::size_t next_point = 0;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    out.keep(p.lines[i], i);
    if (next_point >= points.size() || points[next_point] != i) continue;
    const std::size_t step = next_point++;

    if (open) {
      const auto r = reg_operand(open->reg);
      if (open->kind == PairKind::PushPop) {
        out.insert(Instruction{"pop", {r}}, Technique::DeadCode, "reversible pair close");
      } else {
        out.insert(Instruction{"dec", {r}}, Technique::DeadCode, "reversible pair close");
      }
      open.reset();
      continue;
    }

    const Instruction* prev = instruction_at(p, i);
    const Instruction* next = nullptr;
    for (std::size_t j = i + 1; j < p.lines.size() && !next; ++j) next = instruction_at(p, j);

    if (auto f = adjacent_register(prev, next)) {
      const auto r = reg_operand(*f);
      if (flags_live_after(p.lines, i)) {
        out.insert(Instruction{"mov", {r, r}}, Technique::DeadCode, "no-op move");
        continue;
      }
      switch (rng.below(4)) {
        case 0: out.insert(Instruction{"add", {r, imm_operand(0)}}, Technique::DeadCode, "add zero"); break;
        case 1: out.insert(Instruction{"sub", {r, imm_operand(0)}}, Technique::DeadCode, "subtract zero"); break;
        case 2: out.insert(Instruction{"or", {r, imm_operand(0)}}, Technique::DeadCode, "or zero"); break;
        default: out.insert(Instruction{"mov", {r, r}}, Technique::DeadCode, "no-op move"); break;
      }
      continue;
    }

    // No register nearby: open a reversible pair that the next insertion
    // point closes, if the code in between allows it.
    if (step + 1 < points.size()) {
      const std::size_t close_at = points[step + 1];
      if (auto f = free_family(p, i, close_at)) {
        const PairKind first = rng.below(2) == 0 ? PairKind::PushPop : PairKind::IncDec;
        const PairKind second = first == PairKind::PushPop ? PairKind::IncDec : PairKind::PushPop;
        for (PairKind kind : {first, second}) {
          if (!pair_fits(p, i, close_at, kind, *f)) continue;
          const auto r = reg_operand(*f);
          if (kind == PairKind::PushPop) {
            out.insert(Instruction{"push", {r}}, Technique::DeadCode, "reversible pair open");
          } else {
            out.insert(Instruction{"inc", {r}}, Technique::DeadCode, "reversible pair open");
          }
          open = OpenPair{kind, *f};
          break;
        }
        if (open) continue;
      }
    }
    out.insert(Instruction{"nop", {}}, Technique::DeadCode, "nop");
  }
  return out;
}

}  // namespace detail

TransformResult insert_dead_code(const Program& p, const TransformConfig& cfg) {
  return detail::finish(detail::dead_code_stage(p, cfg), Technique::DeadCode);
}

}  // namespace obfusclab::transforms
