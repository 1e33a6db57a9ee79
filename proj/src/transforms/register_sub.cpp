#include <algorithm>
#include <array>
#include <optional>

#include "obfusclab/rng.hpp"
#include "stage.hpp"

namespace obfusclab::transforms {

namespace detail {

namespace {

using asm_core::Instruction;
using asm_core::LineKind;
using asm_core::Operand;
using asm_core::Register;

constexpr std::size_t kMaxCycle = 4;

bool is_barrier(const asm_core::Line& line) {
  switch (line.kind) {
    case LineKind::LabelDef:
    case LineKind::Data:
    case LineKind::Directive:
      return true;
    case LineKind::Instruction: {
      const auto& ins = *line.instruction;
      return asm_core::is_control_transfer(ins) || ins.mnemonic == "pushad" || ins.mnemonic == "popad";
    }
    default:
      return false;
  }
}

// Half-open line range [begin, end) free of barriers.
struct Block {
  std::size_t begin;
  std::size_t end;
};

std::vector<Block> split_blocks(const Program& p) {
  std::vector<Block> blocks;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= p.lines.size(); ++i) {
    if (i == p.lines.size() || is_barrier(p.lines[i])) {
      if (i > begin) blocks.push_back({begin, i});
      begin = i + 1;
    }
  }
  return blocks;
}

struct FamilyUsage {
  bool used = false;
  bool blocked = false;
  std::optional<std::uint8_t> width;
};

// Families that can take part in a renaming cycle within the block: named
// explicitly, always at one width, never as a high byte, never implicitly.
std::array<FamilyUsage, asm_core::kFamilyCount> usage_in(const Program& p, const Block& b) {
  std::array<FamilyUsage, asm_core::kFamilyCount> usage{};
  usage[asm_core::family_index(RegFamily::rsp)].blocked = true;
  usage[asm_core::family_index(RegFamily::rbp)].blocked = true;
  for (std::size_t i = b.begin; i < b.end; ++i) {
    const auto& line = p.lines[i];
    if (line.kind != LineKind::Instruction) continue;
    const auto& ins = *line.instruction;
    for (const auto& r : asm_core::explicit_registers(ins)) {
      auto& u = usage[asm_core::family_index(r.family)];
      u.used = true;
      if (r.high_byte || (u.width && *u.width != r.width)) u.blocked = true;
      u.width = r.width;
    }
    for (auto f : asm_core::register_use(ins).implicit) usage[asm_core::family_index(f)].blocked = true;
  }
  return usage;
}

bool references_any(const Instruction& ins, const std::vector<RegFamily>& cycle) {
  for (const auto& r : asm_core::explicit_registers(ins)) {
    if (std::find(cycle.begin(), cycle.end(), r.family) != cycle.end()) return true;
  }
  return false;
}

std::optional<RegFamily> renamed(RegFamily f, const std::vector<RegFamily>& cycle) {
  const auto it = std::find(cycle.begin(), cycle.end(), f);
  if (it == cycle.end()) return std::nullopt;
  const auto next = std::next(it) == cycle.end() ? cycle.begin() : std::next(it);
  return *next;
}

// Renames every cycle register in the instruction; operands that change
// lose their source spelling so they are re-rendered.
bool rename(Instruction& ins, const std::vector<RegFamily>& cycle) {
  bool changed = false;
  auto fix = [&](Register& r) {
    if (auto to = renamed(r.family, cycle)) {
      r.family = *to;
      return true;
    }
    return false;
  };
  for (auto& op : ins.operands) {
    bool touched = false;
    if (auto* r = std::get_if<Register>(&op.value)) touched = fix(*r);
    if (auto* m = std::get_if<asm_core::MemoryRef>(&op.value)) {
      if (m->base) touched = fix(*m->base) || touched;
      if (m->index) touched = fix(*m->index) || touched;
    }
    if (touched) {
      op.spelling.clear();
      changed = true;
    }
  }
  return changed;
}

// xchg sequence that moves the value of cycle[i] into cycle[i+1] for every
// i. Running it in reverse order undoes it.
std::vector<Instruction> rotation(const std::vector<RegFamily>& cycle) {
  std::vector<Instruction> out;
  const std::size_t k = cycle.size();
  for (std::size_t i = k - 1; i >= 1; --i) {
    out.push_back(Instruction{"xchg", {reg_operand(cycle[i]), reg_operand(cycle[(i + 1) % k])}});
  }
  return out;
}

std::string cycle_text(const std::vector<RegFamily>& cycle) {
  std::string out;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    out += asm_core::family_name(cycle[i]);
    out += "->";
    out += asm_core::family_name(cycle[(i + 1) % cycle.size()]);
    if (i + 1 < cycle.size()) out += ' ';
  }
  return out;
}

struct Region {
  std::size_t begin;  // first line inside the region
  std::size_t last;   // last line inside the region
  std::vector<RegFamily> cycle;
};

std::size_t instruction_lines(const Program& p, std::size_t begin, std::size_t last) {
  std::size_t n = 0;
  for (std::size_t i = begin; i <= last; ++i) n += p.lines[i].kind == LineKind::Instruction;
  return n;
}

std::optional<Region> plan_region(const Program& p, const Block& b, const TransformConfig& cfg,
                                  const std::vector<RegFamily>* fixed_cycle, SplitMix64& rng) {
  const auto usage = usage_in(p, b);
  std::vector<RegFamily> cycle;
  if (fixed_cycle) {
    for (auto f : *fixed_cycle) {
      if (usage[asm_core::family_index(f)].blocked) return std::nullopt;
    }
    cycle = *fixed_cycle;
  } else {
    std::vector<RegFamily> candidates;
    for (auto f : asm_core::kAllFamilies) {
      const auto& u = usage[asm_core::family_index(f)];
      if (u.used && !u.blocked) candidates.push_back(f);
    }
    if (candidates.size() < 3) return std::nullopt;
    // Partial Fisher-Yates over the candidates in family order.
    const std::size_t k = static_cast<std::size_t>(rng.between(3, static_cast<std::int64_t>(std::min(kMaxCycle, candidates.size()))));
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.below(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
    }
    cycle.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
  }

  std::optional<std::size_t> last;
  for (std::size_t i = b.begin; i < b.end; ++i) {
    const auto& line = p.lines[i];
    if (line.kind == LineKind::Instruction && references_any(*line.instruction, cycle)) last = i;
  }
  if (!last) return std::nullopt;
  if (instruction_lines(p, b.begin, *last) < cfg.region_min_len) return std::nullopt;
  return Region{b.begin, *last, std::move(cycle)};
}

}  // namespace

Stage register_stage(const Program& p, const TransformConfig& cfg, const std::vector<RegFamily>* fixed_cycle) {
  cfg.validate();
  if (fixed_cycle && fixed_cycle->size() < 2) throw std::invalid_argument("renaming cycle needs at least two registers");
  SplitMix64 rng(cfg.seed);

  std::vector<Region> regions;
  for (const auto& b : split_blocks(p)) {
    if (auto r = plan_region(p, b, cfg, fixed_cycle, rng)) regions.push_back(std::move(*r));
  }

  Stage out = start_stage(p);
  std::size_t next = 0;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const Region* region = next < regions.size() && regions[next].begin <= i ? &regions[next] : nullptr;
    if (region && i == region->begin) {
      const auto detail = "xchg prologue " + cycle_text(region->cycle);
      for (auto& x : rotation(region->cycle)) out.insert(std::move(x), Technique::RegisterSub, detail);
    }

    const auto& line = p.lines[i];
    if (region && line.kind == LineKind::Instruction) {
      asm_core::Instruction ins = *line.instruction;
      if (rename(ins, region->cycle)) {
        auto fresh = asm_core::Line::from_instruction(std::move(ins));
        out.entries.push_back({out.program.lines.size(), ChangeKind::RegisterRenamed, Technique::RegisterSub,
                               asm_core::format_instruction(*line.instruction) + " -> " +
                                   asm_core::format_instruction(*fresh.instruction)});
        out.keep(fresh, i);
      } else {
        out.keep(line, i);
      }
    } else {
      out.keep(line, i);
    }

    if (region && i == region->last) {
      auto undo = rotation(region->cycle);
      std::reverse(undo.begin(), undo.end());
      const auto detail = "xchg epilogue " + cycle_text(region->cycle);
      for (auto& x : undo) out.insert(std::move(x), Technique::RegisterSub, detail);
      ++next;
    }
  }
  return out;
}

}  // namespace detail

TransformResult substitute_registers(const Program& p, const TransformConfig& cfg) {
  return detail::finish(detail::register_stage(p, cfg, nullptr), Technique::RegisterSub);
}

TransformResult substitute_registers(const Program& p, const TransformConfig& cfg, std::span<const RegFamily> cycle) {
  const std::vector<RegFamily> fixed(cycle.begin(), cycle.end());
  return detail::finish(detail::register_stage(p, cfg, &fixed), Technique::RegisterSub);
}

}  // namespace obfusclab::transforms
