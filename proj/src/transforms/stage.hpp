#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "obfusclab/asm/instruction_info.hpp"
#include "obfusclab/transforms.hpp"

namespace obfusclab::transforms::detail {

inline constexpr std::size_t kNoOrigin = std::numeric_limits<std::size_t>::max();

// One rewrite pass: the output program, its log, and for every output line
// the input line it came from (kNoOrigin for inserted lines).
struct Stage {
  Program program;
  std::vector<ChangeEntry> entries;
  std::vector<std::size_t> origin;

  void keep(const asm_core::Line& line, std::size_t from) {
    program.lines.push_back(line);
    origin.push_back(from);
  }
  void insert(asm_core::Instruction ins, Technique t, std::string detail) {
    entries.push_back({program.lines.size(), ChangeKind::Inserted, t, std::move(detail)});
    program.lines.push_back(asm_core::Line::from_instruction(std::move(ins)));
    origin.push_back(kNoOrigin);
  }
};

Stage start_stage(const Program& p);
TransformResult finish(Stage stage, Technique t);

Stage dead_code_stage(const Program& p, const TransformConfig& cfg);
Stage register_stage(const Program& p, const TransformConfig& cfg, const std::vector<RegFamily>* fixed_cycle);
Stage replace_stage(const Program& p, const TransformConfig& cfg);

inline asm_core::Operand reg_operand(RegFamily f) { return asm_core::Operand(asm_core::Register::full(f)); }
inline asm_core::Operand imm_operand(std::int64_t v) { return asm_core::Operand(asm_core::Immediate{v, 10}); }

}  // namespace obfusclab::transforms::detail
