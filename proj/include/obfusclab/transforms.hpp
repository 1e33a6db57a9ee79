#pragma once

// Obfuscating rewrites over a parsed listing: dead-code insertion, register
// substitution through xchg cycles, instruction replacement, and all three
// combined. Every rewrite returns a change log whose line numbers refer to
// the output program.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "obfusclab/asm/program.hpp"

namespace obfusclab::transforms {

using asm_core::Program;
using asm_core::RegFamily;

enum class Technique { DeadCode, RegisterSub, InstrReplace, Mixed };

inline constexpr Technique kAllTechniques[] = {Technique::DeadCode, Technique::InstrReplace, Technique::RegisterSub,
                                               Technique::Mixed};

// "dead", "reg", "ins", "mix": the file-name suffixes and CSV spelling.
std::string_view technique_tag(Technique t) noexcept;
// Accepts the tags above plus "mixed".
std::optional<Technique> parse_technique(std::string_view text) noexcept;

struct TransformConfig {
  std::uint64_t seed = 0;
  unsigned insertion_period_min = 4;
  unsigned insertion_period_max = 5;
  unsigned region_min_len = 6;

  // Throws std::invalid_argument when the bounds are inconsistent.
  void validate() const;
};

enum class ChangeKind { Inserted, RegisterRenamed, InstructionReplaced };

std::string_view change_kind_name(ChangeKind k) noexcept;

struct ChangeEntry {
  std::size_t line = 0;  // 0-based index into the output program's lines
  ChangeKind kind = ChangeKind::Inserted;
  Technique technique = Technique::DeadCode;
  std::string detail;

  friend bool operator==(const ChangeEntry&, const ChangeEntry&) = default;
};

struct ChangeLog {
  std::vector<ChangeEntry> entries;  // ordered by line

  friend bool operator==(const ChangeLog&, const ChangeLog&) = default;
};

struct TransformResult {
  Program program;
  ChangeLog log;
  std::size_t change_count = 0;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

TransformResult insert_dead_code(const Program& p, const TransformConfig& cfg);
TransformResult substitute_registers(const Program& p, const TransformConfig& cfg);
// Uses `cycle` (renaming cycle[i] -> cycle[i+1], last -> first) in every
// block where it is safe instead of drawing one per block.
TransformResult substitute_registers(const Program& p, const TransformConfig& cfg, std::span<const RegFamily> cycle);
TransformResult replace_instructions(const Program& p, const TransformConfig& cfg);
TransformResult apply_mixed(const Program& p, const TransformConfig& cfg);
TransformResult apply(Technique t, const Program& p, const TransformConfig& cfg);

// DeadCode: inserted lines; RegisterSub: renamed plus inserted xchg lines;
// InstrReplace: replaced source lines; Mixed: distinct lines touched.
// Throws ContractViolation when a single-technique log holds foreign entries.
std::size_t count_changes(const ChangeLog& log, Technique t);

// `line,kind,technique,detail` with a header row; line numbers are 1-based.
std::string to_csv(const ChangeLog& log);

// Conservative scan forward from just after `index`: true when a flag reader
// can be reached before an instruction that overwrites ZF, SF and CF. Labels
// and call/jmp count as readers; the end of the program does not.
bool flags_live_after(const std::vector<asm_core::Line>& lines, std::size_t index);

}  // namespace obfusclab::transforms
