#include <algorithm>
#include <set>
#include <stdexcept>

#include "stage.hpp"

namespace obfusclab::transforms {

std::string_view technique_tag(Technique t) noexcept {
  switch (t) {
    case Technique::DeadCode: return "dead";
    case Technique::RegisterSub: return "reg";
    case Technique::InstrReplace: return "ins";
    case Technique::Mixed: return "mix";
  }
  return {};
}

std::optional<Technique> parse_technique(std::string_view text) noexcept {
  for (auto t : kAllTechniques) {
    if (text == technique_tag(t)) return t;
  }
  if (text == "mixed") return Technique::Mixed;
  return std::nullopt;
}

std::string_view change_kind_name(ChangeKind k) noexcept {
  switch (k) {
    case ChangeKind::Inserted: return "inserted";
    case ChangeKind::RegisterRenamed: return "register-renamed";
    case ChangeKind::InstructionReplaced: return "instruction-replaced";
  }
  return {};
}

void TransformConfig::validate() const {
  if (insertion_period_min < 1 || insertion_period_min > insertion_period_max) {
    throw std::invalid_argument("insertion period must satisfy 1 <= min <= max");
  }
  if (region_min_len < 2) throw std::invalid_argument("region_min_len must be at least 2");
}

std::size_t count_changes(const ChangeLog& log, Technique t) {
  if (t == Technique::Mixed) {
    std::set<std::size_t> lines;
    for (const auto& e : log.entries) lines.insert(e.line);
    return lines.size();
  }
  for (const auto& e : log.entries) {
    if (e.technique != t) {
      throw ContractViolation("change log entry from '" + std::string(technique_tag(e.technique)) +
                              "' counted as '" + std::string(technique_tag(t)) + "'");
    }
  }
  return log.entries.size();
}

std::string to_csv(const ChangeLog& log) {
  std::string out = "line,kind,technique,detail\n";
  for (const auto& e : log.entries) {
    out += std::to_string(e.line + 1);
    out += ',';
    out += change_kind_name(e.kind);
    out += ',';
    out += technique_tag(e.technique);
    out += ",\"";
    for (char c : e.detail) {
      if (c == '"') out += '"';
      out += c;
    }
    out += "\"\n";
  }
  return out;
}

bool flags_live_after(const std::vector<asm_core::Line>& lines, std::size_t index) {
  for (std::size_t i = index + 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.kind == asm_core::LineKind::LabelDef) return true;
    if (line.kind != asm_core::LineKind::Instruction || !line.instruction) continue;
    const auto& ins = *line.instruction;
    if (asm_core::reads_flags(ins) || asm_core::is_control_transfer(ins)) return true;
    if (asm_core::defines_flags(ins)) return false;
  }
  return false;
}

namespace detail {

Stage start_stage(const Program& p) {
  Stage s;
  s.program.name = p.name;
  s.program.trailing_newline = p.trailing_newline;
  return s;
}

TransformResult finish(Stage stage, Technique t) {
  TransformResult r;
  r.program = std::move(stage.program);
  std::stable_sort(stage.entries.begin(), stage.entries.end(),
                   [](const ChangeEntry& a, const ChangeEntry& b) { return a.line < b.line; });
  r.log.entries = std::move(stage.entries);
  r.change_count = count_changes(r.log, t);
  return r;
}

}  // namespace detail

}  // namespace obfusclab::transforms
