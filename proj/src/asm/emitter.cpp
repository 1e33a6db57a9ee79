#include <algorithm>

#include "obfusclab/asm/program.hpp"

namespace obfusclab::asm_core {

namespace {

std::string hex_digits(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  do {
    out.push_back(kHex[v & 0xF]);
    v >>= 4;
  } while (v != 0);
  std::reverse(out.begin(), out.end());
  return out;
}

std::string_view size_keyword(std::uint8_t bits) {
  switch (bits) {
    case 8: return "byte";
    case 16: return "word";
    case 32: return "dword";
    default: return "qword";
  }
}

std::string format_memory(const MemoryRef& m) {
  std::string out;
  if (m.size_bits) {
    out += size_keyword(*m.size_bits);
    out += " ptr ";
  }
  if (m.segment) {
    out += *m.segment;
    out += ':';
  }
  out += '[';
  bool first = true;
  if (m.base) {
    out += register_name(*m.base);
    first = false;
  }
  if (m.index) {
    if (!first) out += '+';
    if (m.scale != 1) {
      out += std::to_string(m.scale);
      out += '*';
    }
    out += register_name(*m.index);
    first = false;
  }
  if (m.displacement != 0 || first) {
    if (m.displacement < 0) {
      out += '-';
      out += format_immediate(-m.displacement, m.displacement_radix);
    } else {
      if (!first) out += '+';
      out += format_immediate(m.displacement, m.displacement_radix);
    }
  }
  out += ']';
  return out;
}

}  // namespace

std::string format_immediate(std::int64_t value, int radix) {
  if (radix != 16) return std::to_string(value);
  const bool negative = value < 0;
  const std::uint64_t magnitude = negative ? ~static_cast<std::uint64_t>(value) + 1 : static_cast<std::uint64_t>(value);
  std::string digits = hex_digits(magnitude);
  if (digits.front() >= 'a') digits.insert(digits.begin(), '0');
  return (negative ? "-" : "") + digits + "h";
}

std::string format_operand(const Operand& op) {
  if (!op.spelling.empty()) return op.spelling;
  switch (op.kind()) {
    case OperandKind::Register: return std::string(register_name(*op.reg()));
    case OperandKind::Immediate: return format_immediate(op.imm()->value, op.imm()->radix);
    case OperandKind::Memory: return format_memory(*op.mem());
    case OperandKind::LabelRef: return op.label()->name;
  }
  return {};
}

std::string format_instruction(const Instruction& ins) {
  std::string out = ins.mnemonic;
  for (std::size_t i = 0; i < ins.operands.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += format_operand(ins.operands[i]);
  }
  return out;
}

Line Line::from_instruction(Instruction ins) {
  Line line;
  line.kind = LineKind::Instruction;
  line.raw_text = "    " + format_instruction(ins);
  line.instruction = std::move(ins);
  line.rewritten = true;
  return line;
}

bool operator==(const Line& a, const Line& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case LineKind::Instruction: return a.instruction == b.instruction;
    case LineKind::LabelDef: return a.label == b.label;
    case LineKind::Blank: return true;
    default: return a.raw_text == b.raw_text;
  }
}

std::string emit_listing(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.lines.size(); ++i) {
    const Line& line = p.lines[i];
    if (i > 0) out += '\n';
    if (!line.rewritten) {
      out += line.raw_text;
    } else if (line.kind == LineKind::Instruction && line.instruction) {
      out += "    ";
      out += format_instruction(*line.instruction);
    } else if (line.kind == LineKind::LabelDef) {
      out += line.label;
      out += ':';
    } else {
      out += line.raw_text;
    }
  }
  if (p.trailing_newline) out += '\n';
  return out;
}

std::size_t instruction_line_count(const Program& p) {
  return static_cast<std::size_t>(
      std::count_if(p.lines.begin(), p.lines.end(), [](const Line& l) { return l.kind == LineKind::Instruction; }));
}

}  // namespace obfusclab::asm_core
