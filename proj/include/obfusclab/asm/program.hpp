#pragma once

// Typed representation of the textual x86-64 listing dialect: directives,
// labels, `//` comments, `db` data rows and instructions carrying an optional
// `; @offset bytes` trailing comment.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "obfusclab/asm/register.hpp"

namespace obfusclab::asm_core {

struct Immediate {
  std::int64_t value = 0;
  int radix = 10;  // 10 or 16

  friend bool operator==(const Immediate&, const Immediate&) = default;
};

struct MemoryRef {
  std::optional<std::string> segment;  // "gs", "fs", ...
  std::optional<Register> base;
  std::optional<Register> index;
  std::uint8_t scale = 1;
  std::int64_t displacement = 0;
  int displacement_radix = 16;
  std::optional<std::uint8_t> size_bits;  // from "byte/word/dword/qword ptr"

  friend bool operator==(const MemoryRef&, const MemoryRef&) = default;
};

struct LabelRef {
  std::string name;

  friend bool operator==(const LabelRef&, const LabelRef&) = default;
};

enum class OperandKind { Register, Immediate, Memory, LabelRef };

struct Operand {
  std::variant<Register, Immediate, MemoryRef, LabelRef> value;
  // Source spelling for parsed operands; emitted verbatim when non-empty so
  // that an untouched operand keeps its notation inside a rewritten line.
  std::string spelling;

  Operand() = default;
  Operand(Register r) : value(r) {}
  Operand(Immediate i) : value(i) {}
  Operand(MemoryRef m) : value(std::move(m)) {}
  Operand(LabelRef l) : value(std::move(l)) {}

  OperandKind kind() const noexcept { return static_cast<OperandKind>(value.index()); }
  const Register* reg() const noexcept { return std::get_if<Register>(&value); }
  const Immediate* imm() const noexcept { return std::get_if<Immediate>(&value); }
  const MemoryRef* mem() const noexcept { return std::get_if<MemoryRef>(&value); }
  const LabelRef* label() const noexcept { return std::get_if<LabelRef>(&value); }

  // Structural equality; spelling is presentation only.
  friend bool operator==(const Operand& a, const Operand& b) { return a.value == b.value; }
};

struct Instruction {
  std::string mnemonic;
  std::vector<Operand> operands;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

enum class LineKind { Instruction, LabelDef, Directive, Data, Comment, Blank };

struct Line {
  LineKind kind = LineKind::Blank;
  std::string raw_text;
  std::optional<std::string> trailing_comment;
  std::optional<Instruction> instruction;  // LineKind::Instruction only
  std::string label;                       // LineKind::LabelDef only
  // Set once a transformation has touched the line: raw_text and the
  // trailing comment are stale and the line is emitted canonically.
  bool rewritten = false;

  static Line from_instruction(Instruction ins);

  // Structural equality (kind, instruction, label; text for opaque kinds).
  friend bool operator==(const Line& a, const Line& b);
};

struct Program {
  std::string name;
  std::vector<Line> lines;
  bool trailing_newline = true;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string token, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::size_t line_;
  std::string token_;
};

// Accepts LF or CRLF line endings. Throws ParseError on malformed operands,
// unsupported mnemonics, or duplicate labels.
Program parse_listing(std::string_view text, std::string name = {});

// Parses a single instruction (no trailing comment), e.g. "mov rax, 0".
Instruction parse_instruction(std::string_view text);

std::string emit_listing(const Program& p);
std::string format_instruction(const Instruction& ins);
std::string format_operand(const Operand& op);
std::string format_immediate(std::int64_t value, int radix);

std::size_t instruction_line_count(const Program& p);

}  // namespace obfusclab::asm_core
