#pragma once

#include <cstdint>
#include <string>

namespace obfusclab {

struct GeneratorOptions {
  std::size_t instructions = 50;
  // Adds the section/entrypoint header, a label, the odd comment or blank
  // line, and a trailing `db` row, as a disassembler listing would have.
  bool decorate = true;
};

// Random straight-line listing restricted to instructions the semantic
// checker can evaluate. Memory is only touched through push/pop and rsp is
// never named explicitly. The same seed always yields the same text.
std::string generate_listing(std::uint64_t seed, const GeneratorOptions& options);

}  // namespace obfusclab
