#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "obfusclab/asm/instruction_info.hpp"
#include "obfusclab/asm/program.hpp"

namespace obfusclab::asm_core {

ParseError::ParseError(std::size_t line, std::string token, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message + " '" + token + "'"),
      line_(line),
      token_(std::move(token)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool starts_with_word(std::string_view s, std::string_view word) {
  return s.size() >= word.size() && s.substr(0, word.size()) == word &&
         (s.size() == word.size() || s[word.size()] == ' ' || s[word.size()] == '\t');
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$' || c == '@' || c == '?';
}

bool is_identifier(std::string_view s) {
  return !s.empty() && !std::isdigit(static_cast<unsigned char>(s[0])) && std::all_of(s.begin(), s.end(), is_ident_char);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

struct Number {
  std::int64_t value;
  int radix;
};

// Decimal, `1a0h`, `-10h`, `0x10` or the listing's odd `0x...h` form.
std::optional<Number> parse_number(std::string_view text) {
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return std::nullopt;

  int radix = 10;
  if (text.size() > 1 && (text.back() == 'h' || text.back() == 'H')) {
    radix = 16;
    text.remove_suffix(1);
  }
  // Suffix hex must start with a digit ("0ffh"); an explicit 0x lifts that.
  if (!std::isdigit(static_cast<unsigned char>(text[0]))) return std::nullopt;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    radix = 16;
    text.remove_prefix(2);
  }

  std::uint64_t magnitude = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), magnitude, radix);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  const auto bits = negative ? ~magnitude + 1 : magnitude;
  return Number{static_cast<std::int64_t>(bits), radix};
}

class OperandParser {
 public:
  OperandParser(std::size_t line, bool allow_label) : line_(line), allow_label_(allow_label) {}

  Operand parse(std::string_view text) const {
    const std::string_view original = text;
    std::optional<std::uint8_t> size_bits;
    static constexpr std::pair<std::string_view, std::uint8_t> kSizes[] = {
        {"byte", 8}, {"word", 16}, {"dword", 32}, {"qword", 64}};
    for (const auto& [word, bits] : kSizes) {
      if (starts_with_word(text, word)) {
        std::string_view rest = trim(text.substr(word.size()));
        if (!starts_with_word(rest, "ptr")) fail(text, "expected 'ptr' after size");
        text = trim(rest.substr(3));
        size_bits = bits;
        break;
      }
    }

    std::optional<std::string> segment;
    const auto colon = text.find(':');
    if (colon != std::string_view::npos && colon + 1 < text.size() && text[colon + 1] == '[') {
      const auto seg = text.substr(0, colon);
      if (seg != "cs" && seg != "ds" && seg != "es" && seg != "ss" && seg != "fs" && seg != "gs") {
        fail(seg, "unknown segment");
      }
      segment = std::string(seg);
      text = text.substr(colon + 1);
    }

    Operand op;
    if (!text.empty() && text.front() == '[') {
      if (text.back() != ']') fail(original, "unterminated memory operand");
      MemoryRef m = parse_memory(text.substr(1, text.size() - 2));
      m.segment = std::move(segment);
      m.size_bits = size_bits;
      op = Operand(std::move(m));
    } else if (size_bits || segment) {
      fail(original, "size or segment prefix needs a memory operand");
    } else if (auto r = lookup_register(text)) {
      op = Operand(*r);
    } else if (auto n = parse_number(text)) {
      op = Operand(Immediate{n->value, n->radix});
    } else if (allow_label_ && is_identifier(text)) {
      op = Operand(LabelRef{std::string(text)});
    } else {
      fail(original, "malformed operand");
    }
    op.spelling = std::string(original);
    return op;
  }

 private:
  [[noreturn]] void fail(std::string_view token, const std::string& message) const {
    throw ParseError(line_, std::string(token), message);
  }

  MemoryRef parse_memory(std::string_view body) const {
    MemoryRef m;
    bool any_term = false;
    std::size_t pos = 0;
    body = trim(body);
    if (body.empty()) fail("[]", "empty memory operand");
    while (pos < body.size()) {
      bool negative = false;
      if (body[pos] == '+' || body[pos] == '-') {
        negative = body[pos] == '-';
        ++pos;
      } else if (any_term) {
        fail(body.substr(pos), "expected '+' or '-'");
      }
      auto end = body.find_first_of("+-", pos);
      if (end == std::string_view::npos) end = body.size();
      const std::string_view term = trim(body.substr(pos, end - pos));
      pos = end;
      if (term.empty()) fail(body, "empty address term");
      add_term(m, term, negative);
      any_term = true;
    }
    return m;
  }

  void add_term(MemoryRef& m, std::string_view term, bool negative) const {
    const auto star = term.find('*');
    if (star != std::string_view::npos) {
      const auto lhs = trim(term.substr(0, star));
      const auto rhs = trim(term.substr(star + 1));
      auto reg = lookup_register(rhs);
      auto factor = parse_number(lhs);
      if (!reg) {
        reg = lookup_register(lhs);
        factor = parse_number(rhs);
      }
      if (!reg || !factor || negative) fail(term, "malformed scaled index");
      if (factor->value != 1 && factor->value != 2 && factor->value != 4 && factor->value != 8) {
        fail(term, "scale must be 1, 2, 4 or 8");
      }
      if (m.index) fail(term, "second index register");
      m.index = *reg;
      m.scale = static_cast<std::uint8_t>(factor->value);
      return;
    }
    if (auto reg = lookup_register(term)) {
      if (negative) fail(term, "register cannot be subtracted");
      if (!m.base) {
        m.base = *reg;
      } else if (!m.index) {
        m.index = *reg;
        m.scale = 1;
      } else {
        fail(term, "too many address registers");
      }
      return;
    }
    if (auto n = parse_number(term)) {
      m.displacement += negative ? -n->value : n->value;
      m.displacement_radix = n->radix;
      return;
    }
    fail(term, "malformed address term");
  }

  std::size_t line_;
  bool allow_label_;
};

std::vector<std::string_view> split_operands(std::string_view text) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '[') ++depth;
    if (text[i] == ']') --depth;
    if (text[i] == ',' && depth == 0) {
      out.push_back(trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(text.substr(start)));
  return out;
}

Instruction parse_instruction_at(std::string_view text, std::size_t line_no) {
  text = trim(text);
  const auto split = text.find_first_of(" \t");
  const std::string mnemonic = lower(text.substr(0, split));
  const auto* info = mnemonic_info(mnemonic);
  if (info == nullptr) throw ParseError(line_no, std::string(text.substr(0, split)), "unsupported mnemonic");

  Instruction ins;
  ins.mnemonic = mnemonic;
  const std::string_view rest = split == std::string_view::npos ? std::string_view{} : trim(text.substr(split));
  if (!rest.empty()) {
    const OperandParser parser(line_no, info->control_transfer);
    for (auto piece : split_operands(rest)) {
      if (piece.empty()) throw ParseError(line_no, std::string(rest), "empty operand");
      ins.operands.push_back(parser.parse(piece));
    }
  }
  if (ins.operands.size() < info->min_operands || ins.operands.size() > info->max_operands) {
    throw ParseError(line_no, std::string(text), "wrong operand count for " + mnemonic);
  }
  return ins;
}

Line classify(std::string_view raw, std::size_t line_no) {
  Line line;
  line.raw_text = std::string(raw);
  const std::string_view t = trim(raw);
  if (t.empty()) {
    line.kind = LineKind::Blank;
  } else if (t.starts_with("//") || t.front() == ';') {
    line.kind = LineKind::Comment;
  } else if (t.front() == '.') {
    line.kind = LineKind::Directive;
  } else if (starts_with_word(t, "db")) {
    line.kind = LineKind::Data;
  } else if (t.back() == ':' && is_identifier(t.substr(0, t.size() - 1))) {
    line.kind = LineKind::LabelDef;
    line.label = std::string(t.substr(0, t.size() - 1));
  } else {
    line.kind = LineKind::Instruction;
    std::string_view body = t;
    const auto semi = t.find(';');
    if (semi != std::string_view::npos) {
      body = t.substr(0, semi);
      line.trailing_comment = std::string(trim(t.substr(semi + 1)));
    }
    line.instruction = parse_instruction_at(body, line_no);
  }
  return line;
}

}  // namespace

Instruction parse_instruction(std::string_view text) { return parse_instruction_at(text, 1); }

Program parse_listing(std::string_view text, std::string name) {
  Program p;
  p.name = std::move(name);
  p.trailing_newline = !text.empty() && text.back() == '\n';
  if (p.trailing_newline) text.remove_suffix(1);
  if (text.empty() && !p.trailing_newline) return p;

  std::set<std::string, std::less<>> labels;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++line_no;
    Line line = classify(raw, line_no);
    if (line.kind == LineKind::LabelDef && !labels.insert(line.label).second) {
      throw ParseError(line_no, line.label, "duplicate label");
    }
    p.lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return p;
}

}  // namespace obfusclab::asm_core
