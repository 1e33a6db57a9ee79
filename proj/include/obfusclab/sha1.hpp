#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace obfusclab {

// 40 lowercase hex characters.
std::string sha1_digest(std::span<const std::uint8_t> data);
std::string sha1_digest(std::string_view data);

bool is_sha1_hex(std::string_view text);

struct Sha1Record {
  std::string digest;
  std::string name;

  friend bool operator==(const Sha1Record&, const Sha1Record&) = default;
};

class HashListError : public std::runtime_error {
 public:
  HashListError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// One `<sha1>:<name>` per line. Blank lines are skipped; anything else that
// does not match throws HashListError with the 1-based line number.
std::vector<Sha1Record> parse_hash_list(std::string_view text);
std::string emit_hash_list(const std::vector<Sha1Record>& records);

}  // namespace obfusclab
