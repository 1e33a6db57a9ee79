#include "obfusclab/sha1.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <array>

namespace obfusclab {

std::string sha1_digest(std::span<const std::uint8_t> data) {
  std::array<unsigned char, SHA_DIGEST_LENGTH> raw{};
  SHA1(data.data(), data.size(), raw.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * raw.size());
  for (unsigned char b : raw) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string sha1_digest(std::string_view data) {
  return sha1_digest(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

bool is_sha1_hex(std::string_view text) {
  return text.size() == 2 * SHA_DIGEST_LENGTH && std::all_of(text.begin(), text.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::vector<Sha1Record> parse_hash_list(std::string_view text) {
  std::vector<Sha1Record> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw HashListError(line_no, "expected '<sha1>:<name>'");
    const std::string_view digest = line.substr(0, colon);
    if (!is_sha1_hex(digest)) throw HashListError(line_no, "'" + std::string(digest) + "' is not a lowercase sha1");
    if (colon + 1 == line.size()) throw HashListError(line_no, "missing name");
    out.push_back({std::string(digest), std::string(line.substr(colon + 1))});
  }
  return out;
}

std::string emit_hash_list(const std::vector<Sha1Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.digest;
    out += ':';
    out += r.name;
    out += '\n';
  }
  return out;
}

}  // namespace obfusclab
