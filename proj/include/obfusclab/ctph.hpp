#pragma once

// Context triggered piecewise hashing (ssdeep-compatible signatures).
//
// A 7-byte rolling hash walks the input; whenever its value hits
// `block_size - 1 (mod block_size)` the current piece ends and its 6-bit
// multiply-xor hash becomes one base64 character of the digest. Two digests
// are kept, at block_size and 2 * block_size, so that signatures of files
// whose sizes differ by about a factor of two remain comparable.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace obfusclab::ctph {

inline constexpr std::size_t kRollingWindow = 7;
inline constexpr std::uint64_t kMinBlockSize = 3;
inline constexpr std::size_t kDigestLength = 64;
inline constexpr std::size_t kSecondaryLength = kDigestLength / 2;
inline constexpr std::uint32_t kPieceHashInit = 0x28021967;
inline constexpr std::uint32_t kPieceHashPrime = 0x01000193;
inline constexpr std::string_view kBase64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

// Sliding-window hash over the last kRollingWindow bytes. All arithmetic
// wraps modulo 2^32.
class RollingState {
 public:
  // Consumes one byte and returns the rolling value h1 + h2 + h3.
  std::uint32_t update(std::uint8_t byte) noexcept;
  std::uint32_t value() const noexcept { return h1_ + h2_ + h3_; }

  std::uint32_t h1() const noexcept { return h1_; }
  std::uint32_t h2() const noexcept { return h2_; }
  std::uint32_t h3() const noexcept { return h3_; }
  std::uint64_t consumed() const noexcept { return count_; }

  // Bytes currently in the window, oldest first (at most kRollingWindow).
  std::string window() const;

 private:
  std::array<std::uint8_t, kRollingWindow> window_{};
  std::uint32_t h1_ = 0;
  std::uint32_t h2_ = 0;
  std::uint32_t h3_ = 0;
  std::uint64_t count_ = 0;
};

// Per-piece hash: FNV-style multiply then xor, 32-bit wrapping.
constexpr std::uint32_t piece_hash_step(std::uint32_t h, std::uint8_t byte) noexcept {
  return (h * kPieceHashPrime) ^ byte;
}

struct FuzzySignature {
  std::uint64_t block_size = kMinBlockSize;
  std::string digest_primary;
  std::string digest_secondary;
  std::optional<std::string> source_name;

  bool empty() const noexcept { return digest_primary.empty() && digest_secondary.empty(); }

  // `block_size:primary:secondary`, followed by `,"name"` when named.
  std::string to_string() const;

  friend bool operator==(const FuzzySignature&, const FuzzySignature&) = default;
};

class SignatureFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Header line of a signature database file.
inline constexpr std::string_view kSignatureFileHeader = "ssdeep,1.1--blocksize:hash:hash,filename";

FuzzySignature fuzzy_hash(std::span<const std::uint8_t> data);
FuzzySignature fuzzy_hash(std::string_view data);

// Parses `bs:primary:secondary[,"name"]`. Throws SignatureFormatError.
FuzzySignature parse_signature(std::string_view text);

// Similarity in [0, 100]; symmetric in its arguments.
int fuzzy_compare(const FuzzySignature& a, const FuzzySignature& b);

// Collapses runs of more than three identical characters down to three.
std::string eliminate_sequences(std::string_view digest);

// Weighted edit distance: insert/delete 1, substitute 3, adjacent swap 5.
int weighted_edit_distance(std::string_view a, std::string_view b);

// True when a and b share a substring of at least kRollingWindow characters.
bool has_common_substring(std::string_view a, std::string_view b);

// Score of two digests computed at the same block size.
int score_digests(std::string_view a, std::string_view b, std::uint64_t block_size);

}  // namespace obfusclab::ctph
