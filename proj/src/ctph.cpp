#include "obfusclab/ctph.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

namespace obfusclab::ctph {

std::uint32_t RollingState::update(std::uint8_t byte) noexcept {
  const std::size_t slot = count_ % kRollingWindow;
  h2_ = h2_ - h1_ + static_cast<std::uint32_t>(kRollingWindow) * byte;
  h1_ = h1_ + byte - window_[slot];
  window_[slot] = byte;
  h3_ = (h3_ << 5) ^ byte;
  ++count_;
  return value();
}

std::string RollingState::window() const {
  std::string out;
  const std::uint64_t held = std::min<std::uint64_t>(count_, kRollingWindow);
  for (std::uint64_t i = count_ - held; i < count_; ++i) {
    out.push_back(static_cast<char>(window_[i % kRollingWindow]));
  }
  return out;
}

namespace {

constexpr std::size_t kMaxLanes = 31;

char to_base64(std::uint32_t piece) { return kBase64Alphabet[piece % 64]; }

constexpr std::uint64_t lane_block_size(std::size_t lane) { return kMinBlockSize << lane; }

// Digest state for one candidate block size. A full primary digest keeps its
// last character open (`tail`) and folds every further piece into it.
struct Lane {
  std::uint32_t piece = kPieceHashInit;
  std::uint32_t half_piece = kPieceHashInit;
  std::string digest;
  char tail = 0;
  char half_tail = 0;
};

// Hashes all candidate block sizes in a single pass. Lane k+1 is opened the
// first time lane k triggers (before that the two are identical), and the
// smallest lane is dropped once the final block-size choice can no longer
// land on it.
class Engine {
 public:
  explicit Engine(std::uint64_t total_size) : total_size_(total_size) { lanes_.reserve(kMaxLanes); lanes_.emplace_back(); }

  void consume(std::span<const std::uint8_t> data) {
    for (std::uint8_t byte : data) step(byte);
  }

  FuzzySignature finish() const;

 private:
  void step(std::uint8_t byte);
  void open_next_lane();
  void maybe_drop_first_lane();

  std::uint64_t total_size_;
  RollingState roll_;
  std::vector<Lane> lanes_;
  std::size_t first_ = 0;
};

void Engine::step(std::uint8_t byte) {
  const std::uint32_t h = roll_.update(byte);
  for (std::size_t i = first_; i < lanes_.size(); ++i) {
    lanes_[i].piece = piece_hash_step(lanes_[i].piece, byte);
    lanes_[i].half_piece = piece_hash_step(lanes_[i].half_piece, byte);
  }
  // A trigger at 2*bs implies a trigger at bs, so stop at the first miss.
  for (std::size_t i = first_; i < lanes_.size(); ++i) {
    const std::uint64_t bs = lane_block_size(i);
    if (h % bs != bs - 1) break;
    Lane& lane = lanes_[i];
    if (lane.digest.empty() && lane.tail == 0 && i + 1 == lanes_.size()) open_next_lane();
    const char c = to_base64(lane.piece);
    lane.half_tail = to_base64(lane.half_piece);
    if (lane.digest.size() < kDigestLength - 1) {
      lane.digest.push_back(c);
      lane.piece = kPieceHashInit;
      if (lane.digest.size() < kSecondaryLength) {
        lane.half_piece = kPieceHashInit;
        lane.half_tail = 0;
      }
    } else {
      lane.tail = c;
      maybe_drop_first_lane();
    }
  }
}

void Engine::open_next_lane() {
  if (lanes_.size() >= kMaxLanes) return;
  Lane next;
  next.piece = lanes_.back().piece;
  next.half_piece = lanes_.back().half_piece;
  lanes_.push_back(std::move(next));
}

void Engine::maybe_drop_first_lane() {
  if (lanes_.size() - first_ < 2) return;
  if (lane_block_size(first_) * kDigestLength >= total_size_) return;
  if (lanes_[first_ + 1].digest.size() < kSecondaryLength) return;
  ++first_;
}

FuzzySignature Engine::finish() const {
  // Smallest block size whose full-length digest could cover the input, then
  // step down while the digest would come out shorter than half length.
  std::size_t bi = first_;
  while (lane_block_size(bi) * kDigestLength < total_size_ && bi + 1 < kMaxLanes) ++bi;
  while (bi >= lanes_.size()) --bi;
  while (bi > first_ && lanes_[bi].digest.size() < kSecondaryLength) --bi;

  const bool open_piece = roll_.value() != 0;
  const Lane& lane = lanes_[bi];

  FuzzySignature sig;
  sig.block_size = lane_block_size(bi);
  sig.digest_primary = lane.digest;
  if (open_piece) {
    sig.digest_primary.push_back(to_base64(lane.piece));
  } else if (lane.tail != 0) {
    sig.digest_primary.push_back(lane.tail);
  }

  if (bi + 1 < lanes_.size()) {
    const Lane& wide = lanes_[bi + 1];
    sig.digest_secondary = wide.digest.substr(0, kSecondaryLength - 1);
    if (open_piece) {
      sig.digest_secondary.push_back(to_base64(wide.half_piece));
    } else if (wide.half_tail != 0) {
      sig.digest_secondary.push_back(wide.half_tail);
    }
  } else if (open_piece) {
    // The doubled block size never triggered, so its only piece is the whole
    // input, whose hash equals this lane's open piece.
    sig.digest_secondary.push_back(to_base64(lane.piece));
  }
  return sig;
}

}  // namespace

FuzzySignature fuzzy_hash(std::span<const std::uint8_t> data) {
  Engine engine(data.size());
  engine.consume(data);
  return engine.finish();
}

FuzzySignature fuzzy_hash(std::string_view data) {
  return fuzzy_hash(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::string FuzzySignature::to_string() const {
  std::string out = std::to_string(block_size);
  out += ':';
  out += digest_primary;
  out += ':';
  out += digest_secondary;
  if (source_name) {
    out += ",\"";
    out += *source_name;
    out += '"';
  }
  return out;
}

namespace {

bool is_digest_text(std::string_view s, std::size_t cap) {
  return s.size() <= cap &&
         std::all_of(s.begin(), s.end(), [](char c) { return kBase64Alphabet.find(c) != std::string_view::npos; });
}

}  // namespace

FuzzySignature parse_signature(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);

  FuzzySignature sig;
  const auto comma = text.find(',');
  std::string_view body = text.substr(0, comma);
  if (comma != std::string_view::npos) {
    std::string_view name = text.substr(comma + 1);
    if (name.size() >= 2 && name.front() == '"' && name.back() == '"') {
      name = name.substr(1, name.size() - 2);
    }
    sig.source_name = std::string(name);
  }

  const auto c1 = body.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : body.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw SignatureFormatError("signature needs three ':'-separated fields");

  const std::string_view bs_text = body.substr(0, c1);
  auto [ptr, ec] = std::from_chars(bs_text.data(), bs_text.data() + bs_text.size(), sig.block_size);
  if (ec != std::errc() || ptr != bs_text.data() + bs_text.size() || sig.block_size < kMinBlockSize) {
    throw SignatureFormatError("bad block size '" + std::string(bs_text) + "'");
  }
  std::uint64_t reduced = sig.block_size / kMinBlockSize;
  if (sig.block_size % kMinBlockSize != 0 || (reduced & (reduced - 1)) != 0) {
    throw SignatureFormatError("block size " + std::to_string(sig.block_size) + " is not 3*2^k");
  }

  sig.digest_primary = std::string(body.substr(c1 + 1, c2 - c1 - 1));
  sig.digest_secondary = std::string(body.substr(c2 + 1));
  if (!is_digest_text(sig.digest_primary, kDigestLength) || !is_digest_text(sig.digest_secondary, kSecondaryLength)) {
    throw SignatureFormatError("digest must be base64 text within its length cap");
  }
  return sig;
}

std::string eliminate_sequences(std::string_view digest) {
  std::string out;
  out.reserve(digest.size());
  for (std::size_t i = 0; i < digest.size(); ++i) {
    if (i >= 3 && digest[i] == digest[i - 1] && digest[i] == digest[i - 2] && digest[i] == digest[i - 3]) continue;
    out.push_back(digest[i]);
  }
  return out;
}

int weighted_edit_distance(std::string_view a, std::string_view b) {
  constexpr int kInsert = 1;
  constexpr int kDelete = 1;
  constexpr int kSubstitute = 3;
  constexpr int kSwap = 5;

  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> table((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& { return table[i * (m + 1) + j]; };

  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i) * kDelete;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j) * kInsert;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      int best = std::min(at(i - 1, j) + kDelete, at(i, j - 1) + kInsert);
      best = std::min(best, at(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : kSubstitute));
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        best = std::min(best, at(i - 2, j - 2) + kSwap);
      }
      at(i, j) = best;
    }
  }
  return at(n, m);
}

bool has_common_substring(std::string_view a, std::string_view b) {
  if (a.size() < kRollingWindow || b.size() < kRollingWindow) return false;
  for (std::size_t i = 0; i + kRollingWindow <= a.size(); ++i) {
    if (b.find(a.substr(i, kRollingWindow)) != std::string_view::npos) return true;
  }
  return false;
}

int score_digests(std::string_view a, std::string_view b, std::uint64_t block_size) {
  if (!has_common_substring(a, b)) return 0;

  // Distance scaled to the combined length, then flipped so 100 is a match.
  std::uint64_t score = static_cast<std::uint64_t>(weighted_edit_distance(a, b));
  score = score * kDigestLength / (a.size() + b.size());
  score = 100 * score / kDigestLength;
  if (score >= 100) return 0;
  score = 100 - score;

  // Small block sizes: a short digest match carries little evidence.
  constexpr std::uint64_t kUncappedBlockSize = (99 + kRollingWindow) / kRollingWindow * kMinBlockSize;
  if (block_size >= kUncappedBlockSize) return static_cast<int>(score);
  const std::uint64_t cap = block_size / kMinBlockSize * std::min(a.size(), b.size());
  return static_cast<int>(std::min(score, cap));
}

int fuzzy_compare(const FuzzySignature& a, const FuzzySignature& b) {
  const std::uint64_t bs1 = a.block_size;
  const std::uint64_t bs2 = b.block_size;
  if (bs1 != bs2 && bs1 != 2 * bs2 && bs2 != 2 * bs1) return 0;

  const std::string a1 = eliminate_sequences(a.digest_primary);
  const std::string a2 = eliminate_sequences(a.digest_secondary);
  const std::string b1 = eliminate_sequences(b.digest_primary);
  const std::string b2 = eliminate_sequences(b.digest_secondary);

  if (bs1 == bs2 && a1 == b1 && a2 == b2) {
    // Empty signatures carry no similarity evidence.
    return a1.empty() ? 0 : 100;
  }

  if (bs1 == bs2) {
    return std::max(score_digests(a1, b1, bs1), score_digests(a2, b2, bs1 * 2));
  }
  if (bs1 == 2 * bs2) return score_digests(a1, b2, bs1);
  return score_digests(a2, b1, bs2);
}

}  // namespace obfusclab::ctph
