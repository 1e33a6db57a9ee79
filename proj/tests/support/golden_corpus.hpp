#pragma once

// Rebuilds the byte corpus behind tests/data/ctph_golden.txt. Must stay in
// lockstep with tools/golden/make_ctph_golden.py.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "obfusclab/rng.hpp"

namespace golden {

using Bytes = std::vector<std::uint8_t>;
using Key = std::pair<std::string, int>;

inline constexpr int kBaseCount = 100;
inline constexpr int kTinyCount = 64;
inline constexpr std::uint64_t kMinSize = 1024;
inline constexpr std::uint64_t kMaxSize = 256 * 1024;
inline constexpr std::size_t kPeriod = 509;

inline Bytes base_file(int i) {
  obfusclab::SplitMix64 rng(0x5EED0000ULL + i);
  const std::size_t size = kMinSize + rng.next() % (kMaxSize - kMinSize + 1);
  Bytes out;
  out.reserve(size);
  switch (i % 4) {
    case 0:
      for (std::size_t k = 0; k < size; ++k) out.push_back(rng.next() & 0xFF);
      break;
    case 1:
      for (std::size_t k = 0; k < size; ++k) out.push_back(0x61 + rng.next() % 4);
      break;
    case 2:
      while (out.size() < size) {
        const std::uint64_t v = rng.next();
        const std::size_t run = 1 + (v >> 8) % 64;
        out.insert(out.end(), std::min(run, size - out.size()), static_cast<std::uint8_t>(v & 0xFF));
      }
      break;
    default: {
      Bytes block;
      for (std::size_t k = 0; k < kPeriod; ++k) block.push_back(rng.next() & 0xFF);
      for (std::size_t k = 0; k < size; ++k) {
        const std::uint64_t v = rng.next();
        out.push_back(v % 61 == 0 ? static_cast<std::uint8_t>((v >> 8) & 0xFF) : block[k % kPeriod]);
      }
    }
  }
  return out;
}

inline Bytes mutant_file(int i, const Bytes& base) {
  obfusclab::SplitMix64 rng(0xED170000ULL + i);
  Bytes data = base;
  const std::uint64_t pct = 1 + rng.next() % 5;
  const std::uint64_t edits = std::max<std::uint64_t>(1, data.size() * pct / 100);
  const std::uint64_t bursts = 1 + rng.next() % 4;
  for (std::uint64_t b = 0; b < bursts; ++b) {
    const std::uint64_t blen = edits / bursts + (b < edits % bursts ? 1 : 0);
    const std::uint64_t start = rng.next() % (data.size() - blen + 1);
    for (std::uint64_t k = 0; k < blen; ++k) data[start + k] = (rng.next() >> 32) & 0xFF;
  }
  const std::uint64_t indels = rng.next() % 9;
  for (std::uint64_t n = 0; n < indels; ++n) {
    const std::uint64_t v = rng.next();
    const std::size_t pos = (v >> 8) % data.size();
    const std::size_t seglen = 1 + (v >> 32) % 16;
    if ((v >> 16) & 1) {
      Bytes seg;
      for (std::size_t k = 0; k < seglen; ++k) seg.push_back(((v >> 40) + k) & 0xFF);
      data.insert(data.begin() + pos, seg.begin(), seg.end());
    } else {
      data.erase(data.begin() + pos, data.begin() + std::min(data.size(), pos + seglen));
    }
  }
  return data;
}

inline Bytes tiny_file(int t) {
  obfusclab::SplitMix64 rng(0x71790000ULL + t);
  const std::size_t size = static_cast<std::size_t>(t) * 5;
  if (t % 8 == 3) return Bytes(size, 0);
  Bytes data;
  for (std::size_t k = 0; k < size; ++k) data.push_back(rng.next() & 0xFF);
  if (t % 8 == 7) std::fill(data.end() - std::min<std::size_t>(size, 8), data.end(), 0);
  return data;
}

inline std::map<Key, Bytes> corpus() {
  std::map<Key, Bytes> files;
  for (int i = 0; i < kBaseCount; ++i) {
    Bytes b = base_file(i);
    files[{"mut", i}] = mutant_file(i, b);
    files[{"half", i}] = Bytes(b.begin(), b.begin() + b.size() / 2);
    files[{"base", i}] = std::move(b);
  }
  for (int t = 0; t < kTinyCount; ++t) files[{"tiny", t}] = tiny_file(t);
  return files;
}

struct SignatureVector {
  Key key;
  std::size_t size;
  std::string signature;
};

struct ScoreVector {
  Key a;
  Key b;
  int score;
};

struct Vectors {
  std::vector<SignatureVector> signatures;
  std::vector<ScoreVector> scores;
};

inline Vectors load_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Vectors v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "sig") {
      SignatureVector s;
      ss >> s.key.first >> s.key.second >> s.size >> s.signature;
      v.signatures.push_back(std::move(s));
    } else if (tag == "cmp") {
      ScoreVector s;
      ss >> s.a.first >> s.a.second >> s.b.first >> s.b.second >> s.score;
      v.scores.push_back(std::move(s));
    }
  }
  return v;
}

}  // namespace golden
