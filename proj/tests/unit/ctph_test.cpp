#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "obfusclab/ctph.hpp"
#include "obfusclab/rng.hpp"
#include "obfusclab/sha1.hpp"
#include "support/golden_corpus.hpp"

using namespace obfusclab;
using namespace obfusclab::ctph;

namespace {

std::vector<std::uint8_t> random_bytes(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = rng.next() & 0xFF;
  return out;
}

}  // namespace

TEST(RollingState, ZeroByteKeepsZero) {
  RollingState s;
  EXPECT_EQ(s.update(0), 0u);
}

TEST(RollingState, SingleByteHandEvaluated) {
  RollingState s;
  EXPECT_EQ(s.update(1), 9u);
  EXPECT_EQ(s.h1(), 1u);
  EXPECT_EQ(s.h2(), 7u);
  EXPECT_EQ(s.h3(), 1u);
}

TEST(RollingState, SteadyWindowKeepsH1) {
  RollingState s;
  for (int i = 0; i < 7; ++i) s.update(0x41);
  const auto h1 = s.h1();
  s.update(0x41);
  EXPECT_EQ(s.h1(), h1);
}

TEST(RollingState, WindowHoldsLastSevenBytes) {
  RollingState s;
  for (char c : std::string("abc")) s.update(static_cast<std::uint8_t>(c));
  EXPECT_EQ(s.window(), "abc");
  for (char c : std::string("defghij")) s.update(static_cast<std::uint8_t>(c));
  EXPECT_EQ(s.window(), "defghij");
  EXPECT_EQ(s.consumed(), 10u);
}

TEST(RollingState, H1H2DependOnlyOnWindow) {
  RollingState a;
  RollingState b;
  for (char c : std::string("xxxxxxxxxxxx")) a.update(static_cast<std::uint8_t>(c));
  for (char c : std::string("yy")) b.update(static_cast<std::uint8_t>(c));
  for (char c : std::string("1234567")) {
    a.update(static_cast<std::uint8_t>(c));
    b.update(static_cast<std::uint8_t>(c));
  }
  EXPECT_EQ(a.h1(), b.h1());
  EXPECT_EQ(a.h2(), b.h2());
}

TEST(FuzzyHash, EmptyInput) {
  const auto sig = fuzzy_hash(std::string_view{});
  EXPECT_EQ(sig.block_size, 3u);
  EXPECT_EQ(sig.digest_primary, "");
  EXPECT_EQ(sig.digest_secondary, "");
  EXPECT_EQ(sig.to_string(), "3::");
}

TEST(FuzzyHash, Deterministic) {
  const auto data = random_bytes(7, 50000);
  EXPECT_EQ(fuzzy_hash(data), fuzzy_hash(data));
}

TEST(FuzzyHash, SignatureInvariants) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto data = random_bytes(seed, 37 * seed * seed + 11);
    const auto sig = fuzzy_hash(data);
    auto k = sig.block_size / kMinBlockSize;
    EXPECT_EQ(sig.block_size % kMinBlockSize, 0u);
    EXPECT_EQ(k & (k - 1), 0u);
    EXPECT_LE(sig.digest_primary.size(), kDigestLength);
    EXPECT_LE(sig.digest_secondary.size(), kSecondaryLength);
    for (char c : sig.digest_primary + sig.digest_secondary) {
      EXPECT_NE(kBase64Alphabet.find(c), std::string_view::npos);
    }
  }
}

TEST(FuzzyHash, GoldenSignatures) {
  const auto files = golden::corpus();
  const auto vectors = golden::load_vectors(OBFUSCLAB_TEST_DATA "/ctph_golden.txt");
  ASSERT_EQ(vectors.signatures.size(), files.size());
  for (const auto& v : vectors.signatures) {
    const auto& data = files.at(v.key);
    ASSERT_EQ(data.size(), v.size) << v.key.first << ' ' << v.key.second;
    EXPECT_EQ(fuzzy_hash(data).to_string(), v.signature) << v.key.first << ' ' << v.key.second;
  }
}

TEST(FuzzyCompare, GoldenScores) {
  const auto vectors = golden::load_vectors(OBFUSCLAB_TEST_DATA "/ctph_golden.txt");
  std::map<golden::Key, FuzzySignature> sigs;
  for (const auto& v : vectors.signatures) sigs[v.key] = parse_signature(v.signature);
  ASSERT_GE(vectors.scores.size(), 100u);
  for (const auto& s : vectors.scores) {
    EXPECT_EQ(fuzzy_compare(sigs.at(s.a), sigs.at(s.b)), s.score)
        << s.a.first << s.a.second << " vs " << s.b.first << s.b.second;
  }
}

TEST(FuzzyCompare, SelfIsHundred) {
  const auto sig = fuzzy_hash(random_bytes(3, 8192));
  EXPECT_EQ(fuzzy_compare(sig, sig), 100);
}

TEST(FuzzyCompare, EmptySignaturesScoreZero) {
  const auto sig = fuzzy_hash(std::string_view{});
  EXPECT_EQ(fuzzy_compare(sig, sig), 0);
}

TEST(FuzzyCompare, IncompatibleBlockSizes) {
  FuzzySignature a{3, "ABCDEFGHIJ", "ABCDEFGHIJ", {}};
  FuzzySignature b{24, "ABCDEFGHIJ", "ABCDEFGHIJ", {}};
  EXPECT_EQ(fuzzy_compare(a, b), 0);
}

TEST(FuzzyCompare, SymmetricAndBounded) {
  std::vector<FuzzySignature> sigs;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    auto data = random_bytes(seed % 4, 20000 + 3000 * (seed % 3));
    SplitMix64 rng(seed + 100);
    for (int k = 0; k < 40; ++k) data[rng.below(data.size())] ^= 0x5A;
    sigs.push_back(fuzzy_hash(data));
  }
  for (const auto& a : sigs) {
    for (const auto& b : sigs) {
      const int s = fuzzy_compare(a, b);
      EXPECT_EQ(s, fuzzy_compare(b, a));
      EXPECT_GE(s, 0);
      EXPECT_LE(s, 100);
    }
  }
}

TEST(FuzzyCompare, SelfSimilarityLargeRandomInputs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sig = fuzzy_hash(random_bytes(seed, 4096 + 997 * seed));
    EXPECT_EQ(fuzzy_compare(sig, sig), 100) << sig.to_string();
  }
}

TEST(FuzzyCompare, SingleByteFlipLocality) {
  int positive = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    auto data = random_bytes(0xF11B0000 + trial, 64 * 1024);
    const auto before = fuzzy_hash(data);
    SplitMix64 rng(trial);
    data[rng.below(data.size())] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    if (fuzzy_compare(before, fuzzy_hash(data)) > 0) ++positive;
  }
  EXPECT_GE(positive, 99);
}

TEST(EliminateSequences, CollapsesLongRuns) {
  EXPECT_EQ(eliminate_sequences("AAAAAB"), "AAAB");
  EXPECT_EQ(eliminate_sequences("AAAB"), "AAAB");
  EXPECT_EQ(eliminate_sequences(""), "");
}

TEST(WeightedEditDistance, Weights) {
  EXPECT_EQ(weighted_edit_distance("", "abc"), 3);
  EXPECT_EQ(weighted_edit_distance("abc", "abc"), 0);
  EXPECT_EQ(weighted_edit_distance("abc", "abd"), 2);
  EXPECT_EQ(weighted_edit_distance("ab", "ba"), 2);
}

TEST(ParseSignature, RoundTrip) {
  const std::string text = "96:abcDEF+/:xyz,\"some file\"";
  const auto sig = parse_signature(text);
  EXPECT_EQ(sig.block_size, 96u);
  EXPECT_EQ(sig.digest_primary, "abcDEF+/");
  EXPECT_EQ(sig.digest_secondary, "xyz");
  ASSERT_TRUE(sig.source_name.has_value());
  EXPECT_EQ(*sig.source_name, "some file");
  EXPECT_EQ(sig.to_string(), text);
}

TEST(ParseSignature, RejectsMalformed) {
  EXPECT_THROW(parse_signature("96:abc"), SignatureFormatError);
  EXPECT_THROW(parse_signature("7:abc:def"), SignatureFormatError);
  EXPECT_THROW(parse_signature("x:abc:def"), SignatureFormatError);
  EXPECT_THROW(parse_signature("3:ab*:def"), SignatureFormatError);
}

TEST(Sha1, StandardVectors) {
  EXPECT_EQ(sha1_digest(std::string_view{}), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  EXPECT_EQ(sha1_digest(std::string_view{"abc"}), "a9993e364706816aba3e25717850c26c9cd0d89d");
}

TEST(HashList, RoundTrip) {
  const std::string text =
      "a9993e364706816aba3e25717850c26c9cd0d89d:sample_a\n"
      "da39a3ee5e6b4b0d3255bfef95601890afd80709:b:with:colons\n";
  const auto records = parse_hash_list(text);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].name, "b:with:colons");
  EXPECT_EQ(emit_hash_list(records), text);
}

TEST(HashList, ReportsLineNumber) {
  try {
    parse_hash_list("a9993e364706816aba3e25717850c26c9cd0d89d:ok\nnot-a-hash:x\n");
    FAIL();
  } catch (const HashListError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
