#pragma once

// Similarity matrices, the per-line change constant, grouped aggregation of
// constants, and the offline hash cross-check.

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "obfusclab/sha1.hpp"
#include "obfusclab/transforms.hpp"

namespace obfusclab::metrics {

using Rational = boost::multiprecision::cpp_rational;
using transforms::Technique;

inline constexpr std::size_t kTechniqueCount = 4;

// Position of t in transforms::kAllTechniques (dead, ins, reg, mix).
std::size_t technique_index(Technique t) noexcept;

class UndefinedInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RangeViolation : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// C = (100 - S) / (n * 100). S must lie in [0, 100]; n = 0 throws
// UndefinedInput.
Rational change_constant_exact(const Rational& similarity, std::uint64_t changes);
double change_constant(double similarity, std::uint64_t changes);

// S = 100 - C * n * 100; throws RangeViolation when S would leave [0, 100].
Rational similarity_from_constant_exact(const Rational& constant, std::uint64_t changes);
double similarity_from_constant(double constant, std::uint64_t changes);

double to_double(const Rational& r);

struct SimilarityRecord {
  std::string base_name;
  std::string variant_name;
  Technique technique = Technique::DeadCode;
  int score = 0;

  friend bool operator==(const SimilarityRecord&, const SimilarityRecord&) = default;
};

struct ChangeConstantRecord {
  std::string group;
  std::string payload;
  Technique technique = Technique::DeadCode;
  std::size_t line_count = 0;
  std::size_t change_count = 0;
  int similarity = 0;

  // Throws UndefinedInput when change_count is 0.
  Rational constant() const;
};

using TechniqueMeans = std::array<std::optional<Rational>, kTechniqueCount>;

struct GroupMeans {
  std::string group;
  TechniqueMeans means;
};

struct AggregateReport {
  std::vector<GroupMeans> groups;  // in order of first appearance
  TechniqueMeans total;            // mean of the group means
  std::set<std::string> excluded;  // payload labels left out of `filtered`
  std::optional<TechniqueMeans> filtered;

  bool empty() const noexcept { return groups.empty(); }
};

// Records with change_count 0 are skipped. A technique with no records in a
// group has no mean there and is left out of the total. When `exclude` is
// non-empty, `filtered` repeats the computation without those payloads.
AggregateReport aggregate(const std::vector<ChangeConstantRecord>& records,
                          const std::set<std::string>& exclude = {});

// Flat arithmetic mean of the similarity scores recorded for t.
std::optional<Rational> mean_similarity(const std::vector<ChangeConstantRecord>& records, Technique t);

struct CorpusSample {
  std::string name;
  std::optional<std::string> control;  // bytes of the control listing
  std::vector<std::pair<Technique, std::string>> variants;
};

struct SampleError {
  std::string sample;
  std::string message;
};

struct SimilarityMatrix {
  std::vector<SimilarityRecord> records;  // sorted by (base_name, technique)
  std::vector<SampleError> errors;
};

// Variant names are `<name>_<tag>`. Samples without a control are reported
// in `errors` and skipped.
SimilarityMatrix build_similarity_matrix(const std::vector<CorpusSample>& corpus);

struct ReportStyle {
  std::string directory = "asm";
  std::string extension = ".asm";
  // Writes `dir//name` as the original ssdeep report did.
  bool double_separator = false;
};

// `<dir>/<base><ext> matches <dir>/<variant><ext> (<score>)`
std::string format_similarity_line(const SimilarityRecord& r, const ReportStyle& style);
std::string similarity_report(const std::vector<SimilarityRecord>& records, const ReportStyle& style);

struct ParsedSimilarityLine {
  std::string base_path;
  std::string variant_path;
  int score = 0;
};

std::optional<ParsedSimilarityLine> parse_similarity_line(std::string_view line);

// Decimal text with 9 fractional digits, trailing zeros trimmed.
std::string format_constant(const Rational& c);

// `group,payload,technique,lines,changes,similarity,constant`
std::string constants_csv(const std::vector<ChangeConstantRecord>& records);
// `row,dead,ins,reg,mix`: one row per group mean, then "total" and, when
// present, "filtered". Missing means are written as "-".
std::string aggregate_csv(const AggregateReport& report);

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct DetectionEntry {
  std::string sha1;
  unsigned detected = 0;
  unsigned total = 0;
  std::string link;
};

// One `<sha1>:<detected>-<total>:<link>` per line; blank lines skipped.
std::vector<DetectionEntry> parse_detection_db(std::string_view text);
std::string emit_detection_db(const std::vector<DetectionEntry>& entries);

struct CrosscheckOptions {
  std::int64_t timestamp = 0;  // seconds since the epoch, UTC
  bool iso_time = false;       // YYYY-MM-DD instead of YYYY-DD-MM
};

std::string format_timestamp(std::int64_t epoch_seconds, bool iso_time);

// One `<sha1>, <name>, <detected>-<total> <time>, <link>` line per listed
// hash found in db, in list order. Hashes absent from db produce nothing.
std::string crosscheck_hashes(const std::vector<Sha1Record>& list, const std::vector<DetectionEntry>& db,
                              const CrosscheckOptions& options);

// Checks a line against the cross-check log grammar (either date order).
bool is_crosscheck_line(std::string_view line);

}  // namespace obfusclab::metrics
