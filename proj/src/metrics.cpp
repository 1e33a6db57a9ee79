#include "obfusclab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <map>
#include <regex>

#include "obfusclab/ctph.hpp"

namespace obfusclab::metrics {

using boost::multiprecision::cpp_int;

std::size_t technique_index(Technique t) noexcept {
  for (std::size_t i = 0; i < kTechniqueCount; ++i) {
    if (transforms::kAllTechniques[i] == t) return i;
  }
  return 0;
}

Rational change_constant_exact(const Rational& similarity, std::uint64_t changes) {
  if (changes == 0) throw UndefinedInput("change constant is undefined for zero changes");
  if (similarity < 0 || similarity > 100) throw RangeViolation("similarity must lie in [0, 100]");
  return (Rational(100) - similarity) / (Rational(changes) * 100);
}

double change_constant(double similarity, std::uint64_t changes) {
  return to_double(change_constant_exact(Rational(similarity), changes));
}

Rational similarity_from_constant_exact(const Rational& constant, std::uint64_t changes) {
  if (changes == 0) throw UndefinedInput("similarity is undefined for zero changes");
  const Rational s = Rational(100) - constant * changes * 100;
  if (s < 0 || s > 100) throw RangeViolation("constant and change count give a similarity outside [0, 100]");
  return s;
}

double similarity_from_constant(double constant, std::uint64_t changes) {
  return to_double(similarity_from_constant_exact(Rational(constant), changes));
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

Rational ChangeConstantRecord::constant() const { return change_constant_exact(similarity, change_count); }

namespace {

struct Accumulator {
  std::array<Rational, kTechniqueCount> sum;
  std::array<std::size_t, kTechniqueCount> count{};

  TechniqueMeans means() const {
    TechniqueMeans out;
    for (std::size_t i = 0; i < kTechniqueCount; ++i) {
      if (count[i]) out[i] = sum[i] / count[i];
    }
    return out;
  }
};

TechniqueMeans mean_of(const std::vector<TechniqueMeans>& rows) {
  Accumulator acc;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < kTechniqueCount; ++i) {
      if (!row[i]) continue;
      acc.sum[i] += *row[i];
      ++acc.count[i];
    }
  }
  return acc.means();
}

std::vector<GroupMeans> group_means(const std::vector<ChangeConstantRecord>& records,
                                    const std::set<std::string>& exclude) {
  std::vector<std::string> order;
  std::map<std::string, Accumulator> acc;
  for (const auto& r : records) {
    if (r.change_count == 0 || exclude.count(r.payload)) continue;
    if (!acc.count(r.group)) order.push_back(r.group);
    auto& a = acc[r.group];
    const auto i = technique_index(r.technique);
    a.sum[i] += r.constant();
    ++a.count[i];
  }
  std::vector<GroupMeans> out;
  for (const auto& g : order) out.push_back({g, acc[g].means()});
  return out;
}

TechniqueMeans total_of(const std::vector<GroupMeans>& groups) {
  std::vector<TechniqueMeans> rows;
  for (const auto& g : groups) rows.push_back(g.means);
  return mean_of(rows);
}

}  // namespace

AggregateReport aggregate(const std::vector<ChangeConstantRecord>& records, const std::set<std::string>& exclude) {
  AggregateReport report;
  report.groups = group_means(records, {});
  report.total = total_of(report.groups);
  if (!exclude.empty()) {
    report.excluded = exclude;
    report.filtered = total_of(group_means(records, exclude));
  }
  return report;
}

std::optional<Rational> mean_similarity(const std::vector<ChangeConstantRecord>& records, Technique t) {
  Rational sum;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.technique != t) continue;
    sum += r.similarity;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

SimilarityMatrix build_similarity_matrix(const std::vector<CorpusSample>& corpus) {
  SimilarityMatrix out;
  for (const auto& sample : corpus) {
    if (!sample.control) {
      out.errors.push_back({sample.name, "missing control listing"});
      continue;
    }
    const auto base = ctph::fuzzy_hash(*sample.control);
    for (const auto& [technique, bytes] : sample.variants) {
      const int score = ctph::fuzzy_compare(base, ctph::fuzzy_hash(bytes));
      out.records.push_back(
          {sample.name, sample.name + "_" + std::string(transforms::technique_tag(technique)), technique, score});
    }
  }
  std::stable_sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
    if (a.base_name != b.base_name) return a.base_name < b.base_name;
    return technique_index(a.technique) < technique_index(b.technique);
  });
  return out;
}

std::string format_similarity_line(const SimilarityRecord& r, const ReportStyle& style) {
  const std::string sep = style.double_separator ? "//" : "/";
  const std::string prefix = style.directory.empty() ? "" : style.directory + sep;
  return prefix + r.base_name + style.extension + " matches " + prefix + r.variant_name + style.extension + " (" +
         std::to_string(r.score) + ")";
}

std::string similarity_report(const std::vector<SimilarityRecord>& records, const ReportStyle& style) {
  std::string out;
  for (const auto& r : records) out += format_similarity_line(r, style) + "\n";
  return out;
}

std::optional<ParsedSimilarityLine> parse_similarity_line(std::string_view line) {
  static const std::regex re(R"(^(\S+) matches (\S+) \((\d{1,3})\)$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(line.begin(), line.end(), m, re)) return std::nullopt;
  ParsedSimilarityLine out{m[1].str(), m[2].str(), std::stoi(m[3].str())};
  if (out.score > 100) return std::nullopt;
  return out;
}

std::string format_constant(const Rational& c) {
  const bool negative = c < 0;
  const Rational a = negative ? Rational(-c) : c;
  const cpp_int scale = 1'000'000'000;
  const cpp_int num = boost::multiprecision::numerator(a) * scale;
  const cpp_int den = boost::multiprecision::denominator(a);
  const cpp_int q = (num * 2 + den) / (den * 2);
  std::string whole = cpp_int(q / scale).str();
  std::string frac = cpp_int(q % scale).str();
  frac.insert(0, 9 - frac.size(), '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = (negative && q != 0 ? "-" : "") + whole;
  if (!frac.empty()) out += "." + frac;
  return out;
}

std::string constants_csv(const std::vector<ChangeConstantRecord>& records) {
  std::string out = "group,payload,technique,lines,changes,similarity,constant\n";
  for (const auto& r : records) {
    out += r.group + "," + r.payload + "," + std::string(transforms::technique_tag(r.technique)) + "," +
           std::to_string(r.line_count) + "," + std::to_string(r.change_count) + "," + std::to_string(r.similarity) +
           "," + (r.change_count ? format_constant(r.constant()) : "-") + "\n";
  }
  return out;
}

namespace {

std::string means_row(const std::string& label, const TechniqueMeans& m) {
  std::string out = label;
  for (const auto& v : m) out += "," + (v ? format_constant(*v) : std::string("-"));
  return out + "\n";
}

}  // namespace

std::string aggregate_csv(const AggregateReport& report) {
  std::string out = "row,dead,ins,reg,mix\n";
  for (const auto& g : report.groups) out += means_row(g.group, g.means);
  if (report.empty()) return out;
  out += means_row("total", report.total);
  if (report.filtered) out += means_row("filtered", *report.filtered);
  return out;
}

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

bool parse_unsigned(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<DetectionEntry> parse_detection_db(std::string_view text) {
  std::vector<DetectionEntry> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const auto c1 = line.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw FormatError(line_no, "expected <sha1>:<detected>-<total>:<link>");
    DetectionEntry e;
    e.sha1 = std::string(line.substr(0, c1));
    if (!is_sha1_hex(e.sha1)) throw FormatError(line_no, "digest must be 40 lowercase hex characters");
    const auto ratio = line.substr(c1 + 1, c2 - c1 - 1);
    const auto dash = ratio.find('-');
    if (dash == std::string_view::npos || !parse_unsigned(ratio.substr(0, dash), e.detected) ||
        !parse_unsigned(ratio.substr(dash + 1), e.total) || e.detected > e.total) {
      throw FormatError(line_no, "detection ratio must be <detected>-<total>");
    }
    e.link = std::string(line.substr(c2 + 1));
    if (e.link.empty()) throw FormatError(line_no, "missing link");
    out.push_back(std::move(e));
  }
  return out;
}

std::string emit_detection_db(const std::vector<DetectionEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.sha1 + ":" + std::to_string(e.detected) + "-" + std::to_string(e.total) + ":" + e.link + "\n";
  }
  return out;
}

std::string format_timestamp(std::int64_t epoch_seconds, bool iso_time) {
  const std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, iso_time ? "%Y-%m-%d %H:%M:%S" : "%Y-%d-%m %H:%M:%S", &tm);
  return buf;
}

std::string crosscheck_hashes(const std::vector<Sha1Record>& list, const std::vector<DetectionEntry>& db,
                              const CrosscheckOptions& options) {
  std::map<std::string, const DetectionEntry*> index;
  for (const auto& e : db) index.emplace(e.sha1, &e);
  const auto when = format_timestamp(options.timestamp, options.iso_time);
  std::string out;
  for (const auto& r : list) {
    const auto it = index.find(r.digest);
    if (it == index.end()) continue;
    const auto& e = *it->second;
    out += r.digest + ", " + r.name + ", " + std::to_string(e.detected) + "-" + std::to_string(e.total) + " " + when +
           ", " + e.link + "\n";
  }
  return out;
}

bool is_crosscheck_line(std::string_view line) {
  static const std::regex re(R"(^[0-9a-f]{40}, [^,]+, \d+-\d+ \d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}, \S+$)");
  return std::regex_match(line.begin(), line.end(), re);
}

}  // namespace obfusclab::metrics
