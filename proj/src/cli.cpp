#include "obfusclab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "obfusclab/asm/program.hpp"
#include "obfusclab/ctph.hpp"
#include "obfusclab/generator.hpp"
#include "obfusclab/metrics.hpp"
#include "obfusclab/rng.hpp"
#include "obfusclab/sha1.hpp"

namespace obfusclab::cli {

using transforms::Technique;

namespace {

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

bool write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  return static_cast<bool>(out);
}

std::string listing_name(std::string_view stem) { return std::string(stem) + std::string(kListingExtension); }

std::string variant_stem(const std::string& sample, Technique t) {
  return sample + "_" + std::string(transforms::technique_tag(t));
}

}  // namespace

int cmd_hash(const fs::path& file, Streams io) {
  const auto data = read_file(file);
  if (!data) {
    io.err << "cannot read " << file.generic_string() << "\n";
    return kExitInput;
  }
  auto sig = ctph::fuzzy_hash(*data);
  sig.source_name = file.generic_string();
  io.out << ctph::kSignatureFileHeader << "\n" << sig.to_string() << "\n";
  return kExitOk;
}

int cmd_compare(const fs::path& a, const fs::path& b, Streams io) {
  const auto da = read_file(a);
  const auto db = read_file(b);
  if (!da || !db) {
    io.err << "cannot read " << (da ? b : a).generic_string() << "\n";
    return kExitInput;
  }
  io.out << ctph::fuzzy_compare(ctph::fuzzy_hash(*da), ctph::fuzzy_hash(*db)) << "\n";
  return kExitOk;
}

fs::path changes_path(const fs::path& output) {
  fs::path p = output;
  p.replace_extension(".changes.csv");
  return p;
}

int cmd_transform(const fs::path& input, Technique technique, std::uint64_t seed, const fs::path& output,
                  Streams io) {
  const auto text = read_file(input);
  if (!text) {
    io.err << "cannot read " << input.generic_string() << "\n";
    return kExitInput;
  }
  asm_core::Program program;
  try {
    program = asm_core::parse_listing(*text, input.filename().string());
  } catch (const asm_core::ParseError& e) {
    io.err << input.generic_string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  transforms::TransformConfig cfg;
  cfg.seed = seed;
  const auto result = transforms::apply(technique, program, cfg);
  if (!write_file(output, asm_core::emit_listing(result.program)) ||
      !write_file(changes_path(output), transforms::to_csv(result.log))) {
    io.err << "cannot write " << output.generic_string() << "\n";
    return kExitOutput;
  }
  io.out << result.change_count << "\n";
  return kExitOk;
}

std::uint64_t sample_seed(std::uint64_t seed, std::string_view sample_name) {
  return derive_seed(seed, fnv1a64(sample_name));
}

std::int64_t default_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (!env) return 0;
  std::int64_t v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size() ? v : 0;
}

namespace {

struct SampleOutcome {
  std::string name;
  std::size_t lines = 0;
  std::string control_text;
  std::vector<std::pair<Technique, std::string>> variants;
  std::array<std::size_t, metrics::kTechniqueCount> changes{};
};

bool same_path(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

}  // namespace

int cmd_batch(const fs::path& root, const BatchOptions& options, Streams io) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    io.err << "corpus root " << root.generic_string() << " is not a directory\n";
    return kExitInput;
  }
  const fs::path report_dir = options.report_dir.value_or(root / "reports");

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (!entry.is_directory() || same_path(entry.path(), report_dir)) continue;
    names.push_back(entry.path().filename().string());
  }
  if (ec) {
    io.err << "cannot list " << root.generic_string() << ": " << ec.message() << "\n";
    return kExitInput;
  }
  std::sort(names.begin(), names.end());

  std::vector<SampleOutcome> samples;
  std::vector<metrics::SampleError> errors;
  for (const auto& name : names) {
    const fs::path dir = root / name;
    const auto text = read_file(dir / listing_name(name));
    if (!text) {
      errors.push_back({name, "missing control listing " + listing_name(name)});
      continue;
    }
    asm_core::Program program;
    try {
      program = asm_core::parse_listing(*text, listing_name(name));
    } catch (const asm_core::ParseError& e) {
      errors.push_back({name, e.what()});
      continue;
    }

    SampleOutcome s;
    s.name = name;
    s.lines = asm_core::instruction_line_count(program);
    s.control_text = *text;
    const auto base_seed = sample_seed(options.seed, name);
    for (auto t : transforms::kAllTechniques) {
      transforms::TransformConfig cfg;
      cfg.seed = derive_seed(base_seed, metrics::technique_index(t) + 1);
      const auto result = transforms::apply(t, program, cfg);
      const fs::path out = dir / listing_name(variant_stem(name, t));
      auto emitted = asm_core::emit_listing(result.program);
      if (!write_file(out, emitted) || !write_file(changes_path(out), transforms::to_csv(result.log))) {
        io.err << "cannot write " << out.generic_string() << "\n";
        return kExitOutput;
      }
      s.changes[metrics::technique_index(t)] = result.change_count;
      s.variants.push_back({t, std::move(emitted)});
    }
    samples.push_back(std::move(s));
  }
  for (const auto& e : errors) io.err << "skipped " << e.sample << ": " << e.message << "\n";

  std::vector<metrics::CorpusSample> corpus;
  std::vector<Sha1Record> hashes;
  for (const auto& s : samples) {
    corpus.push_back({s.name, s.control_text, s.variants});
    hashes.push_back({sha1_digest(s.control_text), listing_name(s.name)});
    for (const auto& [t, text] : s.variants) hashes.push_back({sha1_digest(text), listing_name(variant_stem(s.name, t))});
  }
  const auto matrix = metrics::build_similarity_matrix(corpus);

  std::string report;
  for (const auto& r : matrix.records) {
    metrics::ReportStyle style;
    style.directory = r.base_name;
    style.extension = std::string(kListingExtension);
    style.double_separator = options.compat_report;
    report += metrics::format_similarity_line(r, style) + "\n";
  }

  std::vector<metrics::ChangeConstantRecord> records;
  std::map<std::string, const SampleOutcome*> by_name;
  for (const auto& s : samples) by_name[s.name] = &s;
  for (const auto& r : matrix.records) {
    const auto& s = *by_name.at(r.base_name);
    metrics::ChangeConstantRecord c;
    c.group = "corpus";
    c.payload = s.name;
    c.technique = r.technique;
    c.line_count = s.lines;
    c.change_count = s.changes[metrics::technique_index(r.technique)];
    c.similarity = r.score;
    records.push_back(std::move(c));
  }

  nlohmann::json manifest;
  manifest["tool"] = "obfusclab";
  manifest["version"] = kToolVersion;
  manifest["seed"] = options.seed;
  manifest["corpus_root"] = root.filename().generic_string().empty() ? root.parent_path().filename().generic_string()
                                                                      : root.filename().generic_string();
  manifest["timestamp"] = metrics::format_timestamp(options.timestamp, true);
  manifest["samples"] = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json entry;
    entry["name"] = s.name;
    entry["seed"] = sample_seed(options.seed, s.name);
    entry["lines"] = s.lines;
    for (auto t : transforms::kAllTechniques) {
      entry["changes"][std::string(transforms::technique_tag(t))] = s.changes[metrics::technique_index(t)];
    }
    manifest["samples"].push_back(std::move(entry));
  }
  manifest["errors"] = nlohmann::json::array();
  for (const auto& e : errors) manifest["errors"].push_back({{"sample", e.sample}, {"message", e.message}});

  fs::create_directories(report_dir, ec);
  const std::pair<const char*, std::string> files[] = {
      {"hashes.txt", emit_hash_list(hashes)},
      {"similarity.txt", report},
      {"constants.csv", metrics::constants_csv(records)},
      {"aggregate.csv", metrics::aggregate_csv(metrics::aggregate(records))},
      {"manifest.json", manifest.dump(2) + "\n"},
  };
  for (const auto& [file, content] : files) {
    if (!write_file(report_dir / file, content)) {
      io.err << "cannot write " << (report_dir / file).generic_string() << "\n";
      return kExitOutput;
    }
  }
  io.out << samples.size() << " samples, " << matrix.records.size() << " comparisons, " << errors.size()
         << " skipped\n";
  return kExitOk;
}

int cmd_crosscheck(const fs::path& hashes, const fs::path& db, const fs::path& results,
                   const CrosscheckCliOptions& options, Streams io) {
  const auto list_text = read_file(hashes);
  const auto db_text = read_file(db);
  if (!list_text || !db_text) {
    io.err << "cannot read " << (list_text ? db : hashes).generic_string() << "\n";
    return kExitInput;
  }
  std::vector<Sha1Record> list;
  std::vector<metrics::DetectionEntry> entries;
  try {
    list = parse_hash_list(*list_text);
  } catch (const HashListError& e) {
    io.err << hashes.generic_string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  try {
    entries = metrics::parse_detection_db(*db_text);
  } catch (const metrics::FormatError& e) {
    io.err << db.generic_string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  metrics::CrosscheckOptions opt;
  opt.timestamp = options.timestamp;
  opt.iso_time = options.iso_time;
  const auto out = metrics::crosscheck_hashes(list, entries, opt);
  if (!write_file(results, out)) {
    io.err << "cannot write " << results.generic_string() << "\n";
    return kExitOutput;
  }
  io.out << std::count(out.begin(), out.end(), '\n') << " of " << list.size() << " hashes found\n";
  return kExitOk;
}

int cmd_gen(const fs::path& root, std::size_t count, std::size_t lines, std::uint64_t seed, Streams io) {
  std::error_code ec;
  for (std::size_t i = 0; i < count; ++i) {
    std::ostringstream name;
    name << "sample_" << std::setw(4) << std::setfill('0') << i;
    const fs::path dir = root / name.str();
    fs::create_directories(dir, ec);
    GeneratorOptions opt;
    opt.instructions = lines;
    if (ec || !write_file(dir / listing_name(name.str()), generate_listing(derive_seed(seed, i), opt))) {
      io.err << "cannot write " << dir.generic_string() << "\n";
      return kExitOutput;
    }
  }
  io.out << count << " listings written to " << root.generic_string() << "\n";
  return kExitOk;
}

}  // namespace obfusclab::cli
