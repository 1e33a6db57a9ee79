#pragma once

// Subcommands of the obfusclab tool. Each returns the process exit status;
// the executable in tools/ only parses arguments and forwards here.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "obfusclab/transforms.hpp"

namespace obfusclab::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitOutput = 3;

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr std::string_view kListingExtension = ".asm";

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

// Prints the ssdeep-style header and `<sig>,"<file>"`.
int cmd_hash(const fs::path& file, Streams io);
// Prints the integer score of the two files' fuzzy signatures.
int cmd_compare(const fs::path& a, const fs::path& b, Streams io);

// Where the change log for a transformed listing goes: `x.asm` -> `x.changes.csv`.
fs::path changes_path(const fs::path& output);

// Writes the rewritten listing and its change log, prints change_count.
int cmd_transform(const fs::path& input, transforms::Technique technique, std::uint64_t seed,
                  const fs::path& output, Streams io);

struct BatchOptions {
  std::uint64_t seed = 0;
  std::optional<fs::path> report_dir;  // defaults to <root>/reports
  bool compat_report = false;          // `dir//name` separators
  std::int64_t timestamp = 0;          // recorded in the manifest
};

// Sample folders are the subdirectories <root>/<name> holding <name>.asm.
// Writes the four variants (and their change logs) next to each control,
// then hashes.txt, similarity.txt, constants.csv, aggregate.csv and
// manifest.json into the report directory.
int cmd_batch(const fs::path& root, const BatchOptions& options, Streams io);

struct CrosscheckCliOptions {
  std::int64_t timestamp = 0;
  bool iso_time = false;
};

int cmd_crosscheck(const fs::path& hashes, const fs::path& db, const fs::path& results,
                   const CrosscheckCliOptions& options, Streams io);

// Creates <root>/sample_NNNN/sample_NNNN.asm for N synthetic listings of
// `lines` instructions each.
int cmd_gen(const fs::path& root, std::size_t count, std::size_t lines, std::uint64_t seed, Streams io);

// Seed used for one sample in a batch run.
std::uint64_t sample_seed(std::uint64_t seed, std::string_view sample_name);

// SOURCE_DATE_EPOCH when set and numeric, else 0.
std::int64_t default_timestamp();

}  // namespace obfusclab::cli
