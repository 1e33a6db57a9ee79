#include <iostream>

#include <CLI11.hpp>

#include "obfusclab/cli.hpp"

namespace cli = obfusclab::cli;
namespace transforms = obfusclab::transforms;

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy hashing and listing obfuscation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolVersion));

  std::string path_a, path_b, path_c;
  std::uint64_t seed = 0;

  auto* hash = app.add_subcommand("hash", "Print the fuzzy signature of a file");
  hash->add_option("file", path_a)->required();

  auto* compare = app.add_subcommand("compare", "Print the similarity score of two files");
  compare->add_option("a", path_a)->required();
  compare->add_option("b", path_b)->required();

  std::string technique_text;
  auto* transform = app.add_subcommand("transform", "Rewrite one listing");
  transform->add_option("--technique", technique_text, "dead, reg, ins or mix")
      ->required()
      ->check(CLI::IsMember({"dead", "reg", "ins", "mix", "mixed"}));
  transform->add_option("--seed", seed)->required();
  transform->add_option("input", path_a)->required();
  transform->add_option("output", path_b)->required();

  cli::BatchOptions batch_opt;
  batch_opt.timestamp = cli::default_timestamp();
  std::string report_dir;
  auto* batch = app.add_subcommand("batch", "Transform, hash and compare every sample of a corpus");
  batch->add_option("--seed", batch_opt.seed)->required();
  batch->add_option("--reports", report_dir, "Report directory (default <root>/reports)");
  batch->add_flag("--compat-report", batch_opt.compat_report, "Write dir//name paths in the similarity report");
  batch->add_option("--time", batch_opt.timestamp, "Manifest timestamp, seconds since the epoch");
  batch->add_option("root", path_a)->required();

  cli::CrosscheckCliOptions cross_opt;
  cross_opt.timestamp = cli::default_timestamp();
  auto* crosscheck = app.add_subcommand("crosscheck", "Look up listed SHA-1 digests in a local detection database");
  crosscheck->add_option("hashes", path_a)->required();
  crosscheck->add_option("db", path_b)->required();
  crosscheck->add_option("out", path_c)->required();
  crosscheck->add_option("--time", cross_opt.timestamp, "Result timestamp, seconds since the epoch");
  crosscheck->add_flag("--iso-time", cross_opt.iso_time, "Write dates as YYYY-MM-DD");

  std::size_t count = 0, lines = 50;
  auto* gen = app.add_subcommand("gen", "Write synthetic straight-line listings");
  gen->add_option("--count", count)->required();
  gen->add_option("--lines", lines)->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed)->required();
  gen->add_option("root", path_a)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitInput;
  }

  const cli::Streams io{std::cout, std::cerr};
  try {
    if (*hash) return cli::cmd_hash(path_a, io);
    if (*compare) return cli::cmd_compare(path_a, path_b, io);
    if (*transform) return cli::cmd_transform(path_a, *transforms::parse_technique(technique_text), seed, path_b, io);
    if (*batch) {
      if (!report_dir.empty()) batch_opt.report_dir = report_dir;
      return cli::cmd_batch(path_a, batch_opt, io);
    }
    if (*crosscheck) return cli::cmd_crosscheck(path_a, path_b, path_c, cross_opt, io);
    if (*gen) return cli::cmd_gen(path_a, count, lines, seed, io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInput;
  }
  return cli::kExitInput;
}
