#include "obfusclab/rng.hpp"
#include "stage.hpp"

namespace obfusclab::transforms {

namespace detail {

namespace {

// Moves log entries of the previous stage onto the lines of `next`.
std::vector<ChangeEntry> carry_forward(const std::vector<ChangeEntry>& entries, const Stage& next) {
  std::vector<std::size_t> forward;
  for (std::size_t out = 0; out < next.origin.size(); ++out) {
    const auto from = next.origin[out];
    if (from == kNoOrigin) continue;
    if (forward.size() <= from) forward.resize(from + 1, kNoOrigin);
    // A line split in two keeps its entry on the first half.
    if (forward[from] == kNoOrigin) forward[from] = out;
  }
  std::vector<ChangeEntry> moved;
  for (auto e : entries) {
    e.line = forward.at(e.line);
    moved.push_back(std::move(e));
  }
  return moved;
}

TransformConfig stage_config(const TransformConfig& cfg, std::uint64_t salt) {
  TransformConfig c = cfg;
  c.seed = derive_seed(cfg.seed, salt);
  return c;
}

}  // namespace

}  // namespace detail

TransformResult apply_mixed(const Program& p, const TransformConfig& cfg) {
  using namespace detail;
  cfg.validate();
  Stage replaced = replace_stage(p, stage_config(cfg, 1));
  Stage swapped = register_stage(replaced.program, stage_config(cfg, 2), nullptr);
  Stage padded = dead_code_stage(swapped.program, stage_config(cfg, 3));

  std::vector<ChangeEntry> entries = carry_forward(carry_forward(replaced.entries, swapped), padded);
  for (auto& e : carry_forward(swapped.entries, padded)) entries.push_back(std::move(e));
  for (auto& e : padded.entries) entries.push_back(std::move(e));
  padded.entries = std::move(entries);
  return finish(std::move(padded), Technique::Mixed);
}

TransformResult apply(Technique t, const Program& p, const TransformConfig& cfg) {
  switch (t) {
    case Technique::DeadCode: return insert_dead_code(p, cfg);
    case Technique::RegisterSub: return substitute_registers(p, cfg);
    case Technique::InstrReplace: return replace_instructions(p, cfg);
    case Technique::Mixed: return apply_mixed(p, cfg);
  }
  throw std::invalid_argument("unknown technique");
}

}  // namespace obfusclab::transforms
