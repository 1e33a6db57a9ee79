#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "obfusclab/asm/instruction_info.hpp"
#include "obfusclab/generator.hpp"
#include "obfusclab/semcheck.hpp"
#include "obfusclab/transforms.hpp"

using namespace obfusclab;
using namespace obfusclab::transforms;
using asm_core::LineKind;
using asm_core::parse_listing;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program listing(std::initializer_list<std::string_view> lines) {
  std::string text;
  for (auto l : lines) {
    text += l;
    text += '\n';
  }
  return parse_listing(text, "t");
}

std::vector<std::string> instruction_texts(const Program& p) {
  std::vector<std::string> out;
  for (const auto& line : p.lines) {
    if (line.kind == LineKind::Instruction) out.push_back(asm_core::format_instruction(*line.instruction));
  }
  return out;
}

std::vector<std::string> data_lines(const Program& p) {
  std::vector<std::string> out;
  for (const auto& line : p.lines) {
    if (line.kind == LineKind::Data) out.push_back(line.raw_text);
  }
  return out;
}

TransformConfig fixed_period(std::uint64_t seed, unsigned k) {
  TransformConfig cfg;
  cfg.seed = seed;
  cfg.insertion_period_min = k;
  cfg.insertion_period_max = k;
  return cfg;
}

Program regswap_original() {
  return parse_listing(read_file(std::string(OBFUSCLAB_TEST_DATA) + "/regswap/original.asm"), "original");
}

}  // namespace

TEST(Techniques, TagsRoundTrip) {
  for (auto t : kAllTechniques) EXPECT_EQ(parse_technique(technique_tag(t)), t);
  EXPECT_EQ(parse_technique("mixed"), Technique::Mixed);
  EXPECT_FALSE(parse_technique("swap").has_value());
}

TEST(Config, RejectsInvertedPeriod) {
  TransformConfig cfg;
  cfg.insertion_period_min = 6;
  cfg.insertion_period_max = 5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.insertion_period_min = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(DeadCode, TenInstructionsAtPeriodFiveGetTwoInsertions) {
  const auto p = listing({"mov rax, 1", "mov rbx, 2", "add rax, rbx", "xor rcx, rcx", "inc rcx", "mov rdx, rax",
                          "sub rdx, 3", "or rbx, rdx", "and rax, 0ffh", "mov rsi, rax"});
  const auto r = insert_dead_code(p, fixed_period(7, 5));
  EXPECT_EQ(r.change_count, 2u);
  ASSERT_EQ(r.log.entries.size(), 2u);
  EXPECT_EQ(r.log.entries[0].line, 5u);
  EXPECT_EQ(r.log.entries[1].line, 11u);
  EXPECT_EQ(instruction_texts(r.program).size(), 12u);
}

TEST(DeadCode, InsertionCountStaysWithinPeriodBounds) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    GeneratorOptions opt;
    opt.instructions = 20 + seed * 3;
    const auto p = parse_listing(generate_listing(seed, opt), "g");
    const auto n = asm_core::instruction_line_count(p);
    TransformConfig cfg;
    cfg.seed = seed;
    const auto r = insert_dead_code(p, cfg);
    // Closing halves of reversible pairs land on insertion points too.
    EXPECT_GE(r.change_count, n / 5) << seed;
    EXPECT_LE(r.change_count, n / 4) << seed;
  }
}

TEST(DeadCode, DataOnlyListingIsUntouched) {
  const auto p = listing({"db 0c3h, 90h", "db \"abc\", 0"});
  const auto r = insert_dead_code(p, TransformConfig{});
  EXPECT_EQ(r.change_count, 0u);
  EXPECT_EQ(asm_core::emit_listing(r.program), asm_core::emit_listing(p));
}

TEST(DeadCode, NoFlagWritesAheadOfAJump) {
  const auto p = listing({"loop_0:", "mov rax, 1", "mov rbx, 2", "mov rcx, 3", "cmp rax, rbx", "jz loop_0"});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto r = insert_dead_code(p, fixed_period(seed, 4));
    ASSERT_EQ(r.change_count, 1u);
    const auto& ins = *r.program.lines[r.log.entries[0].line].instruction;
    EXPECT_FALSE(asm_core::modifies_flags(ins)) << asm_core::format_instruction(ins);
  }
}

TEST(DeadCode, ReversiblePairWhenNoRegisterIsAdjacent) {
  const auto p = listing({"nop", "nop", "nop", "nop", "nop", "nop", "nop", "nop"});
  const auto r = insert_dead_code(p, fixed_period(3, 4));
  ASSERT_EQ(r.change_count, 2u);
  const auto texts = instruction_texts(r.program);
  const auto open = texts[4];
  const auto close = texts[9];
  EXPECT_TRUE((open == "push rax" && close == "pop rax") || (open == "inc rax" && close == "dec rax"))
      << open << " / " << close;
  EXPECT_TRUE(semcheck::equivalent(p, r.program, 50, 1).equal());
}

TEST(InstrReplace, MovZeroBecomesOneOfThreeIdioms) {
  const auto p = listing({"mov rax, 0"});
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    TransformConfig cfg;
    cfg.seed = seed;
    const auto r = replace_instructions(p, cfg);
    ASSERT_EQ(r.change_count, 1u);
    const auto texts = instruction_texts(r.program);
    ASSERT_EQ(texts.size(), 1u);
    seen.insert(texts[0]);
    EXPECT_TRUE(semcheck::equivalent(p, r.program, 20, seed).equal());
  }
  EXPECT_EQ(seen, (std::set<std::string>{"xor rax, rax", "and rax, 0", "sub rax, rax"}));
}

TEST(InstrReplace, RegisterMoveGoesThroughTheStack) {
  const auto p = listing({"mov rbx, rcx"});
  const auto r = replace_instructions(p, TransformConfig{});
  EXPECT_EQ(instruction_texts(r.program), (std::vector<std::string>{"push rcx", "pop rbx"}));
  EXPECT_EQ(r.change_count, 1u);
  EXPECT_EQ(r.log.entries[0].detail, "mov rbx, rcx -> push rcx; pop rbx");
}

TEST(InstrReplace, TestBecomesCompareWithZero) {
  const auto p = listing({"test eax, eax", "jz done", "done:"});
  const auto r = replace_instructions(p, TransformConfig{});
  EXPECT_EQ(instruction_texts(r.program)[0], "cmp eax, 0");
}

TEST(InstrReplace, FlagSensitiveRewritesWaitForDeadFlags) {
  const auto p = listing({"mov rax, 0", "jz a", "a:", "add rbx, 1", "jnz b", "b:"});
  const auto r = replace_instructions(p, TransformConfig{});
  EXPECT_EQ(r.change_count, 0u);
  const auto q = listing({"add rbx, 1", "sub rcx, 1", "mov rdx, 0"});
  const auto s = replace_instructions(q, TransformConfig{});
  EXPECT_EQ(instruction_texts(s.program)[0], "inc rbx");
  EXPECT_EQ(instruction_texts(s.program)[1], "dec rcx");
  EXPECT_EQ(s.change_count, 3u);
}

TEST(RegisterSub, KnownFragmentWithFixedCycle) {
  const auto p = regswap_original();
  const std::vector<RegFamily> cycle = {RegFamily::r14, RegFamily::r12, RegFamily::r13};
  const auto r = substitute_registers(p, TransformConfig{}, cycle);
  const std::vector<std::string> expected = {
      "xchg r13, r14", "xchg r12, r13", "pop rbp",        "mov r12, 32335f327377h", "push r12",
      "mov r12, rsp",  "sub rsp, 1a0h", "mov r14, rsp",   "mov r13, 7500a8c05c110002h",
      "push r13",      "mov r13, rsp",  "mov rcx, r12",   "xchg r12, r13",          "xchg r13, r14",
      "mov r10d, 726774ch",             "call rbp",
  };
  EXPECT_EQ(instruction_texts(r.program), expected);
  EXPECT_EQ(r.change_count, 12u);
  EXPECT_TRUE(semcheck::equivalent(p, r.program, 200, 5).equal());
}

TEST(RegisterSub, RenamesOnlyInsideRegionAndLogsBothKinds) {
  const auto p = regswap_original();
  const std::vector<RegFamily> cycle = {RegFamily::r14, RegFamily::r12, RegFamily::r13};
  const auto r = substitute_registers(p, TransformConfig{}, cycle);
  std::size_t inserted = 0, renamed = 0;
  for (const auto& e : r.log.entries) {
    inserted += e.kind == ChangeKind::Inserted;
    renamed += e.kind == ChangeKind::RegisterRenamed;
  }
  EXPECT_EQ(inserted, 4u);
  EXPECT_EQ(renamed, 8u);
}

TEST(RegisterSub, NothingToPermuteLeavesProgramAlone) {
  const auto p = listing({"push rbp", "mov rbp, rsp", "sub rsp, 20h", "mov rax, 1", "add rax, 2", "inc rax",
                          "mov rsp, rbp", "pop rbp"});
  const auto r = substitute_registers(p, TransformConfig{});
  EXPECT_EQ(r.change_count, 0u);
  EXPECT_EQ(asm_core::emit_listing(r.program), asm_core::emit_listing(p));
}

TEST(RegisterSub, ShortBlocksAreSkipped) {
  const auto p = listing({"mov rax, rbx", "add rcx, rax", "xor rbx, rcx"});
  EXPECT_EQ(substitute_registers(p, TransformConfig{}).change_count, 0u);
}

TEST(Mixed, CountsEachTouchedLineOnce) {
  ChangeLog log;
  log.entries = {{3, ChangeKind::RegisterRenamed, Technique::RegisterSub, "a"},
                 {3, ChangeKind::InstructionReplaced, Technique::InstrReplace, "b"},
                 {5, ChangeKind::Inserted, Technique::DeadCode, "c"}};
  EXPECT_EQ(count_changes(log, Technique::Mixed), 2u);
  EXPECT_THROW(count_changes(log, Technique::DeadCode), ContractViolation);
}

TEST(Mixed, LogPointsAtOutputLines) {
  const auto p = parse_listing(generate_listing(11, GeneratorOptions{}), "g");
  TransformConfig cfg;
  cfg.seed = 99;
  const auto r = apply_mixed(p, cfg);
  ASSERT_GT(r.change_count, 0u);
  std::set<Technique> techniques;
  for (const auto& e : r.log.entries) {
    ASSERT_LT(e.line, r.program.lines.size());
    const auto& line = r.program.lines[e.line];
    EXPECT_EQ(line.kind, LineKind::Instruction);
    EXPECT_TRUE(line.rewritten) << e.detail;
    techniques.insert(e.technique);
  }
  EXPECT_TRUE(techniques.count(Technique::DeadCode));
  EXPECT_TRUE(techniques.count(Technique::InstrReplace));
}

TEST(ChangeLogCsv, QuotesDetailAndNumbersFromOne) {
  ChangeLog log;
  log.entries = {{0, ChangeKind::Inserted, Technique::DeadCode, "nop"},
                 {4, ChangeKind::InstructionReplaced, Technique::InstrReplace, "say \"hi\""}};
  EXPECT_EQ(to_csv(log),
            "line,kind,technique,detail\n"
            "1,inserted,dead,\"nop\"\n"
            "5,instruction-replaced,ins,\"say \"\"hi\"\"\"\n");
}

TEST(FlagLiveness, ScansToTheNextDefinerOrReader) {
  const auto p = listing({"mov rax, 1", "inc rax", "cmp rax, 2", "jz x", "x:", "mov rbx, 1"});
  EXPECT_FALSE(flags_live_after(p.lines, 0));
  EXPECT_TRUE(flags_live_after(p.lines, 2));
  EXPECT_TRUE(flags_live_after(p.lines, 3));
  EXPECT_FALSE(flags_live_after(p.lines, 5));
}

class EveryTechnique : public ::testing::TestWithParam<Technique> {};

TEST_P(EveryTechnique, DeterministicForASeed) {
  const auto p = parse_listing(generate_listing(5, GeneratorOptions{}), "g");
  TransformConfig cfg;
  cfg.seed = 1234;
  const auto a = apply(GetParam(), p, cfg);
  const auto b = apply(GetParam(), p, cfg);
  EXPECT_EQ(asm_core::emit_listing(a.program), asm_core::emit_listing(b.program));
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.change_count, b.change_count);
}

TEST_P(EveryTechnique, DataRowsPassThrough) {
  const auto p = parse_listing(read_file(std::string(OBFUSCLAB_TEST_DATA) + "/listings/checksum.asm"), "c");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    TransformConfig cfg;
    cfg.seed = seed;
    const auto r = apply(GetParam(), p, cfg);
    EXPECT_EQ(data_lines(r.program), data_lines(p));
    const auto reparsed = parse_listing(asm_core::emit_listing(r.program), "again");
    EXPECT_EQ(reparsed.lines.size(), r.program.lines.size());
  }
}

TEST_P(EveryTechnique, PreservesStraightLineSemantics) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto p = parse_listing(generate_listing(seed, GeneratorOptions{}), "g");
    TransformConfig cfg;
    cfg.seed = derive_seed(seed, 77);
    const auto r = apply(GetParam(), p, cfg);
    const auto report = semcheck::equivalent(p, r.program, 40, seed);
    EXPECT_TRUE(report.equal()) << "seed " << seed << ": " << report.to_string();
  }
}

INSTANTIATE_TEST_SUITE_P(Transforms, EveryTechnique, ::testing::ValuesIn(kAllTechniques),
                         [](const auto& info) { return std::string(technique_tag(info.param)); });
