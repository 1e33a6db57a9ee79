#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "obfusclab/semcheck.hpp"

using namespace obfusclab;
using namespace obfusclab::semcheck;
using asm_core::parse_instruction;
using asm_core::parse_listing;
using asm_core::RegFamily;

namespace {

std::vector<Instruction> code(std::initializer_list<std::string_view> lines) {
  std::vector<Instruction> out;
  for (auto l : lines) out.push_back(parse_instruction(l));
  return out;
}

MachineState state_with(RegFamily f, std::uint64_t v) {
  MachineState s;
  s.regs[asm_core::family_index(RegFamily::rsp)] = kInitialStackPointer;
  s.regs[asm_core::family_index(f)] = v;
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Execute, EmptyBlockLeavesStateAlone) {
  SplitMix64 rng(1);
  const auto init = random_state(rng);
  const auto out = execute_block({}, init);
  EXPECT_EQ(out.final, init);
  EXPECT_EQ(out.steps, 0u);
  EXPECT_EQ(out.halted, Halt::Normal);
}

TEST(Execute, PushPopMovesValue) {
  const auto out = execute_block(code({"push rbx", "pop rax"}), state_with(RegFamily::rbx, 5));
  EXPECT_EQ(out.final.regs[0], 5u);
  EXPECT_EQ(out.final.rsp(), kInitialStackPointer);
}

TEST(Execute, XorSelfClearsAndSetsZf) {
  auto init = state_with(RegFamily::rax, 0xDEADBEEF);
  init.flags.zf = false;
  const auto out = execute_block(code({"xor rax, rax"}), init);
  EXPECT_EQ(out.final.regs[0], 0u);
  EXPECT_TRUE(out.final.flags.zf);
  EXPECT_FALSE(out.final.flags.cf);
}

TEST(Execute, ThirtyTwoBitWriteZeroExtends) {
  SplitMix64 rng(99);
  for (auto f : asm_core::kAllFamilies) {
    for (int k = 0; k < 20; ++k) {
      MachineState s;
      s.regs[asm_core::family_index(f)] = rng.next();
      s.write({f, 32, false}, rng.next());
      EXPECT_EQ(s.regs[asm_core::family_index(f)] >> 32, 0u);
    }
  }
}

TEST(Execute, NarrowWritesMerge) {
  MachineState s;
  s.regs[0] = 0x1122334455667788ULL;
  s.write({RegFamily::rax, 16, false}, 0xAAAA);
  EXPECT_EQ(s.regs[0], 0x112233445566AAAAULL);
  s.write({RegFamily::rax, 8, true}, 0xBB);
  EXPECT_EQ(s.regs[0], 0x112233445566BBAAULL);
  s.write({RegFamily::rax, 8, false}, 0xCC);
  EXPECT_EQ(s.regs[0], 0x112233445566BBCCULL);
  EXPECT_EQ(s.read({RegFamily::rax, 8, true}), 0xBBu);
}

TEST(Execute, XchgIsInvolution) {
  SplitMix64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto init = random_state(rng);
    const auto out = execute_block(code({"xchg r12, r13", "xchg r12, r13"}), init);
    EXPECT_EQ(out.final, init);
  }
}

TEST(Execute, ArithmeticFlags) {
  auto out = execute_block(code({"mov eax, 0ffffffffh", "add eax, 1"}), state_with(RegFamily::rax, 0));
  EXPECT_EQ(out.final.regs[0], 0u);
  EXPECT_TRUE(out.final.flags.zf);
  EXPECT_TRUE(out.final.flags.cf);

  out = execute_block(code({"mov rax, 1", "cmp rax, 2"}), state_with(RegFamily::rax, 0));
  EXPECT_EQ(out.final.regs[0], 1u);
  EXPECT_TRUE(out.final.flags.cf);
  EXPECT_TRUE(out.final.flags.sf);

  out = execute_block(code({"mov rcx, 3", "dec rcx", "lea rdx, [rcx+4*rcx+10h]"}), state_with(RegFamily::rax, 0));
  EXPECT_EQ(out.final.regs[asm_core::family_index(RegFamily::rdx)], 2u + 8 + 16);
}

TEST(Execute, StopsAtControlTransfer) {
  const auto out = execute_block(code({"inc rax", "jmp rax", "inc rax"}), state_with(RegFamily::rax, 0));
  EXPECT_EQ(out.steps, 1u);
  EXPECT_EQ(out.final.regs[0], 1u);
  EXPECT_EQ(out.halted, Halt::Normal);
}

TEST(Execute, UnsupportedIsAnOutcome) {
  const auto out = execute_block(code({"inc rax", "ror rax, 3"}), state_with(RegFamily::rax, 0));
  EXPECT_EQ(out.halted, Halt::Unsupported);
  EXPECT_EQ(out.unsupported_mnemonic, "ror");
}

TEST(Execute, StepLimit) {
  const auto out = execute_block(code({"nop", "nop", "nop"}), MachineState{}, 2);
  EXPECT_EQ(out.halted, Halt::StepLimit);
  EXPECT_EQ(out.steps, 2u);
}

TEST(Equivalent, Reflexive) {
  const auto p = code({"mov rax, rbx", "push rax", "add rbx, 7", "pop rcx", "xchg rcx, rdx"});
  const auto r = equivalent(p, p, 10, 42);
  EXPECT_TRUE(r.equal());
  EXPECT_EQ(r.trials, 10u);
}

TEST(Equivalent, ZeroIdiomsIgnoreFlags) {
  EXPECT_TRUE(equivalent(code({"mov rax, 0"}), code({"xor rax, rax"}), 100, 1).equal());
  EXPECT_TRUE(equivalent(code({"mov rax, rbx"}), code({"push rbx", "pop rax"}), 100, 1).equal());
}

TEST(Equivalent, DetectsDifference) {
  const auto r = equivalent(code({"mov rax, 1"}), code({"mov rax, 2"}), 5, 1);
  EXPECT_EQ(r.verdict, Verdict::Diverged);
  ASSERT_TRUE(r.first_divergence.has_value());
  EXPECT_EQ(r.first_divergence->trial, 0u);
  EXPECT_EQ(r.first_divergence->location, "rax");
}

TEST(Equivalent, ObservesMemoryAboveStack) {
  const auto r = equivalent(code({"mov [rsp+8], rax"}), code({"mov [rsp+8], rbx"}), 5, 1);
  EXPECT_EQ(r.verdict, Verdict::Diverged);
  EXPECT_EQ(r.first_divergence->location.rfind("mem[", 0), 0u);
}

TEST(Equivalent, UnsupportedIsInconclusive) {
  const auto r = equivalent(code({"ror rax, 1"}), code({"nop"}), 5, 1);
  EXPECT_TRUE(r.inconclusive());
  EXPECT_FALSE(r.equal());
  EXPECT_NE(r.to_string().find("ror"), std::string::npos);
}

TEST(Equivalent, PublishedRegisterSwapColumnIsNotEquivalent) {
  const auto original = parse_listing(read_file(OBFUSCLAB_TEST_DATA "/regswap/original.asm"));
  const auto published = parse_listing(read_file(OBFUSCLAB_TEST_DATA "/regswap/published.asm"));
  const auto r = equivalent(original, published, 100, 7);
  EXPECT_EQ(r.verdict, Verdict::Diverged) << r.to_string();
}
