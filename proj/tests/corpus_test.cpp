// Copyright 2026 The xasm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xasm/corpus.hpp"

#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "xasm/error.hpp"

namespace xasm {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no xasm::Error thrown";
  return ErrorCode::kIo;
}

TEST(NormalizeInstructionTest, StringLiteralLabel) {
  EXPECT_EQ(NormalizeInstruction("MOVL %ESI, $.L.STR.31", Arch::kX86_64),
            "MOVL ESI,<STR>");
}

TEST(NormalizeInstructionTest, Immediate) {
  EXPECT_EQ(NormalizeInstruction("MOVL %EDX, $3", Arch::kX86_64), "MOVL EDX,0");
}

TEST(NormalizeInstructionTest, LocalLabel) {
  EXPECT_EQ(NormalizeInstruction("JE .LBB0_5", Arch::kX86_64), "JE <TAG>");
}

TEST(NormalizeInstructionTest, CallTarget) {
  EXPECT_EQ(NormalizeInstruction("CALLQ STRNCMP", Arch::kX86_64), "CALLQ FOO");
  EXPECT_EQ(NormalizeInstruction("bl printf", Arch::kArm), "BL FOO");
  // A local label under a call opcode is still a label.
  EXPECT_EQ(NormalizeInstruction("call .Ltmp3", Arch::kX86_64), "CALL <TAG>");
}

TEST(NormalizeInstructionTest, RegistersSurvive) {
  EXPECT_EQ(NormalizeInstruction("movq %rdi, %rax", Arch::kX86_64),
            "MOVQ RDI,RAX");
  EXPECT_EQ(NormalizeInstruction("add x0, x1, x2", Arch::kArm), "ADD X0,X1,X2");
  EXPECT_EQ(NormalizeInstruction("ld1 {v0.4s}, [x1]", Arch::kArm),
            "LD1 {V0.4S},[X1]");
}

TEST(NormalizeInstructionTest, SignedAndHexConstants) {
  EXPECT_EQ(NormalizeInstruction("mov eax, dword ptr [rbp-8]", Arch::kX86_64),
            "MOV EAX,DWORD PTR[RBP-0]");
  EXPECT_EQ(NormalizeInstruction("addq $-16, %rsp", Arch::kX86_64),
            "ADDQ -0,RSP");
  EXPECT_EQ(NormalizeInstruction("and eax, 0xff", Arch::kX86_64), "AND EAX,0");
  EXPECT_EQ(NormalizeInstruction("ldr w0, [sp, #16]", Arch::kArm),
            "LDR W0,[SP,0]");
}

TEST(NormalizeInstructionTest, QuotedLiteralAndSymbols) {
  EXPECT_EQ(NormalizeInstruction("lea rdi, \"hello, world\"", Arch::kX86_64),
            "LEA RDI,<STR>");
  EXPECT_EQ(NormalizeInstruction("mov eax, [rip+counter]", Arch::kX86_64),
            "MOV EAX,[RIP+<TAG>]");
}

TEST(NormalizeInstructionTest, PrefixJoinsOpcode) {
  EXPECT_EQ(NormalizeInstruction("rep stosq", Arch::kX86_64), "REP STOSQ");
  EXPECT_EQ(NormalizeInstruction("ret", Arch::kX86_64), "RET");
}

TEST(NormalizeInstructionTest, Idempotent) {
  for (const char* raw :
       {"MOVL %ESI, $.L.STR.31", "MOVL %EDX, $3", "JE .LBB0_5",
        "CALLQ STRNCMP", "mov eax, dword ptr [rbp-8]", "addq $-16, %rsp",
        "ldr w0, [sp, #16]", "rep stosq", "lea rdi, \"a, b\""}) {
    const Arch arch = raw[0] == 'l' && raw[1] == 'd' ? Arch::kArm : Arch::kX86_64;
    const std::string once = NormalizeInstruction(raw, arch);
    EXPECT_EQ(NormalizeInstruction(once, arch), once) << raw;
  }
  EXPECT_EQ(NormalizeInstruction("MOVL EDX,0", Arch::kX86_64), "MOVL EDX,0");
}

TEST(NormalizeInstructionTest, BlankIsAnError) {
  EXPECT_EQ(CodeOf([] { NormalizeInstruction("  \t", Arch::kX86_64); }),
            ErrorCode::kEmptyInstruction);
}

constexpr char kTwoBlocks[] =
    R"({"fn": "f", "arch": "x86_64", "opt": "O2", "blocks": [)"
    R"({"id": 4, "instrs": ["movl %edx, $3", "je .LBB0_5"]},)"
    R"({"id": 9, "instrs": ["ret"]}]})"
    "\n";

TEST(ParseCorpusTest, KeepsBlockAndInstructionOrder) {
  std::istringstream in(kTwoBlocks);
  const Corpus c = ParseCorpus(in);
  ASSERT_EQ(c.functions.size(), 1u);
  const auto& blocks = c.functions[0].blocks;
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].id, 4u);
  EXPECT_EQ(blocks[1].id, 9u);
  EXPECT_EQ(blocks[0].instrs,
            (std::vector<std::string>{"MOVL EDX,0", "JE <TAG>"}));
  EXPECT_EQ(blocks[0].arch, Arch::kX86_64);
  EXPECT_EQ(blocks[0].opt, Opt::kO2);
}

TEST(ParseCorpusTest, MissingArchReportsLine) {
  std::istringstream in(std::string(kTwoBlocks) +
                        R"({"fn": "g", "opt": "O2", "blocks": []})" + "\n");
  try {
    ParseCorpus(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(ParseCorpusTest, DuplicateBlockIdInOneFunction) {
  std::istringstream in(
      R"({"fn": "f", "arch": "arm", "opt": "O1", "blocks": [)"
      R"({"id": 1, "instrs": ["ret"]}, {"id": 1, "instrs": ["nop"]}]})");
  EXPECT_EQ(CodeOf([&] { ParseCorpus(in); }), ErrorCode::kDuplicateBlockOrdinal);
}

TEST(ParseCorpusTest, SharedIdsAcrossArchitectures) {
  std::istringstream in(
      R"({"fn": "f", "arch": "x86_64", "opt": "O2", "blocks": [{"id": 1, "instrs": ["ret"]}]})"
      "\n"
      R"({"fn": "f", "arch": "arm", "opt": "O2", "blocks": [{"id": 1, "instrs": ["ret"]}]})");
  const Corpus c = ParseCorpus(in);
  ASSERT_EQ(c.functions.size(), 2u);
  EXPECT_EQ(c.functions[0].blocks[0].id, c.functions[1].blocks[0].id);
}

TEST(ParseCorpusTest, RoundTrip) {
  std::istringstream in(kTwoBlocks);
  const Corpus c = ParseCorpus(in);
  std::ostringstream out;
  WriteCorpus(c, out);
  std::istringstream again(out.str());
  EXPECT_EQ(ParseCorpus(again), c);
}

Corpus FromTokens(const std::vector<std::vector<std::string>>& blocks,
                  Arch arch = Arch::kX86_64) {
  Corpus c;
  Function fn{"f", arch, Opt::kO2, {}};
  std::uint32_t id = 0;
  for (const auto& b : blocks) fn.blocks.push_back({id++, arch, Opt::kO2, b});
  c.functions.push_back(fn);
  return c;
}

TEST(VocabularyTest, CountsTokens) {
  const Vocabulary v = BuildVocabulary(FromTokens({{"A", "B", "A"}}));
  EXPECT_EQ(v.Size(), 2u);
  EXPECT_EQ(v.Count(static_cast<std::uint32_t>(v.IndexOf("A"))), 2u);
  EXPECT_EQ(v.Count(static_cast<std::uint32_t>(v.IndexOf("B"))), 1u);
  EXPECT_EQ(v.TotalCount(), 3u);
  EXPECT_EQ(v.IndexOf("A"), 0);  // first-occurrence order
}

TEST(VocabularyTest, SameMultisetSameVocabulary) {
  const Vocabulary a = BuildVocabulary(FromTokens({{"A", "B"}, {"A"}}));
  const Vocabulary b = BuildVocabulary(FromTokens({{"B", "A", "A"}}));
  ASSERT_EQ(a.Size(), b.Size());
  for (const char* t : {"A", "B"}) {
    EXPECT_EQ(a.Count(static_cast<std::uint32_t>(a.IndexOf(t))),
              b.Count(static_cast<std::uint32_t>(b.IndexOf(t))));
  }
}

TEST(VocabularyTest, EmptyCorpus) {
  EXPECT_EQ(CodeOf([] { BuildVocabulary(Corpus{}); }), ErrorCode::kEmptyCorpus);
}

// Raw fixture with constants and labels that normalization folds together.
constexpr char kRawFixture[] =
    R"({"fn": "f", "arch": "x86_64", "opt": "O2", "blocks": [)"
    R"({"id": 1, "instrs": ["movl %edx, $3", "movl %edx, $4", "je .LBB0_5", "callq strlen"]},)"
    R"({"id": 2, "instrs": ["movl %edx, $7", "je .LBB0_9", "callq memcpy", "movq %rdi, %rax"]},)"
    R"({"id": 3, "instrs": ["movl %esi, $.L.str.1", "movl %esi, $.L.str.2", "je .LBB1_2", "movq %rdi, %rax"]}]})";

TEST(VocabularyTest, RawVocabularyIsNoSmallerThanNormalized) {
  std::istringstream a(kRawFixture);
  std::istringstream b(kRawFixture);
  const Corpus raw = ParseCorpus(a, {.normalize = false});
  const Corpus norm = ParseCorpus(b);
  // Oracle: distinct strings counted directly.
  std::set<std::string> raw_set;
  std::set<std::string> norm_set;
  for (const auto* blk : raw.Blocks()) raw_set.insert(blk->instrs.begin(), blk->instrs.end());
  for (const auto* blk : norm.Blocks()) norm_set.insert(blk->instrs.begin(), blk->instrs.end());
  EXPECT_EQ(BuildVocabulary(raw).Size(), raw_set.size());
  EXPECT_EQ(BuildVocabulary(norm).Size(), norm_set.size());
  EXPECT_EQ(raw_set.size(), 11u);
  EXPECT_EQ(norm_set.size(), 5u);
}

TEST(VocabGrowthTest, SingleToken) {
  const auto g = VocabGrowth(FromTokens({{"A"}, {"A"}, {"A"}, {"A"}}), 4);
  ASSERT_EQ(g.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(g[i].fraction, 0.25 * static_cast<double>(i + 1));
    EXPECT_EQ(g[i].vocabulary_size, 1u);
  }
}

TEST(VocabGrowthTest, OnePartIsFullVocabulary) {
  const Corpus c = FromTokens({{"A", "B"}, {"C"}});
  const auto g = VocabGrowth(c, 1);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].vocabulary_size, BuildVocabulary(c).Size());
}

TEST(VocabGrowthTest, NormalizedCurveBelowRaw) {
  std::istringstream a(kRawFixture);
  std::istringstream b(kRawFixture);
  const auto raw = VocabGrowth(ParseCorpus(a, {.normalize = false}), 4);
  const auto norm = VocabGrowth(ParseCorpus(b), 4);
  ASSERT_EQ(raw.size(), norm.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    EXPECT_LE(norm[i].vocabulary_size, raw[i].vocabulary_size);
    if (i > 0) EXPECT_GE(raw[i].vocabulary_size, raw[i - 1].vocabulary_size);
  }
  EXPECT_EQ(raw.back().vocabulary_size, 11u);
}

TEST(OovRateTest, SubsetAndDisjoint) {
  const Vocabulary v = BuildVocabulary(FromTokens({{"A", "B"}}));
  EXPECT_DOUBLE_EQ(OovRate(v, FromTokens({{"B", "A", "A"}})), 0.0);
  EXPECT_DOUBLE_EQ(OovRate(v, FromTokens({{"C", "D"}})), 1.0);
}

TEST(OovRateTest, MixedFixture) {
  const Vocabulary v = BuildVocabulary(FromTokens({{"A", "B", "C"}}));
  // 3 of the 8 occurrences (D, E, D) are unseen.
  EXPECT_DOUBLE_EQ(OovRate(v, FromTokens({{"A", "D", "B"}, {"E", "C", "C", "D", "A"}})),
                   3.0 / 8.0);
  EXPECT_EQ(CodeOf([&] { OovRate(v, Corpus{}); }), ErrorCode::kEmptyCorpus);
}

}  // namespace
}  // namespace xasm
