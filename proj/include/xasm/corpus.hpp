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

#ifndef XASM_CORPUS_HPP_
#define XASM_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace xasm {

enum class Arch { kX86_64, kArm };
enum class Opt { kO1, kO2, kO3 };

std::string_view ArchName(Arch arch);  // "x86_64" | "arm"
std::string_view OptName(Opt opt);     // "O1" | "O2" | "O3"
// Both throw Error(kMalformedRecord) on unknown names.
Arch ParseArch(std::string_view name);
Opt ParseOpt(std::string_view name);

// Normalizes one assembly instruction:
//   - register sigils (`%`) and immediate markers (`$`, `#`) are dropped;
//   - numeric constants (decimal, 0x-hex, including memory displacements)
//     become `0`, keeping a leading minus;
//   - quoted literals and `.L.str*` labels become `<STR>`;
//   - symbols used as the target of CALL/CALLQ/BL/BLX become `FOO`
//     (local `.L*` labels excepted);
//   - every other symbol that is not a register or operand keyword of `arch`
//     becomes `<TAG>`.
// The result is upper case, with one space after the opcode and operands
// separated by a bare comma. Throws Error(kEmptyInstruction) on blank input.
std::string NormalizeInstruction(std::string_view raw, Arch arch);

// Trims and collapses internal whitespace without rewriting anything else.
// Used as the "raw" token when measuring what normalization buys.
std::string CanonicalRawInstruction(std::string_view raw);

struct BasicBlock {
  std::uint32_t id = 0;  // provenance id, shared across architectures
  Arch arch = Arch::kX86_64;
  Opt opt = Opt::kO2;
  std::vector<std::string> instrs;

  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

struct Function {
  std::string name;
  Arch arch = Arch::kX86_64;
  Opt opt = Opt::kO2;
  std::vector<BasicBlock> blocks;

  friend bool operator==(const Function&, const Function&) = default;
};

struct Corpus {
  std::vector<Function> functions;

  std::size_t InstructionCount() const;
  std::size_t BlockCount() const;
  bool Empty() const { return InstructionCount() == 0; }

  // Every block in function order, then block order.
  std::vector<const BasicBlock*> Blocks() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct ParseOptions {
  // When false, instructions are only whitespace-canonicalized.
  bool normalize = true;
};

// JSON-lines corpus: one function per line,
//   {"fn": str, "arch": "x86_64"|"arm", "opt": "O1"|"O2"|"O3",
//    "blocks": [{"id": uint, "instrs": [str, ...]}, ...]}
// Blank lines are skipped. Errors name the 1-based line number.
Corpus ParseCorpus(std::istream& in, const ParseOptions& options = {});
Corpus ParseCorpusFile(const std::filesystem::path& path,
                       const ParseOptions& options = {});
void WriteCorpus(const Corpus& corpus, std::ostream& out);

// Copy with every instruction passed through NormalizeInstruction.
Corpus NormalizeCorpus(const Corpus& corpus);

// Block record shared by the corpus, CFG and pair formats.
nlohmann::json BlockToJson(const BasicBlock& block, bool with_tags);
// Reads {"id", "instrs"} plus, when present, "arch"/"opt" (otherwise the
// defaults given). Instructions are normalized when options.normalize.
BasicBlock BlockFromJson(const nlohmann::json& record, Arch arch, Opt opt,
                         const ParseOptions& options);

// Dense token <-> index map in first-occurrence order, with counts.
class Vocabulary {
 public:
  // Returns the index of token, inserting it with count 0 if absent.
  std::uint32_t Insert(const std::string& token);
  void Add(const std::string& token, std::uint64_t count = 1);

  // -1 when absent.
  std::int64_t IndexOf(std::string_view token) const;
  bool Contains(std::string_view token) const { return IndexOf(token) >= 0; }

  const std::string& Token(std::uint32_t index) const { return tokens_[index]; }
  std::uint64_t Count(std::uint32_t index) const { return counts_[index]; }
  std::size_t Size() const { return tokens_.size(); }
  std::uint64_t TotalCount() const;
  const std::vector<std::string>& Tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& Counts() const { return counts_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.counts_ == b.counts_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

Vocabulary BuildVocabulary(const Corpus& corpus);

struct GrowthPoint {
  double fraction = 0.0;
  std::size_t vocabulary_size = 0;
};

// Splits the instruction stream into `parts` equal slices and records the
// cumulative vocabulary size after each one.
std::vector<GrowthPoint> VocabGrowth(const Corpus& corpus, std::size_t parts);

// Fraction of heldout instruction occurrences missing from vocab.
double OovRate(const Vocabulary& vocab, const Corpus& heldout);

}  // namespace xasm

#endif  // XASM_CORPUS_HPP_
