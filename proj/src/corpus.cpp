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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "xasm/error.hpp"

namespace xasm {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInstruction: return "EmptyInstruction";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateBlockOrdinal: return "DuplicateBlockOrdinal";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kZeroVocabulary: return "ZeroVocabulary";
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kArchMismatch: return "ArchMismatch";
    case ErrorCode::kOptMismatch: return "OptMismatch";
    case ErrorCode::kBadFractions: return "BadFractions";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kEmptyPath: return "EmptyPath";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string_view ArchName(Arch arch) {
  return arch == Arch::kX86_64 ? "x86_64" : "arm";
}

std::string_view OptName(Opt opt) {
  switch (opt) {
    case Opt::kO1: return "O1";
    case Opt::kO2: return "O2";
    case Opt::kO3: return "O3";
  }
  return "O2";
}

Arch ParseArch(std::string_view name) {
  if (name == "x86_64") return Arch::kX86_64;
  if (name == "arm") return Arch::kArm;
  throw Error(ErrorCode::kMalformedRecord,
              "unknown arch '" + std::string(name) + "'");
}

Opt ParseOpt(std::string_view name) {
  if (name == "O1") return Opt::kO1;
  if (name == "O2") return Opt::kO2;
  if (name == "O3") return Opt::kO3;
  throw Error(ErrorCode::kMalformedRecord,
              "unknown opt level '" + std::string(name) + "'");
}

namespace {

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' ||
         c == '.' || c == '@';
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

std::set<std::string> MakeX86Names() {
  std::set<std::string> names = {
      "RAX", "RBX", "RCX", "RDX", "RSI", "RDI", "RBP", "RSP", "RIP",
      "EAX", "EBX", "ECX", "EDX", "ESI", "EDI", "EBP", "ESP", "EIP",
      "AX",  "BX",  "CX",  "DX",  "SI",  "DI",  "BP",  "SP",  "IP",
      "AL",  "BL",  "CL",  "DL",  "AH",  "BH",  "CH",  "DH",
      "SIL", "DIL", "BPL", "SPL", "CS",  "DS",  "ES",  "FS",  "GS", "SS",
      "ST",  "EFLAGS", "RFLAGS",
      // operand-size and addressing keywords
      "BYTE", "WORD", "DWORD", "QWORD", "TBYTE", "XWORD", "OWORD",
      "XMMWORD", "YMMWORD", "ZMMWORD", "PTR", "OFFSET", "SHORT", "NEAR",
      "FAR", "FLAT", "REL"};
  for (int i = 8; i <= 15; ++i) {
    const std::string r = "R" + std::to_string(i);
    for (const char* suffix : {"", "D", "W", "B", "L"}) names.insert(r + suffix);
  }
  for (int i = 0; i < 32; ++i) {
    for (const char* prefix : {"XMM", "YMM", "ZMM"}) {
      names.insert(prefix + std::to_string(i));
    }
  }
  for (int i = 0; i < 16; ++i) {
    names.insert("CR" + std::to_string(i));
    names.insert("DR" + std::to_string(i));
  }
  for (int i = 0; i < 8; ++i) {
    names.insert("MM" + std::to_string(i));
    names.insert("K" + std::to_string(i));
  }
  return names;
}

std::set<std::string> MakeArmNames() {
  std::set<std::string> names = {
      "SP", "LR", "PC", "FP", "IP", "SB", "SL", "XZR", "WZR", "WSP",
      "APSR_NZCV", "FPSCR", "CPSR", "SPSR",
      "LSL", "LSR", "ASR", "ROR", "RRX", "MSL",
      "UXTB", "UXTH", "UXTW", "UXTX", "SXTB", "SXTH", "SXTW", "SXTX",
      "EQ", "NE", "CS", "HS", "CC", "LO", "MI", "PL", "VS", "VC",
      "HI", "LS", "GE", "LT", "GT", "LE", "AL", "NV"};
  for (int i = 0; i <= 15; ++i) names.insert("R" + std::to_string(i));
  for (int i = 0; i <= 30; ++i) {
    names.insert("X" + std::to_string(i));
    names.insert("W" + std::to_string(i));
  }
  for (int i = 0; i < 32; ++i) {
    for (const char* prefix : {"S", "D", "Q", "V", "B", "H"}) {
      names.insert(prefix + std::to_string(i));
    }
  }
  return names;
}

bool IsArchName(const std::string& upper_word, Arch arch) {
  static const std::set<std::string> x86 = MakeX86Names();
  static const std::set<std::string> arm = MakeArmNames();
  const auto& names = arch == Arch::kX86_64 ? x86 : arm;
  if (names.count(upper_word) != 0) return true;
  // vector lane forms such as V0.4S or D1.D
  const auto dot = upper_word.find('.');
  return dot != std::string::npos && dot > 0 &&
         names.count(upper_word.substr(0, dot)) != 0;
}

bool IsCallOpcode(const std::string& upper_opcode) {
  return upper_opcode == "CALL" || upper_opcode == "CALLQ" ||
         upper_opcode == "BL" || upper_opcode == "BLX";
}

bool IsPrefixOpcode(const std::string& upper_opcode) {
  static const std::set<std::string> prefixes = {
      "REP", "REPE", "REPZ", "REPNE", "REPNZ", "LOCK", "NOTRACK", "BND",
      "DATA16", "ADDR32"};
  return prefixes.count(upper_opcode) != 0;
}

// One lexical piece of an operand after classification.
struct Piece {
  std::string text;
  bool word = false;
  bool space_before = false;
};

std::string ClassifyWord(const std::string& upper, Arch arch, bool call_site) {
  if (std::isdigit(static_cast<unsigned char>(upper.front())) != 0) return "0";
  if (upper.rfind(".L.STR", 0) == 0 || upper.rfind(".LSTR", 0) == 0) {
    return "<STR>";
  }
  if (IsArchName(upper, arch)) return upper;
  if (call_site && upper.rfind(".L", 0) != 0) return "FOO";
  return "<TAG>";
}

std::string NormalizeOperand(std::string_view operand, Arch arch,
                             bool call_site) {
  std::vector<Piece> pieces;
  bool pending_space = false;
  std::size_t i = 0;
  while (i < operand.size()) {
    const char c = operand[i];
    if (IsSpace(c)) {
      pending_space = true;
      ++i;
      continue;
    }
    if (c == '%' || c == '$' || c == '#') {
      ++i;
      continue;
    }
    if (c == '"' || c == '\'') {
      std::size_t j = i + 1;
      while (j < operand.size() && operand[j] != c) {
        if (operand[j] == '\\') ++j;
        ++j;
      }
      pieces.push_back({"<STR>", true, pending_space});
      pending_space = false;
      i = std::min(j + 1, operand.size());
      continue;
    }
    if (c == '<') {
      const std::string ahead = Upper(operand.substr(i, 5));
      if (ahead == "<STR>" || ahead == "<TAG>") {
        pieces.push_back({ahead, true, pending_space});
        pending_space = false;
        i += 5;
        continue;
      }
    }
    if (IsWordChar(c)) {
      std::size_t j = i;
      while (j < operand.size() && IsWordChar(operand[j])) ++j;
      const std::string upper = Upper(operand.substr(i, j - i));
      pieces.push_back({ClassifyWord(upper, arch, call_site), true,
                        pending_space});
      pending_space = false;
      i = j;
      continue;
    }
    pieces.push_back({std::string(1, c), false, pending_space});
    pending_space = false;
    ++i;
  }

  std::string out;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    if (k > 0 && pieces[k].space_before && pieces[k].word &&
        pieces[k - 1].word) {
      out += ' ';
    }
    out += pieces[k].text;
  }
  return out;
}

// Splits at commas that are not nested in brackets, braces, parentheses or
// quotes.
std::vector<std::string_view> SplitOperands(std::string_view text) {
  std::vector<std::string_view> out;
  int depth = 0;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '[' || c == '{' || c == '(') {
      ++depth;
    } else if (c == ']' || c == '}' || c == ')') {
      depth = std::max(0, depth - 1);
    } else if (c == ',' && depth == 0) {
      out.push_back(Trim(text.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(Trim(text.substr(start)));
  return out;
}

}  // namespace

std::string NormalizeInstruction(std::string_view raw, Arch arch) {
  std::string_view rest = Trim(raw);
  if (rest.empty()) {
    throw Error(ErrorCode::kEmptyInstruction, "blank instruction");
  }

  auto take_word = [&rest]() {
    std::size_t end = 0;
    while (end < rest.size() && !IsSpace(rest[end])) ++end;
    std::string word = Upper(rest.substr(0, end));
    rest = Trim(rest.substr(end));
    return word;
  };

  std::string opcode = take_word();
  while (IsPrefixOpcode(opcode) && !rest.empty()) {
    opcode += ' ';
    opcode += take_word();
  }
  if (rest.empty()) return opcode;

  const bool call_site = IsCallOpcode(opcode);
  std::string out = opcode;
  out += ' ';
  bool first = true;
  for (std::string_view operand : SplitOperands(rest)) {
    if (!first) out += ',';
    first = false;
    out += NormalizeOperand(operand, arch, call_site);
  }
  return out;
}

std::string CanonicalRawInstruction(std::string_view raw) {
  std::string out;
  bool space = false;
  for (char c : Trim(raw)) {
    if (IsSpace(c)) {
      space = true;
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  if (out.empty()) {
    throw Error(ErrorCode::kEmptyInstruction, "blank instruction");
  }
  return out;
}

std::size_t Corpus::InstructionCount() const {
  std::size_t n = 0;
  for (const auto& fn : functions) {
    for (const auto& block : fn.blocks) n += block.instrs.size();
  }
  return n;
}

std::size_t Corpus::BlockCount() const {
  std::size_t n = 0;
  for (const auto& fn : functions) n += fn.blocks.size();
  return n;
}

std::vector<const BasicBlock*> Corpus::Blocks() const {
  std::vector<const BasicBlock*> out;
  out.reserve(BlockCount());
  for (const auto& fn : functions) {
    for (const auto& block : fn.blocks) out.push_back(&block);
  }
  return out;
}

nlohmann::json BlockToJson(const BasicBlock& block, bool with_tags) {
  nlohmann::json j;
  j["id"] = block.id;
  if (with_tags) {
    j["arch"] = ArchName(block.arch);
    j["opt"] = OptName(block.opt);
  }
  j["instrs"] = block.instrs;
  return j;
}

BasicBlock BlockFromJson(const nlohmann::json& record, Arch arch, Opt opt,
                         const ParseOptions& options) {
  if (!record.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "block record is not an object");
  }
  if (!record.contains("id") || !record["id"].is_number_unsigned()) {
    throw Error(ErrorCode::kMalformedRecord, "block needs unsigned 'id'");
  }
  if (!record.contains("instrs") || !record["instrs"].is_array() ||
      record["instrs"].empty()) {
    throw Error(ErrorCode::kMalformedRecord,
                "block needs a non-empty 'instrs' array");
  }
  BasicBlock block;
  block.id = record["id"].get<std::uint32_t>();
  block.arch = arch;
  block.opt = opt;
  if (record.contains("arch")) {
    if (!record["arch"].is_string()) {
      throw Error(ErrorCode::kMalformedRecord, "'arch' must be a string");
    }
    block.arch = ParseArch(record["arch"].get<std::string>());
  }
  if (record.contains("opt")) {
    if (!record["opt"].is_string()) {
      throw Error(ErrorCode::kMalformedRecord, "'opt' must be a string");
    }
    block.opt = ParseOpt(record["opt"].get<std::string>());
  }
  for (const auto& instr : record["instrs"]) {
    if (!instr.is_string()) {
      throw Error(ErrorCode::kMalformedRecord, "instruction is not a string");
    }
    const auto& text = instr.get_ref<const std::string&>();
    block.instrs.push_back(options.normalize
                               ? NormalizeInstruction(text, block.arch)
                               : CanonicalRawInstruction(text));
  }
  return block;
}

namespace {

Function FunctionFromJson(const nlohmann::json& record,
                          const ParseOptions& options) {
  if (!record.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "record is not an object");
  }
  for (const char* key : {"fn", "arch", "opt"}) {
    if (!record.contains(key) || !record[key].is_string()) {
      throw Error(ErrorCode::kMalformedRecord,
                  std::string("missing string field '") + key + "'");
    }
  }
  if (!record.contains("blocks") || !record["blocks"].is_array()) {
    throw Error(ErrorCode::kMalformedRecord, "missing 'blocks' array");
  }
  Function fn;
  fn.name = record["fn"].get<std::string>();
  fn.arch = ParseArch(record["arch"].get<std::string>());
  fn.opt = ParseOpt(record["opt"].get<std::string>());
  std::set<std::uint32_t> seen;
  for (const auto& b : record["blocks"]) {
    BasicBlock block = BlockFromJson(b, fn.arch, fn.opt, options);
    if (block.arch != fn.arch || block.opt != fn.opt) {
      throw Error(ErrorCode::kMalformedRecord,
                  "block arch/opt differs from its function");
    }
    if (!seen.insert(block.id).second) {
      throw Error(ErrorCode::kDuplicateBlockOrdinal,
                  "block id " + std::to_string(block.id) +
                      " repeated in function '" + fn.name + "'");
    }
    fn.blocks.push_back(std::move(block));
  }
  return fn;
}

}  // namespace

Corpus ParseCorpus(std::istream& in, const ParseOptions& options) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      corpus.functions.push_back(FunctionFromJson(record, options));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      // EmptyInstruction inside a record is a malformed record too.
      const ErrorCode code = e.code() == ErrorCode::kDuplicateBlockOrdinal
                                 ? e.code()
                                 : ErrorCode::kMalformedRecord;
      throw Error(code, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

Corpus ParseCorpusFile(const std::filesystem::path& path,
                       const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ParseCorpus(in, options);
}

void WriteCorpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& fn : corpus.functions) {
    nlohmann::json j;
    j["fn"] = fn.name;
    j["arch"] = ArchName(fn.arch);
    j["opt"] = OptName(fn.opt);
    j["blocks"] = nlohmann::json::array();
    for (const auto& block : fn.blocks) {
      j["blocks"].push_back(BlockToJson(block, false));
    }
    out << j.dump() << '\n';
  }
}

Corpus NormalizeCorpus(const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& fn : out.functions) {
    for (auto& block : fn.blocks) {
      for (auto& instr : block.instrs) instr = NormalizeInstruction(instr, block.arch);
    }
  }
  return out;
}

std::uint32_t Vocabulary::Insert(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const auto index = static_cast<std::uint32_t>(tokens_.size());
  tokens_.push_back(token);
  counts_.push_back(0);
  index_.emplace(token, index);
  return index;
}

void Vocabulary::Add(const std::string& token, std::uint64_t count) {
  counts_[Insert(token)] += count;
}

std::int64_t Vocabulary::IndexOf(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::uint64_t Vocabulary::TotalCount() const {
  std::uint64_t total = 0;
  for (auto c : counts_) total += c;
  return total;
}

Vocabulary BuildVocabulary(const Corpus& corpus) {
  if (corpus.Empty()) throw Error(ErrorCode::kEmptyCorpus, "no instructions");
  Vocabulary vocab;
  for (const auto* block : corpus.Blocks()) {
    for (const auto& instr : block->instrs) vocab.Add(instr);
  }
  return vocab;
}

std::vector<GrowthPoint> VocabGrowth(const Corpus& corpus, std::size_t parts) {
  if (parts == 0) {
    throw Error(ErrorCode::kInvalidArgument, "parts must be at least 1");
  }
  if (corpus.Empty()) throw Error(ErrorCode::kEmptyCorpus, "no instructions");

  std::vector<const std::string*> stream;
  stream.reserve(corpus.InstructionCount());
  for (const auto* block : corpus.Blocks()) {
    for (const auto& instr : block->instrs) stream.push_back(&instr);
  }

  std::vector<GrowthPoint> out;
  Vocabulary vocab;
  std::size_t next = 0;
  for (std::size_t part = 1; part <= parts; ++part) {
    const std::size_t end = stream.size() * part / parts;
    for (; next < end; ++next) vocab.Insert(*stream[next]);
    out.push_back({static_cast<double>(part) / static_cast<double>(parts),
                   vocab.Size()});
  }
  return out;
}

double OovRate(const Vocabulary& vocab, const Corpus& heldout) {
  if (heldout.Empty()) throw Error(ErrorCode::kEmptyCorpus, "empty heldout");
  std::size_t total = 0;
  std::size_t missing = 0;
  for (const auto* block : heldout.Blocks()) {
    for (const auto& instr : block->instrs) {
      ++total;
      if (!vocab.Contains(instr)) ++missing;
    }
  }
  return static_cast<double>(missing) / static_cast<double>(total);
}

}  // namespace xasm
