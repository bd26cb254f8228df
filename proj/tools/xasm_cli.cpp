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

// Command-line front end: one subcommand per pipeline stage.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "xasm/cfg.hpp"
#include "xasm/corpus.hpp"
#include "xasm/encoder.hpp"
#include "xasm/error.hpp"
#include "xasm/eval.hpp"
#include "xasm/instr_embed.hpp"
#include "xasm/lsh_store.hpp"
#include "xasm/matcher.hpp"
#include "xasm/pairgen.hpp"
#include "xasm/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xasm {
namespace {

constexpr const char* kToolVersion = "0.1.0";

struct Globals {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string arch = "x86_64";
  std::string opt;  // empty: all optimization levels
  double theta_sebb = 0.5;
  std::size_t dims_instr = 100;
  std::size_t dims_block = 50;
  std::size_t layers = 2;
  std::string cell = "lstm";
  std::optional<std::size_t> epochs;
  bool exact_scan = false;
};

std::uint64_t Fnv1a(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Records what produced an artifact and writes it next to the artifact as
// <artifact>.manifest.json.
class Manifest {
 public:
  Manifest(std::string subcommand, const Globals& g, std::vector<std::string> argv)
      : start_(std::chrono::steady_clock::now()) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["argv"] = std::move(argv);
    doc_["tool_version"] = kToolVersion;
    doc_["seed"] = g.seed;
    doc_["flags"] = {{"jobs", g.jobs},
                     {"arch", g.arch},
                     {"opt", g.opt},
                     {"theta_sebb", g.theta_sebb},
                     {"dims_instr", g.dims_instr},
                     {"dims_block", g.dims_block},
                     {"layers", g.layers},
                     {"cell", g.cell},
                     {"exact_scan", g.exact_scan}};
    if (g.epochs) doc_["flags"]["epochs"] = *g.epochs;
    doc_["inputs"] = json::object();
  }

  void Input(const fs::path& path) {
    doc_["inputs"][path.string()] = Hex(Fnv1a(path));
  }
  void Set(const std::string& key, json value) { doc_[key] = std::move(value); }

  void Write(const fs::path& artifact) {
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
    doc_["wall_seconds"] = secs;
    doc_["artifact"] = artifact.string();
    doc_["artifact_digest"] = Hex(Fnv1a(artifact));
    fs::path out = artifact;
    out += ".manifest.json";
    std::ofstream f(out);
    f << doc_.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + out.string());
  }

 private:
  std::chrono::steady_clock::time_point start_;
  json doc_;
};

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

std::ifstream OpenIn(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

// Keeps the functions matching the arch and, when set, opt flag.
Corpus Filter(const Corpus& c, std::optional<Arch> arch, const std::string& opt) {
  Corpus out;
  for (const auto& f : c.functions) {
    if (arch && f.arch != *arch) continue;
    if (!opt.empty() && f.opt != ParseOpt(opt)) continue;
    out.functions.push_back(f);
  }
  return out;
}

json GrowthJson(const std::vector<GrowthPoint>& points) {
  json out = json::array();
  for (const auto& p : points) {
    out.push_back({{"fraction", p.fraction}, {"vocabulary", p.vocabulary_size}});
  }
  return out;
}

json MatchesJson(const std::vector<Match>& matches) {
  json out = json::array();
  for (const auto& m : matches) out.push_back({{"ref", m.ref}, {"similarity", m.similarity}});
  return out;
}

EncoderConfig ConfigFromGlobals(const Globals& g) {
  EncoderConfig c;
  c.layers = g.layers;
  c.input_dim = g.dims_instr;
  c.block_dim = g.dims_block;
  c.cell = ParseCell(g.cell);
  if (g.epochs) c.epochs = *g.epochs;
  c.seed = g.seed;
  return c;
}

// Encoder plus the two instruction tables it reads.
struct Model {
  EncoderParams params;
  EmbeddingMatrix x86;
  EmbeddingMatrix arm;

  InstructionEmbedder Embedder() const { return InstructionEmbedder(&x86, &arm); }
};

struct ModelPaths {
  std::string encoder;
  std::string embed_x86;
  std::string embed_arm;

  void AddTo(CLI::App* cmd, bool with_encoder) {
    if (with_encoder) {
      cmd->add_option("--encoder", encoder, "Encoder parameters file")->required();
    }
    cmd->add_option("--embed-x86", embed_x86, "x86_64 instruction embeddings")->required();
    cmd->add_option("--embed-arm", embed_arm, "ARM instruction embeddings")->required();
  }

  Model Load(Manifest* manifest) const {
    Model m;
    if (!encoder.empty()) {
      m.params = LoadParams(encoder);
      if (manifest) manifest->Input(encoder);
    }
    m.x86 = LoadEmbeddingStore(embed_x86, Arch::kX86_64);
    m.arm = LoadEmbeddingStore(embed_arm, Arch::kArm);
    if (manifest) {
      manifest->Input(embed_x86);
      manifest->Input(embed_arm);
    }
    return m;
  }
};

void WriteEmbeddingsJsonl(const std::vector<BlockEmbedding>& embeddings,
                          std::ostream& out) {
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& v = embeddings[i].vector;
    out << json{{"ref", i},
                {"arch", ArchName(embeddings[i].arch)},
                {"vector", std::vector<double>(v.data(), v.data() + v.size())}}
               .dump()
        << '\n';
  }
}

std::vector<StoredBlock> ReadEmbeddingsJsonl(std::istream& in) {
  std::vector<StoredBlock> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto v = j.at("vector").get<std::vector<double>>();
      out.push_back({j.at("ref").get<BlockRef>(),
                     Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

BasicBlock ReadBlockFile(const fs::path& path, const Globals& g) {
  auto in = OpenIn(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, path.string() + ": " + e.what());
  }
  if (j.is_object() && !j.contains("id")) j["id"] = 0u;
  const Opt opt = g.opt.empty() ? Opt::kO2 : ParseOpt(g.opt);
  return BlockFromJson(j, ParseArch(g.arch), opt, ParseOptions{});
}

// Reads "score,label[,size_a,size_b]" rows; a first line that does not
// parse as numbers is taken as a header.
std::vector<SizedItem> ReadScores(std::istream& in, bool* has_sizes) {
  std::vector<SizedItem> out;
  std::string line;
  std::size_t lineno = 0;
  *has_sizes = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    SizedItem item;
    try {
      if (cells.size() != 2 && cells.size() != 4) throw std::invalid_argument("columns");
      std::size_t used = 0;
      item.item.score = std::stod(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("score");
      item.item.label = std::stoi(cells[1]);
      if (item.item.label != 0 && item.item.label != 1) throw std::invalid_argument("label");
      if (cells.size() == 4) {
        item.size_a = std::stoull(cells[2]);
        item.size_b = std::stoull(cells[3]);
      } else {
        *has_sizes = false;
      }
    } catch (const std::exception&) {
      if (lineno == 1 && out.empty()) continue;
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(lineno) + ": expected score,label[,size_a,size_b]");
    }
    out.push_back(item);
  }
  return out;
}

void PrintJson(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto out = OpenOut(out_path);
    out << j.dump(2) << '\n';
  }
}

void Configure(spdlog::level::level_enum fallback) {
  auto logger = spdlog::stderr_color_st("xasm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(fallback);
  if (const char* env = std::getenv("XASM_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

int Run(int argc, char** argv) {
  Configure(spdlog::level::warn);
  CLI::App app{"Cross-architecture basic-block similarity toolkit", "xasm"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads; 1 is the deterministic mode")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--arch", g.arch, "Architecture: x86_64 or arm")
      ->check(CLI::IsMember({"x86_64", "arm"}))
      ->capture_default_str();
  app.add_option("--opt", g.opt, "Optimization level filter: O1, O2 or O3")
      ->check(CLI::IsMember({"O1", "O2", "O3"}));
  app.add_option("--theta-sebb", g.theta_sebb, "Block equivalence threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--dims-instr", g.dims_instr, "Instruction embedding size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--dims-block", g.dims_block, "Block embedding size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--layers", g.layers, "Recurrent layers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--cell", g.cell, "Recurrent unit: lstm, gru or rnn")
      ->check(CLI::IsMember({"lstm", "gru", "rnn"}))
      ->capture_default_str();
  app.add_option("--epochs", g.epochs,
                 "Training epochs (default 100 for both trainers)");
  app.add_flag("--exact-scan", g.exact_scan, "Scan the whole store instead of LSH buckets");

  const std::vector<std::string> args(argv, argv + argc);
  auto manifest = [&](const std::string& name) { return Manifest(name, g, args); };

  // normalize
  std::string in_path, out_path;
  auto* normalize = app.add_subcommand("normalize", "Normalize a raw corpus");
  normalize->add_option("--in", in_path, "Raw corpus (JSON lines)")->required();
  normalize->add_option("--out", out_path, "Normalized corpus")->required();
  normalize->callback([&] {
    auto m = manifest("normalize");
    const Corpus raw = ParseCorpusFile(in_path, {.normalize = false});
    m.Input(in_path);
    auto out = OpenOut(out_path);
    WriteCorpus(NormalizeCorpus(raw), out);
    out.close();
    m.Write(out_path);
  });

  // vocab
  std::string heldout_path;
  std::size_t parts = 10;
  auto* vocab = app.add_subcommand("vocab", "Vocabulary growth and OOV report, raw vs normalized");
  vocab->add_option("--corpus", in_path, "Raw corpus")->required();
  vocab->add_option("--heldout", heldout_path,
                    "Held-out raw corpus (default: second half of --corpus)");
  vocab->add_option("--parts", parts, "Growth curve points")->capture_default_str();
  vocab->add_option("--out", out_path, "Report file (default: stdout)");
  vocab->callback([&] {
    const Corpus all = ParseCorpusFile(in_path, {.normalize = false});
    Corpus train = all;
    Corpus held;
    if (!heldout_path.empty()) {
      held = ParseCorpusFile(heldout_path, {.normalize = false});
    } else {
      const std::size_t half = all.functions.size() / 2;
      train.functions.assign(all.functions.begin(), all.functions.begin() + half);
      held.functions.assign(all.functions.begin() + half, all.functions.end());
    }
    json report;
    for (const bool norm : {false, true}) {
      const Corpus t = norm ? NormalizeCorpus(train) : train;
      const Corpus h = norm ? NormalizeCorpus(held) : held;
      const Vocabulary v = BuildVocabulary(t);
      report[norm ? "normalized" : "raw"] = {{"vocabulary", v.Size()},
                                            {"oov_rate", OovRate(v, h)},
                                            {"growth", GrowthJson(VocabGrowth(t, parts))}};
    }
    report["train_instructions"] = train.InstructionCount();
    report["heldout_instructions"] = held.InstructionCount();
    PrintJson(report, out_path);
  });

  // train-embed
  bool tsv = false;
  double subsample = 1e-5;
  std::size_t window = 2;
  auto* train_embed = app.add_subcommand("train-embed", "Train instruction embeddings for one arch");
  train_embed->add_option("--corpus", in_path, "Normalized corpus")->required();
  train_embed->add_option("--out", out_path, "Embedding store")->required();
  train_embed->add_option("--window", window, "Context radius")->capture_default_str();
  train_embed->add_option("--subsample", subsample, "Subsampling rate")->capture_default_str();
  train_embed->add_flag("--tsv", tsv, "Also write <out>.tsv");
  train_embed->callback([&] {
    auto m = manifest("train-embed");
    const Corpus c = Filter(ParseCorpusFile(in_path), ParseArch(g.arch), g.opt);
    m.Input(in_path);
    SgnsConfig config;
    config.dim = g.dims_instr;
    config.window = window;
    config.subsample = subsample;
    if (g.epochs) config.epochs = *g.epochs;
    config.seed = g.seed;
    config.jobs = g.jobs;
    const SgnsResult r = TrainSgns(c, config);
    spdlog::info("trained {} tokens, loss {} -> {}", r.matrix.vocab_size(),
                 r.epoch_loss.front(), r.epoch_loss.back());
    SaveEmbeddingStore(r.matrix, out_path);
    if (tsv) {
      auto t = OpenOut(out_path + ".tsv");
      WriteEmbeddingTsv(r.matrix, t);
    }
    m.Set("epoch_loss", r.epoch_loss);
    m.Write(out_path);
  });

  // pairs
  std::string x86_path, arm_path, out_dir;
  DissimilarOptions dissimilar;
  SplitFractions fractions;
  std::optional<std::size_t> max_pairs;
  auto* pairs = app.add_subcommand("pairs", "Generate labeled pairs and split them");
  pairs->add_option("--x86", x86_path, "Normalized x86_64 corpus")->required();
  pairs->add_option("--arm", arm_path, "Normalized ARM corpus")->required();
  pairs->add_option("--out-dir", out_dir, "Directory for train/val/test.jsonl")->required();
  pairs->add_option("--ngram", dissimilar.n, "n-gram size for dissimilarity")->capture_default_str();
  pairs->add_option("--ngram-threshold", dissimilar.threshold,
                    "Maximum n-gram similarity of a dissimilar pair")
      ->capture_default_str();
  pairs->add_option("--max-pairs", max_pairs, "Cap on similar pairs (dissimilar match it)");
  pairs->add_option("--train-frac", fractions.train)->capture_default_str();
  pairs->add_option("--val-frac", fractions.val)->capture_default_str();
  pairs->add_option("--test-frac", fractions.test)->capture_default_str();
  pairs->callback([&] {
    auto m = manifest("pairs");
    const Corpus x = Filter(ParseCorpusFile(x86_path), std::nullopt, g.opt);
    const Corpus a = Filter(ParseCorpusFile(arm_path), std::nullopt, g.opt);
    m.Input(x86_path);
    m.Input(arm_path);
    auto similar = GenerateSimilarPairs(x, a);
    if (max_pairs && similar.size() > *max_pairs) similar.resize(*max_pairs);
    dissimilar.count = similar.size();
    dissimilar.seed = g.seed;
    const auto negative = GenerateDissimilarPairs(x, a, dissimilar);
    std::vector<BlockPair> all = similar;
    all.insert(all.end(), negative.pairs.begin(), negative.pairs.end());
    const SplitSet split = SplitDataset(all, fractions, g.seed);
    const std::pair<const char*, const std::vector<BlockPair>*> sets[] = {
        {"train.jsonl", &split.train}, {"val.jsonl", &split.val}, {"test.jsonl", &split.test}};
    m.Set("counts", {{"similar", similar.size()},
                     {"dissimilar", negative.pairs.size()},
                     {"train", split.train.size()},
                     {"val", split.val.size()},
                     {"test", split.test.size()},
                     {"dropped", split.dropped},
                     {"rebalanced", split.rebalanced}});
    for (const auto& [name, set] : sets) {
      const fs::path p = fs::path(out_dir) / name;
      auto out = OpenOut(p);
      WritePairs(*set, out);
      out.close();
      m.Write(p);
    }
  });

  // train-encoder
  std::string train_path, val_path;
  ModelPaths model_paths;
  double lr = 0.05;
  std::size_t patience = 20;
  auto* train_encoder = app.add_subcommand("train-encoder", "Train the two-tower block encoder");
  train_encoder->add_option("--train", train_path, "Training pairs")->required();
  train_encoder->add_option("--val", val_path, "Validation pairs")->required();
  train_encoder->add_option("--out", out_path, "Encoder parameters file")->required();
  train_encoder->add_option("--lr", lr, "SGD step size")->capture_default_str();
  train_encoder->add_option("--patience", patience, "Epochs without improvement before stopping")
      ->capture_default_str();
  model_paths.AddTo(train_encoder, false);
  train_encoder->callback([&] {
    auto m = manifest("train-encoder");
    const Model model = model_paths.Load(&m);
    EncoderConfig config = ConfigFromGlobals(g);
    config.input_dim = model.x86.dim();
    config.lr = lr;
    config.patience = patience;
    const EncoderParams init = InitParams(config);
    const auto embedder = model.Embedder();
    const auto train = EncodePairs(init, embedder, ReadPairsFile(train_path));
    const auto val = EncodePairs(init, embedder, ReadPairsFile(val_path));
    m.Input(train_path);
    m.Input(val_path);
    const TrainResult r = Train(init, train, val);
    SaveParams(r.best, out_path);
    json history = json::array();
    for (const auto& e : r.history) history.push_back({{"loss", e.loss}, {"val_auc", e.val_auc}});
    m.Set("history", history);
    m.Set("best_epoch", r.best_epoch);
    m.Write(out_path);
    std::cout << json{{"best_epoch", r.best_epoch}, {"best_val_auc", r.best_val_auc}}.dump()
              << '\n';
  });

  // embed
  std::string cfg_path;
  auto* embed = app.add_subcommand("embed", "Encode the blocks of a CFG or corpus");
  auto* embed_cfg = embed->add_option("--cfg", cfg_path, "CFG file; refs are node ordinals");
  auto* embed_corpus = embed->add_option("--corpus", in_path,
                                         "Normalized corpus; refs count blocks in file order");
  embed_cfg->excludes(embed_corpus);
  embed->add_option("--out", out_path, "Block embeddings (JSON lines)")->required();
  model_paths.AddTo(embed, true);
  embed->callback([&] {
    if (cfg_path.empty() == in_path.empty()) {
      throw CLI::ValidationError("embed", "exactly one of --cfg and --corpus is required");
    }
    auto m = manifest("embed");
    const Model model = model_paths.Load(&m);
    const auto embedder = model.Embedder();
    std::vector<BlockEmbedding> out;
    if (!cfg_path.empty()) {
      out = EmbedCfg(ParseCfgFile(cfg_path), model.params, embedder);
      m.Input(cfg_path);
    } else {
      const Corpus c = Filter(ParseCorpusFile(in_path), std::nullopt, g.opt);
      m.Input(in_path);
      for (const auto* b : c.Blocks()) out.push_back(EmbedBlock(model.params, embedder, *b));
    }
    auto f = OpenOut(out_path);
    WriteEmbeddingsJsonl(out, f);
    f.close();
    m.Write(out_path);
  });

  // index
  std::size_t tables = LshIndex::kDefaultTables;
  std::size_t bits = LshIndex::kDefaultBits;
  auto* index = app.add_subcommand("index", "Build the LSH index over block embeddings");
  index->add_option("--embeddings", in_path, "Block embeddings from `embed`")->required();
  index->add_option("--out", out_path, "Index file")->required();
  index->add_option("--tables", tables, "Hash tables")->capture_default_str();
  index->add_option("--bits", bits, "Hyperplanes per table")->capture_default_str();
  index->callback([&] {
    auto m = manifest("index");
    auto in = OpenIn(in_path);
    const LshIndex built(ReadEmbeddingsJsonl(in), tables, bits, g.seed);
    m.Input(in_path);
    SaveIndex(built, out_path);
    m.Write(out_path);
  });

  // query-block
  std::string index_path, block_path;
  auto* query_block = app.add_subcommand("query-block", "Equivalent blocks of one query block");
  query_block->add_option("--index", index_path, "Index file")->required();
  query_block->add_option("--block", block_path,
                          "Block record {\"instrs\": [...]}; arch from --arch unless given")
      ->required();
  query_block->add_option("--out", out_path, "Result file (default: stdout)");
  model_paths.AddTo(query_block, true);
  query_block->callback([&] {
    const Model model = model_paths.Load(nullptr);
    const LshIndex idx = LoadIndex(index_path);
    const BasicBlock block = ReadBlockFile(block_path, g);
    const BlockEmbedding e = EmbedBlock(model.params, model.Embedder(), block);
    const auto matches = idx.Query(e.vector, g.theta_sebb,
                                   g.exact_scan ? QueryMode::kExact : QueryMode::kApprox);
    PrintJson(MatchesJson(matches), out_path);
  });

  // query-component
  std::string query_path, target_path;
  double coverage = 0.8;
  bool no_timing = false;
  auto* query_component = app.add_subcommand("query-component",
                                             "Score a query CFG component against a target CFG");
  query_component->add_option("--query", query_path, "Query CFG")->required();
  query_component->add_option("--target", target_path, "Target CFG")->required();
  query_component->add_option("--coverage", coverage, "Share of query nodes the paths cover")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  query_component->add_option("--tables", tables, "LSH tables")->capture_default_str();
  query_component->add_option("--bits", bits, "LSH hyperplanes per table")->capture_default_str();
  query_component->add_flag("--no-timing", no_timing, "Leave wall-clock time out of the report");
  query_component->add_option("--out", out_path, "Report file (default: stdout)");
  model_paths.AddTo(query_component, true);
  query_component->callback([&] {
    const Model model = model_paths.Load(nullptr);
    const Cfg query = ParseCfgFile(query_path);
    const Cfg target = ParseCfgFile(target_path);
    MatchOptions options;
    options.theta_sebb = g.theta_sebb;
    options.coverage = coverage;
    options.mode = g.exact_scan ? QueryMode::kExact : QueryMode::kApprox;
    options.jobs = g.jobs;
    const auto report = ComponentScore(query, target, model.params, model.Embedder(),
                                       options, tables, bits, g.seed);
    PrintJson(ReportToJson(report, !no_timing), out_path);
  });

  // eval
  std::string scores_path, pairs_path, roc_path;
  std::size_t small_max = 5, large_min = 20;
  auto* eval = app.add_subcommand("eval", "ROC curve and AUC");
  auto* eval_scores = eval->add_option("--scores", scores_path,
                                       "CSV rows score,label[,size_a,size_b]");
  auto* eval_pairs = eval->add_option("--pairs", pairs_path, "Labeled pairs to score with --encoder");
  eval_scores->excludes(eval_pairs);
  eval->add_option("--encoder", model_paths.encoder, "Encoder parameters (with --pairs)");
  eval->add_option("--embed-x86", model_paths.embed_x86, "x86_64 embeddings (with --pairs)");
  eval->add_option("--embed-arm", model_paths.embed_arm, "ARM embeddings (with --pairs)");
  eval->add_option("--roc", roc_path, "Write the ROC curve CSV here");
  eval->add_option("--small-max", small_max)->capture_default_str();
  eval->add_option("--large-min", large_min)->capture_default_str();
  eval->callback([&] {
    std::vector<SizedItem> items;
    bool has_sizes = true;
    if (!scores_path.empty()) {
      auto in = OpenIn(scores_path);
      items = ReadScores(in, &has_sizes);
    } else if (!pairs_path.empty()) {
      if (model_paths.encoder.empty() || model_paths.embed_x86.empty() ||
          model_paths.embed_arm.empty()) {
        throw CLI::ValidationError("eval", "--pairs needs --encoder, --embed-x86, --embed-arm");
      }
      const Model model = model_paths.Load(nullptr);
      for (const auto& p : EncodePairs(model.params, model.Embedder(), ReadPairsFile(pairs_path))) {
        items.push_back({{PairSimilarity(model.params, p), static_cast<int>(p.label)},
                         p.size_a,
                         p.size_b});
      }
    } else {
      throw CLI::ValidationError("eval", "one of --scores and --pairs is required");
    }
    std::vector<ScoredItem> plain;
    for (const auto& s : items) plain.push_back(s.item);
    const RocResult roc = RocAuc(plain);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", roc.auc);
    std::cout << "auc " << buf << '\n';
    if (has_sizes) {
      for (const auto& b : SizePartitionEval(items, small_max, large_min)) {
        std::cout << "auc_" << b.name << ' ';
        if (b.auc) {
          std::snprintf(buf, sizeof(buf), "%.17g", *b.auc);
          std::cout << buf;
        } else {
          std::cout << "n/a";
        }
        std::cout << " n=" << b.count << '\n';
        if (!b.warning.empty()) spdlog::warn("{}", b.warning);
      }
    }
    if (!roc_path.empty()) {
      auto out = OpenOut(roc_path);
      WriteRocCsv(roc, out);
    }
  });

  // gradcheck
  double eps = 1e-5;
  std::size_t steps = 5;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare backprop against finite differences");
  gradcheck->add_option("--eps", eps, "Finite-difference step")->capture_default_str();
  gradcheck->add_option("--steps", steps, "Sequence length of the random pair")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gradcheck->callback([&] {
    const EncoderParams params = InitParams(ConfigFromGlobals(g));
    Rng rng(g.seed);
    EncodedPair pair;
    for (Sequence* s : {&pair.a, &pair.b}) {
      s->resize(static_cast<Eigen::Index>(g.dims_instr), static_cast<Eigen::Index>(steps));
      for (auto& v : s->reshaped()) v = rng.Uniform(-1.0, 1.0);
    }
    pair.label = static_cast<double>(rng.Below(2));
    const auto r = GradientCheck(params, pair, eps);
    std::cout << json{{"cell", g.cell},
                      {"layers", g.layers},
                      {"max_relative_error", r.max_relative_error},
                      {"checked", r.checked},
                      {"skipped", r.skipped},
                      {"pass", r.max_relative_error < 1e-4}}
                     .dump()
              << '\n';
  });

  // synth
  SynthOptions synth_options;
  PlantedOptions planted;
  bool with_planted = false;
  auto* synth = app.add_subcommand("synth", "Write template-generated corpora and CFGs");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();
  synth->add_option("--functions", synth_options.functions)->capture_default_str();
  synth->add_flag("--planted", with_planted,
                  "Also write query.json, target.json and decoy<i>.json");
  synth->add_option("--decoys", planted.decoys)->capture_default_str();
  synth->callback([&] {
    auto m = manifest("synth");
    synth_options.seed = g.seed;
    if (!g.opt.empty()) synth_options.opt = ParseOpt(g.opt);
    const SynthCorpora c = SynthesizeCorpora(synth_options);
    const std::pair<const char*, const Corpus*> files[] = {{"x86_64.jsonl", &c.x86},
                                                           {"arm.jsonl", &c.arm}};
    for (const auto& [name, corpus] : files) {
      const fs::path p = fs::path(out_dir) / name;
      auto out = OpenOut(p);
      WriteCorpus(*corpus, out);
      out.close();
      m.Write(p);
    }
    if (with_planted) {
      planted.seed = g.seed;
      const PlantedCase pc = SynthesizePlantedCase(planted);
      std::vector<std::pair<std::string, const Cfg*>> cfgs = {{"query.json", &pc.query},
                                                              {"target.json", &pc.target}};
      for (std::size_t i = 0; i < pc.decoys.size(); ++i) {
        cfgs.emplace_back("decoy" + std::to_string(i) + ".json", &pc.decoys[i]);
      }
      m.Set("planted", {{"nodes", pc.planted}, {"junk", pc.junk}});
      for (const auto& [name, cfg] : cfgs) {
        const fs::path p = fs::path(out_dir) / name;
        auto out = OpenOut(p);
        WriteCfg(*cfg, out);
        out.close();
        m.Write(p);
      }
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help() << std::flush;
    return 1;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}

}  // namespace
}  // namespace xasm

int main(int argc, char** argv) { return xasm::Run(argc, argv); }
