// tools/prosody_tag.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: fit, tag, stats, synth, inspect.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "prosody/embedding_io.h"
#include "prosody/error.h"
#include "prosody/json_lines.h"
#include "prosody/phonetics.h"
#include "prosody/synth.h"
#include "prosody/tagger.h"

namespace {

namespace fs = std::filesystem;
using namespace prosody;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

struct Paths {
  std::string lexicon, embeddings, questions, classes, model, out, trace_csv,
      tags_out;
};

int verbosity = 0;

void Log(const std::string &msg) {
  if (verbosity > 0) std::cerr << msg << '\n';
}

std::vector<WordEntry> ReadLexiconFile(const std::string &path) {
  auto is = OpenForRead(path);
  return LoadLexicon(is);
}

std::vector<ProsodySample> ReadEmbeddingFile(const std::string &path) {
  auto is = OpenForRead(path, std::ios::binary);
  return ReadEmbeddings(is);
}

TaggerModel ReadModelFile(const std::string &path) {
  auto is = OpenForRead(path);
  return LoadModel(is);
}

int CmdFit(const Paths &p, const TaggerConfig &config) {
  auto lexicon = ReadLexiconFile(p.lexicon);
  PhonemeClassTable classes;
  {
    auto is = OpenForRead(p.classes);
    classes = LoadClassTable(is);
  }
  std::vector<Question> questions;
  {
    auto is = OpenForRead(p.questions);
    questions = LoadQuestions(is, classes);
  }
  auto samples = ReadEmbeddingFile(p.embeddings);
  Log("read " + std::to_string(lexicon.size()) + " words, " +
      std::to_string(questions.size()) + " questions, " +
      std::to_string(samples.size()) + " embeddings");

  FitResult fit = Fit(lexicon, samples, questions, classes, config);
  const TaggerModel &model = fit.model;

  WriteFileAtomic(p.out, [&](std::ostream &os) { SaveModel(model, os); });
  if (!p.trace_csv.empty()) {
    const auto rows = GrowthReport(model.growth_trace);
    WriteFileAtomic(p.trace_csv, [&](std::ostream &os) { WriteGrowthCsv(os, rows); });
  }
  if (!p.tags_out.empty())
    WriteFileAtomic(p.tags_out, [&](std::ostream &os) { WriteTags(os, fit.tags); });

  const auto rows = GrowthReport(model.growth_trace);
  std::cout << "leaves: " << model.tree.NumLeaves() << '\n'
            << "tags: " << TagInventory(model).size() << '\n'
            << "final total leaf log-likelihood: "
            << FormatDouble(rows.back().total_leaf_ll) << '\n';
  return 0;
}

int CmdTag(const Paths &p) {
  const TaggerModel model = ReadModelFile(p.model);
  const auto lexicon = ReadLexiconFile(p.lexicon);
  const auto samples = ReadEmbeddingFile(p.embeddings);
  if (!samples.empty() && samples.front().embedding.size() != model.config.dim)
    throw DimensionError(
        "embedding file has dimension " +
        std::to_string(samples.front().embedding.size()) +
        " but the model has dimension " + std::to_string(model.config.dim));
  const auto tags = TagAll(model, lexicon, samples);
  if (p.out.empty())
    WriteTags(std::cout, tags);
  else
    WriteFileAtomic(p.out, [&](std::ostream &os) { WriteTags(os, tags); });
  Log("tagged " + std::to_string(tags.size()) + " tokens");
  return 0;
}

int CmdStats(const Paths &p) {
  const TaggerModel model = ReadModelFile(p.model);
  const auto rows = GrowthReport(model.growth_trace);
  if (p.out.empty()) {
    WriteGrowthCsv(std::cout, rows);
  } else {
    WriteFileAtomic(p.out, [&](std::ostream &os) { WriteGrowthCsv(os, rows); });
  }
  std::ostream &info = p.out.empty() ? std::cerr : std::cout;
  info << "leaf,samples,weights\n";
  for (int i = 0; i < model.tree.NumLeaves(); ++i) {
    const LeafGmm &g = model.gmms[i];
    info << g.leaf << ',' << model.leaf_counts[i] << ',';
    for (int k = 0; k < g.NumComponents(); ++k)
      info << (k ? " " : "") << FormatDouble(g.components[k].weight);
    info << '\n';
  }
  return 0;
}

int CmdSynth(const Paths &p, const SynthSpec &spec, bool binary) {
  try {
    spec.Validate();
  } catch (const SpecError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  const SynthCorpus corpus = GenerateSynthCorpus(spec);
  const SynthFiles files = WriteSynthCorpus(corpus, p.out, binary);
  std::cout << "wrote " << corpus.lexicon.size() << " words, "
            << corpus.samples.size() << " embeddings to " << p.out << '\n';
  Log(files.embeddings.string());
  return 0;
}

void PrintSubtree(const TaggerModel &model, int node, int depth,
                  std::ostream &os) {
  const TreeNode &n = model.tree.nodes()[node];
  const std::string indent(2 * depth, ' ');
  if (n.is_leaf) {
    const LeafGmm &g = model.gmms[n.leaf_index];
    os << indent << "leaf " << g.leaf << ": " << model.leaf_counts[n.leaf_index]
       << " samples, " << g.NumComponents() << " components, weights";
    for (const auto &c : g.components)
      os << ' ' << std::fixed << std::setprecision(3) << c.weight;
    os.unsetf(std::ios::floatfield);
    os << '\n';
    return;
  }
  std::string question = "?";
  for (const auto &q : model.questions)
    if (q.id == n.question_id) question = q.ToString();
  os << indent << "q" << n.question_id << " " << question << "\n";
  os << indent << " yes:\n";
  PrintSubtree(model, n.yes_child, depth + 1, os);
  os << indent << " no:\n";
  PrintSubtree(model, n.no_child, depth + 1, os);
}

int CmdInspect(const Paths &p) {
  const TaggerModel model = ReadModelFile(p.model);
  std::cout << "format_version " << model.format_version << ", d "
            << model.config.dim << ", " << model.tree.NumLeaves() << " leaves, "
            << TagInventory(model).size() << " tags, depth "
            << model.tree.Depth() << '\n';
  PrintSubtree(model, 0, 0, std::cout);
  for (const auto &r : model.growth_trace.splits)
    std::cout << "step " << r.step << ": split " << r.leaf_split << " on q"
              << r.question_id << ", gain " << FormatDouble(r.gain) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Two-stage word-level prosody tagging"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", verbosity, "Log progress to stderr");

  Paths paths;
  TaggerConfig config;
  SynthSpec spec;
  bool binary = false;

  auto *fit = app.add_subcommand("fit", "Grow the tree and fit per-leaf GMMs");
  fit->add_option("--lexicon", paths.lexicon, "Lexicon (JSON lines)")->required();
  fit->add_option("--embeddings", paths.embeddings, "Embeddings (JSON lines or PTE1)")
      ->required();
  fit->add_option("--questions", paths.questions, "Question set (JSON lines)")
      ->required();
  fit->add_option("--classes", paths.classes, "Phoneme class table (JSON)")->required();
  fit->add_option("--out,--model", paths.out, "Model file to write")->required();
  fit->add_option("--max-leaves", config.max_leaves, "Maximum number of leaves")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit->add_option("--components", config.components, "GMM components per leaf")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit->add_option("--min-gain", config.min_gain, "Stop when the best gain is lower")
      ->capture_default_str();
  fit->add_option("--min-leaf", config.min_leaf, "Minimum samples per child")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit->add_option("--var-floor", config.floor, "Variance floor")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  fit->add_option("--trace-csv", paths.trace_csv, "Growth curve CSV to write");
  fit->add_option("--tags-out", paths.tags_out, "Training-set tags to write");

  auto *tag = app.add_subcommand("tag", "Tag embeddings with a fitted model");
  tag->add_option("--model", paths.model, "Model file")->required();
  tag->add_option("--lexicon", paths.lexicon, "Lexicon (JSON lines)")->required();
  tag->add_option("--embeddings", paths.embeddings, "Embeddings")->required();
  tag->add_option("--out", paths.out, "Tag file to write (default: stdout)");

  auto *stats = app.add_subcommand("stats", "Growth curve and per-leaf statistics");
  stats->add_option("--model", paths.model, "Model file")->required();
  stats->add_option("--out,--trace-csv", paths.out,
                    "Growth curve CSV to write (default: stdout)");

  auto *synth = app.add_subcommand("synth", "Write a synthetic corpus");
  synth->add_option("--out", paths.out, "Output directory")->required();
  synth->add_option("--archetypes", spec.archetypes)->capture_default_str();
  synth->add_option("--words-per-archetype", spec.words_per_archetype)
      ->capture_default_str();
  synth->add_option("--tokens-per-word", spec.tokens_per_word)->capture_default_str();
  synth->add_option("--components-per-archetype", spec.components_per_archetype)
      ->capture_default_str();
  synth->add_option("--dim", spec.dim)->capture_default_str();
  synth->add_option("--separation", spec.separation)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_flag("--class-features", spec.class_features,
                  "Also separate archetypes by closed final syllable");
  synth->add_flag("--binary", binary, "Write embeddings in the PTE1 format");

  auto *inspect = app.add_subcommand("inspect", "Print the tree and leaf GMMs");
  inspect->add_option("--model", paths.model, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit) return CmdFit(paths, config);
    if (*tag) return CmdTag(paths);
    if (*stats) return CmdStats(paths);
    if (*synth) return CmdSynth(paths, spec, binary);
    if (*inspect) return CmdInspect(paths);
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
