// src/synth.cc

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

#include "prosody/synth.h"

#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <unordered_map>

#include "prosody/embedding_io.h"
#include "prosody/error.h"
#include "prosody/json_lines.h"

namespace prosody {

using nlohmann::json;

namespace {

const std::vector<std::string> kVowels = {"AA", "AE", "AH", "EH",
                                          "IH", "IY", "OW", "UW"};
const std::vector<std::string> kNasals = {"M", "N", "NG"};
const std::vector<std::string> kPlosives = {"P", "B", "T", "D", "K", "G"};
const std::vector<std::string> kFricatives = {"F", "V", "S", "Z", "SH", "HH"};
const std::vector<std::string> kLiquids = {"L", "R", "W", "Y"};

std::vector<std::string> Consonants() {
  std::vector<std::string> all;
  for (const auto *group : {&kNasals, &kPlosives, &kFricatives, &kLiquids})
    all.insert(all.end(), group->begin(), group->end());
  return all;
}

template <typename Rng>
const std::string &Pick(const std::vector<std::string> &from, Rng &rng) {
  return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
}

// Alternating consonant/vowel string of the requested length. `closed`
// forces the word-final phoneme to be a consonant (true) or vowel (false).
WordEntry MakeWord(std::string name, int length, std::optional<bool> closed,
                   std::mt19937_64 &rng) {
  static const std::vector<std::string> consonants = Consonants();
  std::bernoulli_distribution coin(0.5);
  const bool vowel_first = coin(rng);
  WordEntry w;
  w.word = std::move(name);
  std::vector<bool> is_vowel(length);
  for (int i = 0; i < length; ++i) is_vowel[i] = ((i % 2 == 0) == vowel_first);
  if (closed) is_vowel[length - 1] = !*closed;
  for (int i = 0; i < length; ++i)
    w.phonemes.push_back(Pick(is_vowel[i] ? kVowels : consonants, rng));
  w.syllable_breaks.push_back(0);
  for (int i = 1; i + 1 < length; ++i)
    if (!is_vowel[i] && is_vowel[i + 1]) w.syllable_breaks.push_back(i);
  if (std::bernoulli_distribution(0.8)(rng))
    w.stress_syllable = std::uniform_int_distribution<int>(
        0, static_cast<int>(w.syllable_breaks.size()) - 1)(rng);
  return w;
}

}  // namespace

void SynthSpec::Validate() const {
  if (archetypes < 1 || words_per_archetype < 1 || tokens_per_word < 1 ||
      components_per_archetype < 1 || dim < 1)
    throw SpecError("synthetic corpus counts and dimension must all be >= 1");
  if (!(separation > 0.0) || !std::isfinite(separation))
    throw SpecError("component separation must be positive");
  if (archetypes > MaxArchetypes())
    throw SpecError("cannot build " + std::to_string(archetypes) +
                    " phonetically distinct archetypes; at most " +
                    std::to_string(MaxArchetypes()) +
                    (class_features ? "" : " (more with class features)"));
  if (components_per_archetype > dim)
    throw SpecError("components_per_archetype (" +
                    std::to_string(components_per_archetype) +
                    ") must not exceed the dimension (" + std::to_string(dim) +
                    ")");
}

int SynthSpec::PhonemeCount(int a) const {
  return 3 + 3 * (class_features ? a / 2 : a);
}

PhonemeClassTable SynthClassTable() {
  auto set = [](const std::vector<std::string> &v) {
    return std::set<std::string>(v.begin(), v.end());
  };
  return PhonemeClassTable({{"Vowel", set(kVowels)},
                            {"Nasal", set(kNasals)},
                            {"Plosive", set(kPlosives)},
                            {"Fricative", set(kFricatives)},
                            {"Liquid", set(kLiquids)}});
}

SynthCorpus GenerateSynthCorpus(const SynthSpec &spec) {
  spec.Validate();
  SynthCorpus out;
  out.classes = SynthClassTable();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Questions: one phoneme-count threshold between each pair of adjacent
  // archetype lengths, then distractors of the other kinds.
  std::set<int> lengths;
  for (int a = 0; a < spec.archetypes; ++a) lengths.insert(spec.PhonemeCount(a));
  int next_id = 0;
  auto add_question = [&](QuestionKind kind, std::optional<int> i,
                          std::optional<std::string> c) {
    out.questions.push_back(Question{next_id++, kind, i, std::move(c)});
  };
  for (auto it = lengths.begin(); std::next(it) != lengths.end(); ++it)
    add_question(QuestionKind::kPhonemeCountGt, *it + 1, std::nullopt);
  add_question(QuestionKind::kEndsClosedSyllable, std::nullopt, std::nullopt);
  add_question(QuestionKind::kStartsWithClass, std::nullopt, "Vowel");
  add_question(QuestionKind::kEndsWithClass, std::nullopt, "Nasal");
  add_question(QuestionKind::kContainsClass, std::nullopt, "Fricative");
  add_question(QuestionKind::kSyllableCountGt, 1, std::nullopt);
  add_question(QuestionKind::kStressOnSyllable, 0, std::nullopt);

  const double offset = spec.separation / std::sqrt(2.0);
  for (int a = 0; a < spec.archetypes; ++a) {
    VectorXd center(spec.dim);
    for (int j = 0; j < spec.dim; ++j) center[j] = 3.0 * normal(rng);
    std::vector<VectorXd> means(spec.components_per_archetype, center);
    for (int k = 0; k < spec.components_per_archetype; ++k) means[k][k] += offset;

    std::optional<bool> closed;
    if (spec.class_features) closed = (a % 2 == 1);
    int token_in_archetype = 0;
    for (int w = 0; w < spec.words_per_archetype; ++w) {
      WordEntry word = MakeWord("a" + std::to_string(a) + "w" + std::to_string(w),
                                spec.PhonemeCount(a), closed, rng);
      for (int t = 0; t < spec.tokens_per_word; ++t) {
        const int k = token_in_archetype++ % spec.components_per_archetype;
        ProsodySample s;
        s.word = word.word;
        s.token_id = word.word + "t" + std::to_string(t);
        s.embedding.resize(spec.dim);
        for (int j = 0; j < spec.dim; ++j) s.embedding[j] = means[k][j] + normal(rng);
        out.truth.push_back(TruthRecord{s.token_id, a, k});
        out.samples.push_back(std::move(s));
      }
      out.lexicon.push_back(std::move(word));
    }
  }
  return out;
}

SynthFiles SynthFileNames(const std::filesystem::path &dir, bool binary) {
  return SynthFiles{dir / "lexicon.jsonl", dir / "questions.jsonl",
                    dir / "classes.json",
                    dir / (binary ? "embeddings.bin" : "embeddings.jsonl"),
                    dir / "truth.jsonl"};
}

SynthFiles WriteSynthCorpus(const SynthCorpus &corpus,
                            const std::filesystem::path &dir, bool binary) {
  std::filesystem::create_directories(dir);
  const SynthFiles files = SynthFileNames(dir, binary);
  WriteFileAtomic(files.lexicon,
                  [&](std::ostream &os) { WriteLexicon(os, corpus.lexicon); });
  WriteFileAtomic(files.questions,
                  [&](std::ostream &os) { WriteQuestions(os, corpus.questions); });
  WriteFileAtomic(files.classes,
                  [&](std::ostream &os) { WriteClassTable(os, corpus.classes); });
  if (binary)
    WriteFileAtomic(
        files.embeddings,
        [&](std::ostream &os) { WriteEmbeddingsBinary(os, corpus.samples); },
        std::ios::binary);
  else
    WriteFileAtomic(files.embeddings, [&](std::ostream &os) {
      WriteEmbeddingsJsonl(os, corpus.samples);
    });
  WriteFileAtomic(files.truth,
                  [&](std::ostream &os) { WriteTruth(os, corpus.truth); });
  return files;
}

void WriteTruth(std::ostream &os, std::span<const TruthRecord> truth) {
  for (const auto &t : truth)
    os << json{{"token_id", t.token_id},
               {"archetype", t.archetype},
               {"component", t.component}}
              .dump()
       << '\n';
}

std::vector<TruthRecord> ReadTruth(std::istream &is) {
  std::vector<TruthRecord> truth;
  ForEachJsonLine(is, [&](const json &j, std::size_t line) {
    try {
      truth.push_back(TruthRecord{j.at("token_id").get<std::string>(),
                                  j.at("archetype").get<int>(),
                                  j.at("component").get<int>()});
    } catch (const json::exception &e) {
      throw ParseError(std::string("bad truth record: ") + e.what(), line);
    }
  });
  return truth;
}

double AdjustedRandIndex(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw ValidationError("ARI of labelings of different sizes");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto &[_, c] : cells) index += comb2(c);
  for (const auto &[_, c] : rows) sum_rows += comb2(c);
  for (const auto &[_, c] : cols) sum_cols += comb2(c);
  const double expected = sum_rows * sum_cols / comb2(static_cast<double>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Both labelings trivial (one cluster, or all singletons) and identical.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double AdjustedRandIndex(std::span<const TokenTag> predicted,
                         std::span<const TruthRecord> truth) {
  if (predicted.size() != truth.size())
    throw ValidationError("predicted and true token sets differ in size (" +
                          std::to_string(predicted.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
  std::unordered_map<std::string_view, int> truth_label;
  std::map<std::pair<int, int>, int> truth_ids;
  for (const auto &t : truth) {
    auto [it, _] = truth_ids.emplace(std::pair{t.archetype, t.component},
                                     static_cast<int>(truth_ids.size()));
    if (!truth_label.emplace(t.token_id, it->second).second)
      throw ValidationError("duplicate token '" + t.token_id + "' in truth");
  }
  std::map<std::string, int> tag_ids;
  std::vector<int> a, b;
  a.reserve(predicted.size());
  b.reserve(predicted.size());
  for (const auto &p : predicted) {
    auto it = truth_label.find(p.token_id);
    if (it == truth_label.end())
      throw ValidationError("token '" + p.token_id + "' has no ground truth");
    auto [tag, _] =
        tag_ids.emplace(p.tag.ToString(), static_cast<int>(tag_ids.size()));
    a.push_back(tag->second);
    b.push_back(it->second);
  }
  return AdjustedRandIndex(a, b);
}

std::vector<GrowthRow> GrowthReport(const GrowthTrace &trace) {
  std::vector<GrowthRow> rows;
  rows.push_back(GrowthRow{1, trace.root_ll,
                           static_cast<double>(trace.num_samples)});
  for (const auto &r : trace.splits)
    rows.push_back(GrowthRow{r.step + 1, r.total_leaf_ll, r.avg_samples_per_leaf});
  return rows;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void WriteGrowthCsv(std::ostream &os, std::span<const GrowthRow> rows) {
  os << "num_leaves,total_leaf_ll,avg_samples_per_leaf\n";
  for (const auto &r : rows)
    os << r.num_leaves << ',' << FormatDouble(r.total_leaf_ll) << ','
       << FormatDouble(r.avg_samples_per_leaf) << '\n';
}

}  // namespace prosody
