// prosody/synth.h

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

#ifndef PROSODY_SYNTH_H_
#define PROSODY_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prosody/gaussian.h"
#include "prosody/phonetics.h"
#include "prosody/tagger.h"
#include "prosody/tree.h"

namespace prosody {

/// Shape of a synthetic corpus with planted structure. Archetypes are word
/// groups that the phonetic questions can tell apart; within an archetype,
/// embeddings come from a diagonal GMM with unit variance whose means are
/// `separation` apart.
struct SynthSpec {
  int archetypes = 10;
  int words_per_archetype = 50;
  int tokens_per_word = 10;
  int components_per_archetype = 5;
  int dim = 16;
  double separation = 8.0;
  std::uint64_t seed = 0;
  /// Tell archetypes apart by word-final closed syllable as well as by
  /// phoneme count.
  bool class_features = false;

  /// Throws SpecError.
  void Validate() const;
  int MaxArchetypes() const { return class_features ? 32 : 16; }
  /// Phoneme count of every word in archetype `a`.
  int PhonemeCount(int a) const;
};

struct TruthRecord {
  std::string token_id;
  int archetype = 0;
  int component = 0;

  bool operator==(const TruthRecord &) const = default;
};

struct SynthCorpus {
  std::vector<WordEntry> lexicon;
  PhonemeClassTable classes;
  std::vector<Question> questions;
  std::vector<ProsodySample> samples;
  std::vector<TruthRecord> truth;
};

SynthCorpus GenerateSynthCorpus(const SynthSpec &spec);

/// Phoneme classes used by the generator; also a reasonable ARPAbet-style
/// default table.
PhonemeClassTable SynthClassTable();

struct SynthFiles {
  std::filesystem::path lexicon, questions, classes, embeddings, truth;
};

/// File names the generator writes inside `dir`.
SynthFiles SynthFileNames(const std::filesystem::path &dir, bool binary);
/// Writes all five files atomically. Returns their paths.
SynthFiles WriteSynthCorpus(const SynthCorpus &corpus,
                            const std::filesystem::path &dir, bool binary);

void WriteTruth(std::ostream &os, std::span<const TruthRecord> truth);
std::vector<TruthRecord> ReadTruth(std::istream &is);

/// Adjusted Rand index of two labelings of the same items (dense label ids).
double AdjustedRandIndex(std::span<const int> a, std::span<const int> b);

/// ARI between emitted tags and planted (archetype, component) labels.
/// Throws ValidationError unless both cover the same token ids.
double AdjustedRandIndex(std::span<const TokenTag> predicted,
                         std::span<const TruthRecord> truth);

struct GrowthRow {
  int num_leaves = 1;
  double total_leaf_ll = 0.0;
  double avg_samples_per_leaf = 0.0;
};

/// One row for the single-leaf start and one per split.
std::vector<GrowthRow> GrowthReport(const GrowthTrace &trace);
/// CSV with header "num_leaves,total_leaf_ll,avg_samples_per_leaf".
void WriteGrowthCsv(std::ostream &os, std::span<const GrowthRow> rows);

/// Shortest text that reads back to the same double.
std::string FormatDouble(double v);

}  // namespace prosody

#endif  // PROSODY_SYNTH_H_
