// prosody/tagger.h

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

#ifndef PROSODY_TAGGER_H_
#define PROSODY_TAGGER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "prosody/gmm.h"
#include "prosody/phonetics.h"
#include "prosody/tree.h"

namespace prosody {

inline constexpr int kModelFormatVersion = 1;

/// Leaf letter plus mixture component, written "d3".
struct ProsodyTag {
  std::string leaf;
  int component = 0;

  std::string ToString() const { return leaf + std::to_string(component); }
  /// Throws ParseError unless `s` is [a-z]+[0-9]+.
  static ProsodyTag Parse(std::string_view s);

  auto operator<=>(const ProsodyTag &) const = default;
};

struct TaggerConfig {
  int dim = 0;  // 0: take it from the data
  int components = 5;
  int max_leaves = 10;
  double min_gain = 0.0;
  std::int64_t min_leaf = 10;
  double floor = 1e-6;
  std::uint64_t seed = 0;
  int max_iters = 200;
  double rel_tol = 1e-6;

  void Validate() const;
  TreeConfig Tree() const;
  GmmConfig Gmm() const;
};

struct TaggerModel {
  int format_version = kModelFormatVersion;
  TaggerConfig config;
  PhonemeClassTable classes;
  std::vector<Question> questions;
  DecisionTree tree;
  /// Indexed by leaf index.
  std::vector<LeafGmm> gmms;
  GrowthTrace growth_trace;
  /// Training samples per leaf, indexed by leaf index.
  std::vector<std::int64_t> leaf_counts;

  /// Throws ModelError if the parts do not fit together.
  void Validate() const;
  const LeafGmm &GmmForLeaf(const std::string &letter) const;
};

struct TokenTag {
  std::string token_id;
  std::string word;
  ProsodyTag tag;
};

struct FitResult {
  TaggerModel model;
  /// Tags of the training tokens, in input order.
  std::vector<TokenTag> tags;
};

/// Grows the tree on all samples, then fits one GMM per leaf. A leaf with
/// fewer samples than components gets max(1, n) components instead.
FitResult Fit(std::span<const WordEntry> lexicon,
              std::span<const ProsodySample> samples,
              std::span<const Question> questions,
              const PhonemeClassTable &classes, const TaggerConfig &config);

ProsodyTag Tag(const TaggerModel &model, const WordEntry &word,
               const Eigen::Ref<const VectorXd> &embedding);

/// Tags every sample; each sample's word must be in `lexicon`.
std::vector<TokenTag> TagAll(const TaggerModel &model,
                             std::span<const WordEntry> lexicon,
                             std::span<const ProsodySample> samples);

/// Every tag the model can emit: leaves in letter order, components
/// ascending.
std::vector<ProsodyTag> TagInventory(const TaggerModel &model);

nlohmann::json ModelToJson(const TaggerModel &model);
TaggerModel ModelFromJson(const nlohmann::json &j);
void SaveModel(const TaggerModel &model, std::ostream &os);
TaggerModel LoadModel(std::istream &is);

/// {"token_id", "word", "tag"} per line.
void WriteTags(std::ostream &os, std::span<const TokenTag> tags);
std::vector<TokenTag> ReadTags(std::istream &is);

}  // namespace prosody

#endif  // PROSODY_TAGGER_H_
