// tests/oracles.h

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

// Independent reference computations and random generators for tests.
// Nothing here calls into the library's numerical code paths.

#ifndef PROSODY_TESTS_ORACLES_H_
#define PROSODY_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "prosody/gaussian.h"
#include "prosody/phonetics.h"

namespace prosody::testing {

using Point = std::vector<double>;

/// Sum over samples of log N(x | mu, diag(var)) with mu and var estimated by
/// two passes over the points, var clamped at `floor`.
inline double PerSampleLogLikelihood(const std::vector<Point> &xs, double floor) {
  const std::size_t n = xs.size(), d = xs.front().size();
  double ll = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto &x : xs) mean += x[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto &x : xs) var += (x[j] - mean) * (x[j] - mean);
    var = std::max(floor, var / static_cast<double>(n));
    for (const auto &x : xs)
      ll += -0.5 * std::log(2.0 * std::numbers::pi * var) -
            0.5 * (x[j] - mean) * (x[j] - mean) / var;
  }
  return ll;
}

/// Diagonal Gaussian log density, one dimension at a time.
inline double LogDensity(const Point &x, const Point &mean, const Point &var) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    s += -0.5 * std::log(2.0 * std::numbers::pi * var[j]) -
         (x[j] - mean[j]) * (x[j] - mean[j]) / (2.0 * var[j]);
  return s;
}

inline Point ToPoint(const VectorXd &v) { return Point(v.begin(), v.end()); }

/// ARI by counting agreeing pairs directly.
inline double PairCountingAri(const std::vector<int> &a, const std::vector<int> &b) {
  const std::size_t n = a.size();
  double both = 0, only_a = 0, only_b = 0, neither = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb) ++both;
      else if (sa) ++only_a;
      else if (sb) ++only_b;
      else ++neither;
    }
  const double pairs = both + only_a + only_b + neither;
  const double same_a = both + only_a, same_b = both + only_b;
  const double expected = same_a * same_b / pairs;
  const double max_index = 0.5 * (same_a + same_b);
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

/// Random valid word over the given phoneme inventory.
inline WordEntry RandomWord(std::mt19937_64 &rng, const std::vector<std::string> &phones,
                            const std::string &name, int max_len = 9) {
  WordEntry w;
  w.word = name;
  const int len = std::uniform_int_distribution<int>(1, max_len)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, phones.size() - 1);
  for (int i = 0; i < len; ++i) w.phonemes.push_back(phones[pick(rng)]);
  w.syllable_breaks.push_back(0);
  for (int i = 1; i < len; ++i)
    if (std::bernoulli_distribution(0.4)(rng)) w.syllable_breaks.push_back(i);
  if (std::bernoulli_distribution(0.7)(rng))
    w.stress_syllable = std::uniform_int_distribution<int>(
        0, static_cast<int>(w.syllable_breaks.size()) - 1)(rng);
  return w;
}

inline PhonemeClassTable SmallClassTable() {
  return PhonemeClassTable({{"Vowel", {"AA", "AE", "IY", "UW"}},
                            {"Nasal", {"M", "N"}},
                            {"Plosive", {"P", "T", "K"}},
                            {"Fricative", {"S", "F"}}});
}

inline std::vector<std::string> SmallPhoneSet() {
  return {"AA", "AE", "IY", "UW", "M", "N", "P", "T", "K", "S", "F", "L"};
}

/// Random question over the small class table.
inline Question RandomQuestion(std::mt19937_64 &rng, int id) {
  static const std::vector<std::string> classes = {"Vowel", "Nasal", "Plosive",
                                                   "Fricative"};
  Question q;
  q.id = id;
  q.kind = kAllQuestionKinds[std::uniform_int_distribution<int>(0, 6)(rng)];
  switch (q.kind) {
    case QuestionKind::kPhonemeCountGt:
      q.int_param = std::uniform_int_distribution<int>(1, 7)(rng);
      break;
    case QuestionKind::kSyllableCountGt:
      q.int_param = std::uniform_int_distribution<int>(1, 3)(rng);
      break;
    case QuestionKind::kStressOnSyllable:
      q.int_param = std::uniform_int_distribution<int>(0, 2)(rng);
      break;
    case QuestionKind::kEndsClosedSyllable:
      break;
    default:
      q.class_param = classes[std::uniform_int_distribution<std::size_t>(0, 3)(rng)];
  }
  return q;
}

/// A leaf as the greedy oracle sees it: the set of word indices it holds.
struct OracleSplit {
  int leaf = -1;
  int question_id = -1;
  double gain = 0.0;
};

struct OracleTree {
  /// Leaf membership by leaf index, in the same naming scheme as the
  /// library: a split leaf keeps its index for the "yes" side.
  std::vector<std::set<int>> leaves;
  std::vector<OracleSplit> splits;
};

/// Greedy tree growth by brute force: at every step evaluates every
/// (leaf, question) pair from raw points and picks the largest gain, ties
/// to the lowest leaf index then lowest question id.
inline OracleTree GreedyOracle(const std::vector<WordEntry> &lexicon,
                               const std::vector<std::vector<Point>> &word_points,
                               std::vector<Question> questions,
                               const PhonemeClassTable &classes, int max_leaves,
                               double min_gain, std::size_t min_leaf, double floor) {
  std::sort(questions.begin(), questions.end(),
            [](const Question &a, const Question &b) { return a.id < b.id; });
  auto points_of = [&](const std::set<int> &words) {
    std::vector<Point> pts;
    for (int w : words)
      pts.insert(pts.end(), word_points[w].begin(), word_points[w].end());
    return pts;
  };
  OracleTree tree;
  std::set<int> all;
  for (std::size_t w = 0; w < lexicon.size(); ++w)
    if (!word_points[w].empty()) all.insert(static_cast<int>(w));
  tree.leaves.push_back(all);
  while (static_cast<int>(tree.leaves.size()) < max_leaves) {
    std::optional<OracleSplit> best;
    std::set<int> best_yes, best_no;
    for (std::size_t l = 0; l < tree.leaves.size(); ++l) {
      const auto parent = points_of(tree.leaves[l]);
      const double parent_ll = PerSampleLogLikelihood(parent, floor);
      for (const auto &q : questions) {
        std::set<int> yes, no;
        for (int w : tree.leaves[l])
          (AnswerQuestion(q, lexicon[w], classes) ? yes : no).insert(w);
        const auto py = points_of(yes), pn = points_of(no);
        if (py.size() < min_leaf || pn.size() < min_leaf) continue;
        const double gain = PerSampleLogLikelihood(py, floor) +
                            PerSampleLogLikelihood(pn, floor) - parent_ll;
        // Near-equal gains count as ties so that rounding differences between
        // the two routes cannot flip the choice.
        if (!best || gain > best->gain + 1e-9 * (1.0 + std::abs(gain))) {
          best = OracleSplit{static_cast<int>(l), q.id, gain};
          best_yes = yes;
          best_no = no;
        }
      }
    }
    if (!best || best->gain < min_gain) break;
    tree.leaves[best->leaf] = best_yes;
    tree.leaves.push_back(best_no);
    tree.splits.push_back(*best);
  }
  return tree;
}

}  // namespace prosody::testing

#endif  // PROSODY_TESTS_ORACLES_H_
