// prosody/tree.h

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

#ifndef PROSODY_TREE_H_
#define PROSODY_TREE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prosody/gaussian.h"
#include "prosody/phonetics.h"

namespace prosody {

/// Leaf names in creation order: 0 -> "a", 25 -> "z", 26 -> "aa", 27 -> "ab".
std::string LeafLetter(int leaf_index);
/// Inverse of LeafLetter. Throws ParseError on anything but [a-z]+.
int LeafIndexFromLetter(std::string_view letter);

struct TreeNode {
  bool is_leaf = true;
  int leaf_index = 0;   // valid when is_leaf
  int question_id = -1; // valid when !is_leaf
  int yes_child = -1;
  int no_child = -1;

  bool operator==(const TreeNode &) const = default;
};

/// Binary tree over word types. Node 0 is the root.
class DecisionTree {
 public:
  DecisionTree();
  /// Throws ModelError if the nodes do not form a proper tree with leaf
  /// indices 0..l-1 each used once.
  DecisionTree(std::vector<TreeNode> nodes, std::vector<std::string> leaf_letters);

  const std::vector<TreeNode> &nodes() const { return nodes_; }
  const std::vector<std::string> &leaf_letters() const { return leaf_letters_; }
  int NumLeaves() const { return static_cast<int>(leaf_letters_.size()); }
  int Depth() const;

  /// Turns the leaf at node `node` into an internal node. The yes child keeps
  /// the leaf's index; the no child gets the next unused leaf index.
  /// Returns {yes_node, no_node}.
  std::pair<int, int> SplitLeaf(int node, int question_id);

  /// Node id holding leaf `leaf_index`.
  int LeafNode(int leaf_index) const;

  bool operator==(const DecisionTree &) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::string> leaf_letters_;
};

struct SplitRecord {
  int step = 0;             // 1-based: the tree has step+1 leaves afterwards
  std::string leaf_split;   // letter of the leaf that was split
  int question_id = -1;
  double gain = 0.0;
  double total_leaf_ll = 0.0;
  double avg_samples_per_leaf = 0.0;
};

/// Tree growth history: the single-leaf starting point plus one record per
/// split.
struct GrowthTrace {
  std::int64_t num_samples = 0;
  double root_ll = 0.0;
  std::vector<SplitRecord> splits;
};

struct TreeConfig {
  int max_leaves = 10;
  double min_gain = 0.0;
  std::int64_t min_leaf = 10;
  double floor = 1e-6;

  void Validate() const;
};

/// Samples of one word type, already summarized.
struct WordGroup {
  int word = 0;  // index into the lexicon
  Stats stats;
};

/// Lexicon-indexed answers of every question, plus the per-word sample
/// statistics the tree is grown on.
class TreeCorpus {
 public:
  /// Groups samples by word in first-appearance order. Throws ValidationError
  /// naming any word missing from the lexicon.
  TreeCorpus(std::span<const WordEntry> lexicon,
             std::span<const ProsodySample> samples,
             std::span<const Question> questions,
             const PhonemeClassTable &classes);

  const std::vector<WordGroup> &groups() const { return groups_; }
  /// Questions ordered by ascending id.
  const std::vector<Question> &questions() const { return questions_; }
  /// answers()[g][q]: answer of question q (sorted position) for group g.
  bool Answer(std::size_t group, std::size_t question) const {
    return answers_[group * questions_.size() + question] != 0;
  }
  std::int64_t NumSamples() const { return num_samples_; }
  Eigen::Index Dim() const { return dim_; }
  /// Group index of a word in the lexicon, or -1.
  int GroupOfWord(int lexicon_index) const;

 private:
  std::vector<WordGroup> groups_;
  std::vector<Question> questions_;
  std::vector<char> answers_;
  std::vector<int> group_of_word_;
  std::int64_t num_samples_ = 0;
  Eigen::Index dim_ = 0;
};

struct SplitCandidate {
  int question_id = -1;
  double gain = 0.0;
};

/// Best question for splitting the word groups `members` (indices into
/// corpus.groups()). Both sides need at least min_leaf samples. Ties go to
/// the smallest question id. Empty if no question gives a valid split.
std::optional<SplitCandidate> BestSplitForLeaf(const TreeCorpus &corpus,
                                               std::span<const int> members,
                                               double floor,
                                               std::int64_t min_leaf);

struct GrownTree {
  DecisionTree tree;
  GrowthTrace trace;
  /// leaf index -> word groups it holds
  std::vector<std::vector<int>> leaf_members;
};

/// Greedy growth: repeatedly split the leaf whose best question gains the
/// most, until max_leaves is reached, the best gain falls below min_gain or
/// no leaf can be split. Ties go to the lowest leaf index.
GrownTree GrowTree(const TreeCorpus &corpus, const TreeConfig &config);

/// Leaf letter of a word, seen in training or not.
std::string RouteWord(const DecisionTree &tree, const WordEntry &word,
                      std::span<const Question> questions,
                      const PhonemeClassTable &classes);

/// Same as RouteWord, returning the leaf index.
int RouteWordToLeaf(const DecisionTree &tree, const WordEntry &word,
                    std::span<const Question> questions,
                    const PhonemeClassTable &classes);

}  // namespace prosody

#endif  // PROSODY_TREE_H_
