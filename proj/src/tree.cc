// src/tree.cc

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

#include "prosody/tree.h"

#include <algorithm>
#include <unordered_map>

#include "prosody/error.h"

namespace prosody {

std::string LeafLetter(int leaf_index) {
  if (leaf_index < 0)
    throw ConfigError("negative leaf index " + std::to_string(leaf_index));
  std::string s;
  int n = leaf_index + 1;
  while (n > 0) {
    --n;
    s.insert(s.begin(), static_cast<char>('a' + n % 26));
    n /= 26;
  }
  return s;
}

int LeafIndexFromLetter(std::string_view letter) {
  if (letter.empty() || letter.size() > 6)
    throw ParseError("bad leaf letter '" + std::string(letter) + "'");
  int n = 0;
  for (char c : letter) {
    if (c < 'a' || c > 'z')
      throw ParseError("bad leaf letter '" + std::string(letter) + "'");
    n = n * 26 + (c - 'a' + 1);
  }
  return n - 1;
}

DecisionTree::DecisionTree() : nodes_(1), leaf_letters_{LeafLetter(0)} {}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes,
                           std::vector<std::string> leaf_letters)
    : nodes_(std::move(nodes)), leaf_letters_(std::move(leaf_letters)) {
  if (nodes_.empty()) throw ModelError("decision tree has no nodes");
  const int num_nodes = static_cast<int>(nodes_.size());
  std::vector<int> parent_count(nodes_.size(), 0);
  std::vector<int> leaf_seen(leaf_letters_.size(), 0);
  int leaves = 0;
  for (const auto &node : nodes_) {
    if (node.is_leaf) {
      ++leaves;
      if (node.leaf_index < 0 || node.leaf_index >= NumLeaves())
        throw ModelError("leaf index " + std::to_string(node.leaf_index) +
                         " out of range");
      if (leaf_seen[node.leaf_index]++)
        throw ModelError("leaf index " + std::to_string(node.leaf_index) +
                         " used twice");
    } else {
      for (int child : {node.yes_child, node.no_child}) {
        if (child <= 0 || child >= num_nodes)
          throw ModelError("child index " + std::to_string(child) +
                           " out of range");
        ++parent_count[child];
      }
    }
  }
  if (leaves != NumLeaves())
    throw ModelError("tree has " + std::to_string(leaves) + " leaves but " +
                     std::to_string(NumLeaves()) + " leaf letters");
  for (int i = 1; i < num_nodes; ++i)
    if (parent_count[i] != 1)
      throw ModelError("node " + std::to_string(i) + " has " +
                       std::to_string(parent_count[i]) + " parents");
  for (int i = 0; i < NumLeaves(); ++i)
    if (leaf_letters_[i] != LeafLetter(i))
      throw ModelError("leaf " + std::to_string(i) + " is named '" +
                       leaf_letters_[i] + "', expected '" + LeafLetter(i) + "'");
  // Every non-root node has exactly one parent and there are l-1 internal
  // nodes for l leaves, so a cycle would leave some node unreachable.
  std::vector<int> stack{0};
  int reached = 0;
  while (!stack.empty()) {
    const TreeNode &node = nodes_[stack.back()];
    stack.pop_back();
    if (++reached > num_nodes) throw ModelError("decision tree has a cycle");
    if (!node.is_leaf) {
      stack.push_back(node.yes_child);
      stack.push_back(node.no_child);
    }
  }
  if (reached != num_nodes)
    throw ModelError("decision tree has unreachable nodes");
}

int DecisionTree::Depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int depth = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    depth = std::max(depth, d);
    if (!nodes_[id].is_leaf) {
      stack.emplace_back(nodes_[id].yes_child, d + 1);
      stack.emplace_back(nodes_[id].no_child, d + 1);
    }
  }
  return depth;
}

std::pair<int, int> DecisionTree::SplitLeaf(int node, int question_id) {
  if (node < 0 || node >= static_cast<int>(nodes_.size()) ||
      !nodes_[node].is_leaf)
    throw ConsistencyError("node " + std::to_string(node) + " is not a leaf");
  const int yes = static_cast<int>(nodes_.size());
  const int no = yes + 1;
  const int new_leaf = NumLeaves();
  TreeNode yes_node;
  yes_node.leaf_index = nodes_[node].leaf_index;
  TreeNode no_node;
  no_node.leaf_index = new_leaf;
  nodes_[node] = TreeNode{false, -1, question_id, yes, no};
  nodes_.push_back(yes_node);
  nodes_.push_back(no_node);
  leaf_letters_.push_back(LeafLetter(new_leaf));
  return {yes, no};
}

int DecisionTree::LeafNode(int leaf_index) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf && nodes_[i].leaf_index == leaf_index)
      return static_cast<int>(i);
  throw ConsistencyError("no leaf with index " + std::to_string(leaf_index));
}

void TreeConfig::Validate() const {
  if (max_leaves < 1) throw ConfigError("max_leaves must be >= 1");
  if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
  if (!(floor > 0.0)) throw ConfigError("variance floor must be positive");
  if (!std::isfinite(min_gain)) throw ConfigError("min_gain must be finite");
}

TreeCorpus::TreeCorpus(std::span<const WordEntry> lexicon,
                       std::span<const ProsodySample> samples,
                       std::span<const Question> questions,
                       const PhonemeClassTable &classes)
    : questions_(questions.begin(), questions.end()),
      group_of_word_(lexicon.size(), -1) {
  if (samples.empty()) throw ValidationError("corpus has no samples");
  std::sort(questions_.begin(), questions_.end(),
            [](const Question &a, const Question &b) { return a.id < b.id; });
  ValidateQuestionSet(questions_, classes);

  std::unordered_map<std::string_view, int> word_index;
  for (std::size_t i = 0; i < lexicon.size(); ++i)
    word_index.emplace(lexicon[i].word, static_cast<int>(i));

  dim_ = samples.front().embedding.size();
  for (const auto &s : samples) {
    auto it = word_index.find(s.word);
    if (it == word_index.end())
      throw ValidationError("word '" + s.word + "' of token '" + s.token_id +
                            "' is not in the lexicon");
    int &group = group_of_word_[it->second];
    if (group < 0) {
      group = static_cast<int>(groups_.size());
      groups_.push_back(WordGroup{it->second, Stats(dim_)});
    }
    groups_[group].stats.Add(s.embedding);
  }
  num_samples_ = static_cast<std::int64_t>(samples.size());

  answers_.resize(groups_.size() * questions_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g)
    for (std::size_t q = 0; q < questions_.size(); ++q)
      answers_[g * questions_.size() + q] =
          AnswerQuestion(questions_[q], lexicon[groups_[g].word], classes);
}

int TreeCorpus::GroupOfWord(int lexicon_index) const {
  if (lexicon_index < 0 ||
      lexicon_index >= static_cast<int>(group_of_word_.size()))
    return -1;
  return group_of_word_[lexicon_index];
}

namespace {

Stats SumGroups(const TreeCorpus &corpus, std::span<const int> members) {
  Stats total(corpus.Dim());
  for (int g : members) total += corpus.groups()[g].stats;
  return total;
}

}  // namespace

std::optional<SplitCandidate> BestSplitForLeaf(const TreeCorpus &corpus,
                                               std::span<const int> members,
                                               double floor,
                                               std::int64_t min_leaf) {
  const Stats parent = SumGroups(corpus, members);
  std::optional<SplitCandidate> best;
  for (std::size_t q = 0; q < corpus.questions().size(); ++q) {
    Stats yes(corpus.Dim()), no(corpus.Dim());
    for (int g : members)
      (corpus.Answer(g, q) ? yes : no) += corpus.groups()[g].stats;
    if (yes.count() < min_leaf || no.count() < min_leaf) continue;
    const double gain = SplitGain(parent, yes, no, floor);
    if (!best || gain > best->gain)
      best = SplitCandidate{corpus.questions()[q].id, gain};
  }
  return best;
}

GrownTree GrowTree(const TreeCorpus &corpus, const TreeConfig &config) {
  config.Validate();
  if (corpus.NumSamples() == 0) throw ValidationError("corpus has no samples");

  struct Leaf {
    std::vector<int> members;
    Stats stats;
    double ll = 0.0;
    std::optional<SplitCandidate> best;
  };
  auto make_leaf = [&](std::vector<int> members) {
    Leaf leaf;
    leaf.stats = SumGroups(corpus, members);
    leaf.ll = NodeLogLikelihood(leaf.stats, config.floor);
    leaf.best = BestSplitForLeaf(corpus, members, config.floor, config.min_leaf);
    leaf.members = std::move(members);
    return leaf;
  };
  std::vector<int> all(corpus.groups().size());
  for (std::size_t g = 0; g < all.size(); ++g) all[g] = static_cast<int>(g);

  GrownTree out;
  std::vector<Leaf> leaves;
  leaves.push_back(make_leaf(std::move(all)));
  out.trace.num_samples = corpus.NumSamples();
  out.trace.root_ll = leaves.front().ll;

  std::unordered_map<int, std::size_t> question_pos;
  for (std::size_t q = 0; q < corpus.questions().size(); ++q)
    question_pos.emplace(corpus.questions()[q].id, q);

  while (out.tree.NumLeaves() < config.max_leaves) {
    int chosen = -1;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const auto &best = leaves[i].best;
      if (best && (chosen < 0 || best->gain > leaves[chosen].best->gain))
        chosen = static_cast<int>(i);
    }
    if (chosen < 0) break;
    const SplitCandidate split = *leaves[chosen].best;
    if (split.gain < config.min_gain) break;

    const std::size_t q = question_pos.at(split.question_id);
    std::vector<int> yes, no;
    for (int g : leaves[chosen].members)
      (corpus.Answer(g, q) ? yes : no).push_back(g);

    const std::string letter = LeafLetter(chosen);
    out.tree.SplitLeaf(out.tree.LeafNode(chosen), split.question_id);
    leaves[chosen] = make_leaf(std::move(yes));
    leaves.push_back(make_leaf(std::move(no)));

    SplitRecord rec;
    rec.step = static_cast<int>(out.trace.splits.size()) + 1;
    rec.leaf_split = letter;
    rec.question_id = split.question_id;
    rec.gain = split.gain;
    for (const auto &leaf : leaves) rec.total_leaf_ll += leaf.ll;
    rec.avg_samples_per_leaf = static_cast<double>(corpus.NumSamples()) /
                               static_cast<double>(leaves.size());
    out.trace.splits.push_back(rec);
  }

  out.leaf_members.reserve(leaves.size());
  for (auto &leaf : leaves) out.leaf_members.push_back(std::move(leaf.members));
  return out;
}

int RouteWordToLeaf(const DecisionTree &tree, const WordEntry &word,
                    std::span<const Question> questions,
                    const PhonemeClassTable &classes) {
  int node = 0;
  while (!tree.nodes()[node].is_leaf) {
    const TreeNode &n = tree.nodes()[node];
    auto q = std::find_if(questions.begin(), questions.end(),
                          [&](const Question &x) { return x.id == n.question_id; });
    if (q == questions.end())
      throw ModelError("tree references question " +
                       std::to_string(n.question_id) +
                       " missing from the question set");
    node = AnswerQuestion(*q, word, classes) ? n.yes_child : n.no_child;
  }
  return tree.nodes()[node].leaf_index;
}

std::string RouteWord(const DecisionTree &tree, const WordEntry &word,
                      std::span<const Question> questions,
                      const PhonemeClassTable &classes) {
  return tree.leaf_letters()[RouteWordToLeaf(tree, word, questions, classes)];
}

}  // namespace prosody
