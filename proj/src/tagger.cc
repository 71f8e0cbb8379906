// src/tagger.cc

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

#include "prosody/tagger.h"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "prosody/embedding_io.h"
#include "prosody/error.h"
#include "prosody/json_lines.h"

namespace prosody {

using nlohmann::json;

ProsodyTag ProsodyTag::Parse(std::string_view s) {
  std::size_t split = 0;
  while (split < s.size() && s[split] >= 'a' && s[split] <= 'z') ++split;
  const std::string_view digits = s.substr(split);
  const bool ok = split > 0 && !digits.empty() && digits.size() <= 9 &&
                  std::all_of(digits.begin(), digits.end(),
                              [](char c) { return c >= '0' && c <= '9'; });
  if (!ok) throw ParseError("bad prosody tag '" + std::string(s) + "'");
  ProsodyTag tag;
  tag.leaf = std::string(s.substr(0, split));
  tag.component = std::stoi(std::string(digits));
  if (tag.ToString() != s)
    throw ParseError("bad prosody tag '" + std::string(s) + "'");
  return tag;
}

void TaggerConfig::Validate() const {
  if (dim < 0) throw ConfigError("dimension must be >= 0");
  if (components < 1) throw ConfigError("components must be >= 1");
  Tree().Validate();
  Gmm().Validate();
}

TreeConfig TaggerConfig::Tree() const {
  return TreeConfig{max_leaves, min_gain, min_leaf, floor};
}

GmmConfig TaggerConfig::Gmm() const {
  GmmConfig g;
  g.max_iters = max_iters;
  g.rel_tol = rel_tol;
  g.floor = floor;
  return g;
}

void TaggerModel::Validate() const {
  if (format_version != kModelFormatVersion)
    throw ModelError("unsupported model format_version " +
                     std::to_string(format_version) + " (this build reads " +
                     std::to_string(kModelFormatVersion) + ")");
  try {
    config.Validate();
    ValidateQuestionSet(questions, classes);
  } catch (const Error &e) {
    throw ModelError(std::string("invalid model: ") + e.what());
  }
  std::unordered_set<int> ids;
  for (const auto &q : questions) ids.insert(q.id);
  for (const auto &node : tree.nodes())
    if (!node.is_leaf && !ids.contains(node.question_id))
      throw ModelError("tree references question " +
                       std::to_string(node.question_id) +
                       " missing from the question set");
  if (static_cast<int>(gmms.size()) != tree.NumLeaves())
    throw ModelError("model has " + std::to_string(gmms.size()) +
                     " GMMs for " + std::to_string(tree.NumLeaves()) + " leaves");
  if (static_cast<int>(leaf_counts.size()) != tree.NumLeaves())
    throw ModelError("model leaf_counts do not match the tree");
  for (int i = 0; i < tree.NumLeaves(); ++i) {
    const LeafGmm &g = gmms[i];
    if (g.leaf != tree.leaf_letters()[i])
      throw ModelError("GMM " + std::to_string(i) + " is for leaf '" + g.leaf +
                       "', expected '" + tree.leaf_letters()[i] + "'");
    g.Validate(config.floor);
    if (g.Dim() != config.dim)
      throw ModelError("GMM for leaf '" + g.leaf + "' has dimension " +
                       std::to_string(g.Dim()) + ", model has " +
                       std::to_string(config.dim));
    if (g.NumComponents() > config.components)
      throw ModelError("GMM for leaf '" + g.leaf + "' has too many components");
  }
}

const LeafGmm &TaggerModel::GmmForLeaf(const std::string &letter) const {
  const int index = LeafIndexFromLetter(letter);
  if (index >= static_cast<int>(gmms.size()))
    throw ModelError("no GMM for leaf '" + letter + "'");
  return gmms[index];
}

FitResult Fit(std::span<const WordEntry> lexicon,
              std::span<const ProsodySample> samples,
              std::span<const Question> questions,
              const PhonemeClassTable &classes, const TaggerConfig &config) {
  config.Validate();
  ValidateSamples(samples);
  if (samples.empty()) throw ValidationError("no training samples");
  const auto dim = static_cast<int>(samples.front().embedding.size());
  if (config.dim != 0 && config.dim != dim)
    throw DimensionError("config dimension " + std::to_string(config.dim) +
                         " does not match data dimension " + std::to_string(dim));

  const TreeCorpus corpus(lexicon, samples, questions, classes);
  GrownTree grown = GrowTree(corpus, config.Tree());

  FitResult result;
  TaggerModel &model = result.model;
  model.config = config;
  model.config.dim = dim;
  model.classes = classes;
  model.questions = corpus.questions();
  model.tree = std::move(grown.tree);
  model.growth_trace = std::move(grown.trace);

  const int num_leaves = model.tree.NumLeaves();
  std::vector<int> leaf_of_group(corpus.groups().size(), -1);
  for (int leaf = 0; leaf < num_leaves; ++leaf)
    for (int g : grown.leaf_members[leaf]) leaf_of_group[g] = leaf;

  std::unordered_map<std::string_view, int> word_index;
  for (std::size_t i = 0; i < lexicon.size(); ++i)
    word_index.emplace(lexicon[i].word, static_cast<int>(i));
  std::vector<int> sample_leaf(samples.size());
  std::vector<std::vector<Eigen::Index>> leaf_rows(num_leaves);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int group = corpus.GroupOfWord(word_index.at(samples[i].word));
    sample_leaf[i] = leaf_of_group[group];
    leaf_rows[sample_leaf[i]].push_back(static_cast<Eigen::Index>(i));
  }

  const GmmConfig gmm_config = config.Gmm();
  model.gmms.resize(num_leaves);
  model.leaf_counts.resize(num_leaves);
  for (int leaf = 0; leaf < num_leaves; ++leaf) {
    const auto &rows = leaf_rows[leaf];
    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r)
      data.row(static_cast<Eigen::Index>(r)) = samples[rows[r]].embedding.transpose();
    const int m = std::min<int>(config.components,
                                std::max<int>(1, static_cast<int>(rows.size())));
    GmmFit fit = FitGmm(data, m,
                        config.seed ^ static_cast<std::uint64_t>(leaf), gmm_config);
    fit.gmm.leaf = model.tree.leaf_letters()[leaf];
    model.gmms[leaf] = std::move(fit.gmm);
    model.leaf_counts[leaf] = static_cast<std::int64_t>(rows.size());
  }

  result.tags.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const LeafGmm &gmm = model.gmms[sample_leaf[i]];
    result.tags.push_back(TokenTag{
        samples[i].token_id, samples[i].word,
        ProsodyTag{gmm.leaf, AssignComponent(samples[i].embedding, gmm)}});
  }
  return result;
}

ProsodyTag Tag(const TaggerModel &model, const WordEntry &word,
               const Eigen::Ref<const VectorXd> &embedding) {
  if (embedding.size() != model.config.dim)
    throw DimensionError("embedding dimension " +
                         std::to_string(embedding.size()) +
                         " does not match model dimension " +
                         std::to_string(model.config.dim));
  const int leaf =
      RouteWordToLeaf(model.tree, word, model.questions, model.classes);
  const LeafGmm &gmm = model.gmms[leaf];
  return ProsodyTag{gmm.leaf, AssignComponent(embedding, gmm)};
}

std::vector<TokenTag> TagAll(const TaggerModel &model,
                             std::span<const WordEntry> lexicon,
                             std::span<const ProsodySample> samples) {
  std::unordered_map<std::string_view, const WordEntry *> words;
  for (const auto &w : lexicon) words.emplace(w.word, &w);
  std::vector<TokenTag> tags;
  tags.reserve(samples.size());
  for (const auto &s : samples) {
    auto it = words.find(s.word);
    if (it == words.end())
      throw ValidationError("word '" + s.word + "' of token '" + s.token_id +
                            "' is not in the lexicon");
    tags.push_back(TokenTag{s.token_id, s.word, Tag(model, *it->second, s.embedding)});
  }
  return tags;
}

std::vector<ProsodyTag> TagInventory(const TaggerModel &model) {
  std::vector<ProsodyTag> tags;
  for (const auto &gmm : model.gmms)
    for (int k = 0; k < gmm.NumComponents(); ++k)
      tags.push_back(ProsodyTag{gmm.leaf, k});
  return tags;
}

namespace {

json VectorJson(const VectorXd &v) {
  return json(std::vector<double>(v.begin(), v.end()));
}

VectorXd VectorFromJson(const json &j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(),
                                    static_cast<Eigen::Index>(values.size()));
}

json ConfigJson(const TaggerConfig &c) {
  return json{{"d", c.dim},
              {"m", c.components},
              {"max_leaves", c.max_leaves},
              {"min_gain", c.min_gain},
              {"min_leaf", c.min_leaf},
              {"floor", c.floor},
              {"seed", c.seed},
              {"max_iters", c.max_iters},
              {"rel_tol", c.rel_tol}};
}

TaggerConfig ConfigFromJson(const json &j) {
  TaggerConfig c;
  c.dim = j.at("d").get<int>();
  c.components = j.at("m").get<int>();
  c.max_leaves = j.at("max_leaves").get<int>();
  c.min_gain = j.at("min_gain").get<double>();
  c.min_leaf = j.at("min_leaf").get<std::int64_t>();
  c.floor = j.at("floor").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.max_iters = j.at("max_iters").get<int>();
  c.rel_tol = j.at("rel_tol").get<double>();
  return c;
}

json TreeJson(const DecisionTree &tree) {
  json nodes = json::array();
  for (const auto &n : tree.nodes()) {
    if (n.is_leaf)
      nodes.push_back({{"leaf", n.leaf_index}});
    else
      nodes.push_back(
          {{"question_id", n.question_id}, {"yes", n.yes_child}, {"no", n.no_child}});
  }
  return json{{"nodes", nodes}, {"leaf_letters", tree.leaf_letters()}};
}

DecisionTree TreeFromJson(const json &j) {
  std::vector<TreeNode> nodes;
  for (const auto &n : j.at("nodes")) {
    TreeNode node;
    if (n.contains("leaf")) {
      node.leaf_index = n.at("leaf").get<int>();
    } else {
      node.is_leaf = false;
      node.leaf_index = -1;
      node.question_id = n.at("question_id").get<int>();
      node.yes_child = n.at("yes").get<int>();
      node.no_child = n.at("no").get<int>();
    }
    nodes.push_back(node);
  }
  return DecisionTree(std::move(nodes),
                      j.at("leaf_letters").get<std::vector<std::string>>());
}

json GmmJson(const LeafGmm &g) {
  json weights = json::array(), means = json::array(), vars = json::array();
  for (const auto &c : g.components) {
    weights.push_back(c.weight);
    means.push_back(VectorJson(c.mean));
    vars.push_back(VectorJson(c.var));
  }
  return json{{"weights", weights}, {"means", means}, {"vars", vars}};
}

LeafGmm GmmFromJson(const std::string &leaf, const json &j) {
  LeafGmm g;
  g.leaf = leaf;
  const auto &weights = j.at("weights");
  const auto &means = j.at("means");
  const auto &vars = j.at("vars");
  if (means.size() != weights.size() || vars.size() != weights.size())
    throw ModelError("GMM for leaf '" + leaf + "' has ragged parameter lists");
  for (std::size_t k = 0; k < weights.size(); ++k)
    g.components.push_back(GmmComponent{weights[k].get<double>(),
                                        VectorFromJson(means[k]),
                                        VectorFromJson(vars[k])});
  return g;
}

}  // namespace

json ModelToJson(const TaggerModel &model) {
  json j;
  j["format_version"] = model.format_version;
  j["config"] = ConfigJson(model.config);
  j["classes"] = ToJson(model.classes);
  json questions = json::array();
  for (const auto &q : model.questions) questions.push_back(ToJson(q));
  j["questions"] = questions;
  j["tree"] = TreeJson(model.tree);
  json gmms = json::object();
  for (const auto &g : model.gmms) gmms[g.leaf] = GmmJson(g);
  j["gmms"] = gmms;
  json trace = json::array();
  for (const auto &r : model.growth_trace.splits)
    trace.push_back({{"step", r.step},
                     {"leaf_split", r.leaf_split},
                     {"question_id", r.question_id},
                     {"gain", r.gain},
                     {"total_leaf_ll", r.total_leaf_ll},
                     {"avg_samples_per_leaf", r.avg_samples_per_leaf}});
  j["growth_trace"] = trace;
  j["growth_root"] = {{"num_samples", model.growth_trace.num_samples},
                      {"total_leaf_ll", model.growth_trace.root_ll}};
  json counts = json::object();
  for (int i = 0; i < model.tree.NumLeaves(); ++i)
    counts[model.tree.leaf_letters()[i]] = model.leaf_counts[i];
  j["leaf_counts"] = counts;
  return j;
}

TaggerModel ModelFromJson(const json &j) {
  if (!j.is_object()) throw ModelError("model file is not a JSON object");
  TaggerModel model;
  try {
    model.format_version = j.at("format_version").get<int>();
    if (model.format_version != kModelFormatVersion)
      throw ModelError("unsupported model format_version " +
                       std::to_string(model.format_version) +
                       " (this build reads " +
                       std::to_string(kModelFormatVersion) + ")");
    model.config = ConfigFromJson(j.at("config"));
    model.classes = ClassTableFromJson(j.at("classes"));
    for (const auto &q : j.at("questions"))
      model.questions.push_back(QuestionFromJson(q));
    model.tree = TreeFromJson(j.at("tree"));
    const auto &gmms = j.at("gmms");
    const auto &counts = j.at("leaf_counts");
    for (const auto &letter : model.tree.leaf_letters()) {
      if (!gmms.contains(letter))
        throw ModelError("model has no GMM for leaf '" + letter + "'");
      model.gmms.push_back(GmmFromJson(letter, gmms.at(letter)));
      model.leaf_counts.push_back(counts.at(letter).get<std::int64_t>());
    }
    if (gmms.size() != model.gmms.size())
      throw ModelError("model has GMMs for leaves not in the tree");
    const auto &root = j.at("growth_root");
    model.growth_trace.num_samples = root.at("num_samples").get<std::int64_t>();
    model.growth_trace.root_ll = root.at("total_leaf_ll").get<double>();
    for (const auto &r : j.at("growth_trace"))
      model.growth_trace.splits.push_back(
          SplitRecord{r.at("step").get<int>(),
                      r.at("leaf_split").get<std::string>(),
                      r.at("question_id").get<int>(), r.at("gain").get<double>(),
                      r.at("total_leaf_ll").get<double>(),
                      r.at("avg_samples_per_leaf").get<double>()});
  } catch (const json::exception &e) {
    throw ModelError(std::string("malformed model: ") + e.what());
  } catch (const ModelError &) {
    throw;
  } catch (const Error &e) {
    throw ModelError(std::string("malformed model: ") + e.what());
  }
  model.Validate();
  return model;
}

void SaveModel(const TaggerModel &model, std::ostream &os) {
  os << ModelToJson(model).dump(1) << '\n';
}

TaggerModel LoadModel(std::istream &is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception &e) {
    throw ParseError(std::string("cannot parse model file: ") + e.what());
  }
  return ModelFromJson(j);
}

void WriteTags(std::ostream &os, std::span<const TokenTag> tags) {
  for (const auto &t : tags) {
    json j;
    j["token_id"] = t.token_id;
    j["word"] = t.word;
    j["tag"] = t.tag.ToString();
    os << j.dump() << '\n';
  }
}

std::vector<TokenTag> ReadTags(std::istream &is) {
  std::vector<TokenTag> tags;
  ForEachJsonLine(is, [&](const json &j, std::size_t line) {
    try {
      tags.push_back(TokenTag{j.at("token_id").get<std::string>(),
                              j.at("word").get<std::string>(),
                              ProsodyTag::Parse(j.at("tag").get<std::string>())});
    } catch (const json::exception &e) {
      throw ParseError(std::string("bad tag record: ") + e.what(), line);
    }
  });
  return tags;
}

}  // namespace prosody
