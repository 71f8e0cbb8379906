// tests/cli_test.cc

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

// Drives the prosody-tag binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "prosody/embedding_io.h"
#include "prosody/synth.h"
#include "prosody/tagger.h"

namespace fs = std::filesystem;
using namespace prosody;

namespace {

struct Result {
  int status;
  std::string out, err;
};

std::string Slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Result Run(const std::string &args) {
  const fs::path out = fs::temp_directory_path() / "prosody_cli_stdout";
  const fs::path err = fs::temp_directory_path() / "prosody_cli_stderr";
  const std::string cmd = std::string(PROSODY_TAG_BIN) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return Result{WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, Slurp(out), Slurp(err)};
}

fs::path Scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("prosody_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string FitArgs(const fs::path &corpus, const fs::path &model) {
  return "fit --lexicon " + (corpus / "lexicon.jsonl").string() + " --embeddings " +
         (corpus / "embeddings.jsonl").string() + " --questions " +
         (corpus / "questions.jsonl").string() + " --classes " +
         (corpus / "classes.json").string() + " --out " + model.string();
}

std::size_t CountLines(const std::string &s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("synth writes five deterministic files") {
  const fs::path a = Scratch("synth_a"), b = Scratch("synth_b");
  const std::string flags = " --archetypes 3 --words-per-archetype 20 --tokens-per-word 10 --seed 4";
  REQUIRE(Run("synth --out " + a.string() + flags).status == 0);
  REQUIRE(Run("synth --out " + b.string() + flags).status == 0);
  for (const char *f : {"lexicon.jsonl", "questions.jsonl", "classes.json", "embeddings.jsonl",
                        "truth.jsonl"}) {
    INFO(f);
    CHECK(fs::exists(a / f));
    CHECK(Slurp(a / f) == Slurp(b / f));
  }
  CHECK(CountLines(Slurp(a / "embeddings.jsonl")) == 600);
  CHECK(Run("synth --out " + a.string() + " --archetypes 40").status == 2);
  CHECK(Run("synth --out " + a.string() + " --separation -1").status == 2);
}

TEST_CASE("default synth and fit give the 50-tag inventory") {
  const fs::path dir = Scratch("defaults");
  REQUIRE(Run("synth --out " + (dir / "corpus").string()).status == 0);
  const fs::path model = dir / "model.json";
  const Result r = Run(FitArgs(dir / "corpus", model) + " --trace-csv " +
                       (dir / "trace.csv").string());
  REQUIRE(r.status == 0);
  CHECK(r.out.find("leaves: 10") != std::string::npos);
  CHECK(r.out.find("tags: 50") != std::string::npos);
  CHECK(CountLines(Slurp(dir / "trace.csv")) == 11);
}

TEST_CASE("fit, tag, stats and inspect") {
  const fs::path dir = Scratch("pipeline");
  const fs::path corpus = dir / "corpus";
  REQUIRE(Run("synth --out " + corpus.string() +
              " --archetypes 3 --words-per-archetype 20 --tokens-per-word 10"
              " --components-per-archetype 2 --dim 6")
              .status == 0);
  const fs::path model = dir / "model.json";
  const std::string fit = FitArgs(corpus, model) + " --max-leaves 3 --components 2";
  REQUIRE(Run(fit + " --tags-out " + (dir / "fit_tags.jsonl").string()).status == 0);

  SUBCASE("tagging the training set reproduces the fit-time tags") {
    const Result r = Run("tag --model " + model.string() + " --lexicon " +
                         (corpus / "lexicon.jsonl").string() + " --embeddings " +
                         (corpus / "embeddings.jsonl").string() + " --out " +
                         (dir / "tags.jsonl").string());
    REQUIRE(r.status == 0);
    CHECK(Slurp(dir / "tags.jsonl") == Slurp(dir / "fit_tags.jsonl"));
  }
  SUBCASE("fit is idempotent") {
    const std::string first = Slurp(model);
    REQUIRE(Run(fit).status == 0);
    CHECK(Slurp(model) == first);
  }
  SUBCASE("unseen word present in the lexicon") {
    std::ofstream(dir / "lex2.jsonl")
        << Slurp(corpus / "lexicon.jsonl")
        << R"({"word":"brandnew","phonemes":["S","AA","N"],"syllable_breaks":[0],"stress_syllable":0})"
        << "\n";
    std::ofstream(dir / "emb2.jsonl")
        << R"({"token_id":"x1","word":"brandnew","embedding":[0,0,0,0,0,0]})" << "\n";
    const Result r = Run("tag --model " + model.string() + " --lexicon " +
                         (dir / "lex2.jsonl").string() + " --embeddings " +
                         (dir / "emb2.jsonl").string());
    CHECK(r.status == 0);
    CHECK(r.out.find("\"token_id\":\"x1\"") != std::string::npos);
  }
  SUBCASE("word missing from the lexicon") {
    std::ofstream(dir / "emb3.jsonl")
        << R"({"token_id":"x1","word":"nowhere","embedding":[0,0,0,0,0,0]})" << "\n";
    const Result r = Run("tag --model " + model.string() + " --lexicon " +
                         (corpus / "lexicon.jsonl").string() + " --embeddings " +
                         (dir / "emb3.jsonl").string());
    CHECK(r.status == 1);
    CHECK(r.err.find("nowhere") != std::string::npos);
  }
  SUBCASE("dimension mismatch names both values") {
    std::ofstream(dir / "emb4.jsonl")
        << R"({"token_id":"x1","word":"a0w0","embedding":[0,0,0]})" << "\n";
    const Result r = Run("tag --model " + model.string() + " --lexicon " +
                         (corpus / "lexicon.jsonl").string() + " --embeddings " +
                         (dir / "emb4.jsonl").string());
    CHECK(r.status == 1);
    CHECK(r.err.find('3') != std::string::npos);
    CHECK(r.err.find('6') != std::string::npos);
  }
  SUBCASE("stats: one row per leaf; leaf counts sum to N") {
    const Result r = Run("stats --model " + model.string() + " --out " +
                         (dir / "curve.csv").string());
    REQUIRE(r.status == 0);
    CHECK(CountLines(Slurp(dir / "curve.csv")) == 1 + 3);
    std::istringstream info(r.out);
    std::string line;
    std::getline(info, line);
    CHECK(line == "leaf,samples,weights");
    long total = 0;
    while (std::getline(info, line)) total += std::stol(line.substr(line.find(',') + 1));
    std::ifstream emb(corpus / "embeddings.jsonl");
    CHECK(total == static_cast<long>(ReadEmbeddings(emb).size()));
  }
  SUBCASE("inspect") {
    const Result r = Run("inspect --model " + model.string());
    CHECK(r.status == 0);
    CHECK(r.out.find("PhonemeCountGt") != std::string::npos);
    CHECK(r.out.find("leaf c") != std::string::npos);
  }
}

TEST_CASE("degenerate fit and single-leaf stats") {
  const fs::path dir = Scratch("single");
  REQUIRE(Run("synth --out " + (dir / "c").string() + " --archetypes 2 --dim 3 "
              "--components-per-archetype 2 --words-per-archetype 5")
              .status == 0);
  const fs::path model = dir / "m.json";
  REQUIRE(Run(FitArgs(dir / "c", model) + " --max-leaves 1 --components 1").status == 0);
  std::ifstream is(model);
  const TaggerModel m = LoadModel(is);
  CHECK(TagInventory(m).size() == 1);
  CHECK(TagInventory(m)[0].ToString() == "a0");
  const Result r = Run("stats --model " + model.string());
  CHECK(r.status == 0);
  CHECK(CountLines(r.out) == 2);
}

TEST_CASE("errors and usage") {
  const fs::path dir = Scratch("errors");
  REQUIRE(Run("synth --out " + (dir / "c").string() + " --archetypes 2").status == 0);
  SUBCASE("missing lexicon path is a usage error") {
    const Result r = Run("fit --embeddings x --questions y --classes z --out m");
    CHECK(r.status == 2);
    CHECK(r.err.find("lexicon") != std::string::npos);
  }
  SUBCASE("no subcommand") { CHECK(Run("").status == 2); }
  SUBCASE("failed fit leaves no model file") {
    const fs::path model = dir / "never.json";
    std::ofstream(dir / "badq.jsonl") << "{\"id\":0,\"kind\":\"Nope\"}\n";
    const Result r = Run("fit --lexicon " + (dir / "c" / "lexicon.jsonl").string() +
                         " --embeddings " + (dir / "c" / "embeddings.jsonl").string() +
                         " --questions " + (dir / "badq.jsonl").string() + " --classes " +
                         (dir / "c" / "classes.json").string() + " --out " + model.string());
    CHECK(r.status != 0);
    CHECK_FALSE(fs::exists(model));
    CHECK_FALSE(fs::exists(dir / "never.json.tmp"));
  }
  SUBCASE("corrupt model") {
    std::ofstream(dir / "bad.json") << "{\"format_version\": 1, \"config\": ";
    CHECK(Run("stats --model " + (dir / "bad.json").string()).status == 1);
  }
}

TEST_CASE("binary embeddings are accepted by fit") {
  const fs::path dir = Scratch("binary");
  REQUIRE(Run("synth --binary --out " + dir.string() + " --archetypes 2 --dim 3 "
              "--components-per-archetype 2 --words-per-archetype 10")
              .status == 0);
  CHECK(fs::exists(dir / "embeddings.bin"));
  const Result r =
      Run("fit --lexicon " + (dir / "lexicon.jsonl").string() + " --embeddings " +
          (dir / "embeddings.bin").string() + " --questions " +
          (dir / "questions.jsonl").string() + " --classes " + (dir / "classes.json").string() +
          " --out " + (dir / "m.json").string() + " --max-leaves 2 --components 2");
  CHECK(r.status == 0);
}
