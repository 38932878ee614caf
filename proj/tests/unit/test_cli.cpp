#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace mixintent;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "mixintent");
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mixintent-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gen-data writes one line per record") {
  const fs::path dir = scratch("gen");
  const Run r = cli({"gen-data", "--seed", "1", "--per-intent", "100", "--out", (dir / "d.tsv").string()});
  CHECK(r.code == 0);
  std::ifstream in(dir / "d.tsv");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 700);
  CHECK(cli({"gen-data", "--seed", "1", "--per-intent", "100", "--out", (dir / "e.tsv").string()}).code == 0);
  CHECK(slurp(dir / "d.tsv") == slurp(dir / "e.tsv"));
}

TEST_CASE("usage errors and help") {
  const Run bogus = cli({"gen-data", "--bogus"});
  CHECK(bogus.code == 1);
  CHECK(!bogus.err.empty());
  CHECK(cli({}).code == 1);
  CHECK(cli({"nosuch"}).code == 1);

  const std::vector<std::pair<std::string, std::vector<std::string>>> flags = {
      {"gen-data", {"--seed", "--per-intent", "--out"}},
      {"embed", {"--data", "--dim", "--window", "--negatives", "--epochs", "--lr", "--seed", "--out", "--standin",
                 "--sentences-out"}},
      {"train", {"--data", "--encoder", "--classifier", "--recurrent", "--embeddings", "--seed", "--set", "--out"}},
      {"predict", {"--model", "--input"}},
      {"eval", {"--model", "--data"}},
      {"grid", {"--spec", "--out", "--jobs"}},
  };
  for (const auto& [sub, names] : flags) {
    const Run h = cli({sub, "--help"});
    CAPTURE(sub);
    CHECK(h.code == 0);
    for (const auto& n : names) CHECK(h.out.find(n) != std::string::npos);
  }
  const Run gen_help = cli({"gen-data", "--help"});
  CHECK(gen_help.out.find("200") != std::string::npos);
  CHECK(gen_help.out.find("codemix.tsv") != std::string::npos);
  CHECK(cli({"embed", "--help"}).out.find("0.025") != std::string::npos);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("train, predict and eval a pipeline model") {
  const fs::path dir = scratch("pipeline");
  const std::string data = (dir / "d.tsv").string(), test = (dir / "t.tsv").string();
  REQUIRE(cli({"gen-data", "--seed", "2", "--per-intent", "20", "--out", data}).code == 0);
  REQUIRE(cli({"gen-data", "--seed", "3", "--per-intent", "5", "--out", test}).code == 0);
  const std::string model = (dir / "m.mdl").string();
  const Run t = cli({"train", "--data", data, "--encoder", "tfidf", "--classifier", "LogisticRegression", "--set",
                     "logreg_iterations=200", "--out", model});
  REQUIRE(t.code == 0);
  REQUIRE(cli({"train", "--data", data, "--encoder", "tfidf", "--classifier", "LogisticRegression", "--set",
               "logreg_iterations=200", "--out", (dir / "m2.mdl").string()})
              .code == 0);
  CHECK(slurp(model) == slurp(dir / "m2.mdl"));

  const Run p = cli({"predict", "--model", model}, "aaj mausam kaisa hai delhi mein\nplay some music\n");
  REQUIRE(p.code == 0);
  std::istringstream lines(p.out);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    CHECK(line.find('\t') != std::string::npos);
    ++n;
  }
  CHECK(n == 2);
  CHECK(p.out.find("\taaj mausam kaisa hai delhi mein\n") != std::string::npos);

  const Run e = cli({"eval", "--model", model, "--data", test});
  CHECK(e.code == 0);
  CHECK(e.out.find("macro") != std::string::npos);

  CHECK(cli({"train", "--data", data, "--encoder", "avg sgns=8", "--classifier", "CosineSimilarity", "--out",
             (dir / "m3.mdl").string()})
            .code == 0);
  CHECK(cli({"eval", "--model", (dir / "m3.mdl").string(), "--data", test}).code == 0);
}

TEST_CASE("recurrent model through the cli") {
  const fs::path dir = scratch("recurrent");
  const std::string data = (dir / "d.tsv").string(), words = (dir / "w.txt").string();
  REQUIRE(cli({"gen-data", "--seed", "2", "--per-intent", "10", "--out", data}).code == 0);
  REQUIRE(cli({"embed", "--data", data, "--dim", "6", "--epochs", "2", "--out", words}).code == 0);
  const std::string model = (dir / "r.mdl").string();
  REQUIRE(cli({"train", "--data", data, "--recurrent", "GRU", "--embeddings", words, "--set", "hidden=4", "--set",
               "max_epochs=2", "--out", model})
              .code == 0);
  CHECK(cli({"eval", "--model", model, "--data", data}).code == 0);
  CHECK(cli({"predict", "--model", model}, "gaana bajao\n").code == 0);
}

TEST_CASE("exit codes by failure kind") {
  const fs::path dir = scratch("codes");
  CHECK(cli({"eval", "--model", (dir / "none.mdl").string(), "--data", (dir / "none.tsv").string()}).code == 2);
  {
    std::ofstream bad(dir / "bad.tsv");
    bad << "onlylabel\n";
  }
  const Run parse = cli({"train", "--data", (dir / "bad.tsv").string(), "--out", (dir / "m.mdl").string()});
  CHECK(parse.code == 2);
  CHECK(parse.err.rfind("error: ", 0) == 0);
  CHECK(parse.err.find('\n') == parse.err.size() - 1);
  {
    std::ofstream one(dir / "one.tsv");
    one << "A\thello there\nA\tgood morning\n";
  }
  CHECK(cli({"train", "--data", (dir / "one.tsv").string(), "--out", (dir / "m.mdl").string()}).code == 3);
  CHECK(cli({"train", "--data", (dir / "one.tsv").string(), "--set", "bogus=1"}).code == 1);
  CHECK(cli({"train", "--data", (dir / "one.tsv").string(), "--classifier", "Nope"}).code == 1);
  CHECK(cli({"grid", "--spec", (dir / "missing.cfg").string()}).code == 2);
  {
    std::ofstream spec(dir / "noseed.cfg");
    spec << "[data]\ngenerator = codemix\n[encoders]\nCount = count\n[classifiers]\nSVM = SVM\n";
  }
  const Run noseed = cli({"grid", "--spec", (dir / "noseed.cfg").string()});
  CHECK(noseed.code == 2);
  CHECK(noseed.err.find("seed required") != std::string::npos);
}

TEST_CASE("grid reruns from its manifest byte for byte") {
  const fs::path dir = scratch("grid");
  {
    std::ofstream spec(dir / "grid.cfg");
    spec << "[data]\ngenerator = codemix\ndata_seed = 5\nper_intent = 12\n[run]\nseed = 2\n"
            "[encoders]\nCount = count\nTfidf-Lsa = tfidf-lsa k=8\n"
            "[classifiers]\nLinearSVM = LinearSVM\nRandomForest = RandomForest trees=5\n"
            "[recurrent]\ncells = RNN\nhidden = 3\nlayers = 1\nmax_epochs = 2\nembedding.SG4 = sgns=4\n"
            "[sgns]\nepochs = 2\n";
  }
  const Run first = cli({"-q", "grid", "--spec", (dir / "grid.cfg").string(), "--out", (dir / "a").string(), "--jobs",
                         "2"});
  REQUIRE(first.code == 0);
  for (const char* f : {"results.tsv", "recurrent.tsv", "results.txt", "manifest.cfg"}) CHECK(fs::exists(dir / "a" / f));
  const Run second = cli({"-q", "grid", "--spec", (dir / "a" / "manifest.cfg").string(), "--out",
                          (dir / "b").string(), "--jobs", "1"});
  REQUIRE(second.code == 0);
  for (const char* f : {"results.tsv", "recurrent.tsv", "results.txt"}) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  CHECK(slurp(dir / "a" / "results.tsv").rfind("classifier\tCount\tTfidf-Lsa\n", 0) == 0);
}
