#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "cli/cli.hpp"
#include "stylespace/csv.hpp"
#include "stylespace/io.hpp"
#include "support/support.hpp"

using namespace stylespace;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "stylespace");
  std::ostringstream out, err;
  const int code = stylespace::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("unknown subcommand is a usage error") {
    const auto r = invoke({"frobnicate"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"validate", "--mode", "bag-of-words"}).code == 2);
  }

  TEST_CASE("missing corpus is a runtime error with a JSON body") {
    testing::TempDir dir;
    const auto r = invoke({"ingest", "--corpus", (dir / "nope.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 1);
    const auto body = Json::parse(r.err.substr(r.err.find('{')));
    CHECK(body["error"].contains("kind"));
    CHECK(body["error"].contains("message"));
  }

  TEST_CASE("validate writes evaluation JSON and CSV with a fingerprint") {
    testing::TempDir dir;
    REQUIRE(invoke({"synth", "--fixture", "disjoint", "--n-docs", "12", "--tokens", "200", "--out", (dir / "fx").string()})
                .code == 0);
    const auto out = dir / "val";
    const auto r = invoke({"validate", "--corpus", (dir / "fx/manifest.json").string(), "--mode", "char-ngram", "--out",
                        out.string()});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out).is_object());
    REQUIRE(std::filesystem::exists(out / "eval_char-ngram.json"));
    REQUIRE(std::filesystem::exists(out / "eval_char-ngram.csv"));
    const auto eval = Json::parse(slurp(out / "eval_char-ngram.json"));
    CHECK(eval.contains("config_fingerprint"));
    const auto table = read_csv(out / "eval_char-ngram.csv");
    REQUIRE_FALSE(table.comments.empty());
    CHECK(table.comments.front().find(eval["config_fingerprint"].get<std::string>()) != std::string::npos);
  }

  TEST_CASE("thread count does not change outputs") {
    testing::TempDir dir;
    REQUIRE(invoke({"synth", "--family", "NER", "--n-docs", "8", "--tokens", "100", "--out", (dir / "fx").string()})
                .code == 0);
    const auto corpus = (dir / "fx/manifest.json").string();
    const auto emb = (dir / "fx/embeddings/manifest.json").string();
    REQUIRE(invoke({"cluster", "--corpus", corpus, "--embeddings", emb, "--out", (dir / "a").string()}).code == 0);
    REQUIRE(invoke({"cluster", "--corpus", corpus, "--embeddings", emb, "--out", (dir / "b").string(), "--threads",
                    "3"})
                .code == 0);
    CHECK(slurp(dir / "a/clusters.json") == slurp(dir / "b/clusters.json"));
  }

  TEST_CASE("sensitivity on a planted letter fixture ranks Letters first") {
    testing::TempDir dir;
    const auto fx = dir / "fx";
    REQUIRE(invoke({"synth", "--family", "Letters", "--n-docs", "40", "--tokens", "400", "--seed", "5", "--out",
                 fx.string()})
                .code == 0);
    const auto out = dir / "sens";
    const auto r = invoke({"sensitivity", "--corpus", (fx / "manifest.json").string(), "--embeddings",
                        (fx / "embeddings/manifest.json").string(), "--annotations",
                        (fx / "annotations.jsonl").string(), "--space", "fulld", "--pairing", "cross", "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto table = read_csv(out / "sensitivity.csv");
    const auto cmp = table.column("comparison"), space = table.column("space"), slice = table.column("slice"),
               family = table.column("family"), rc = table.column("r");
    std::string top;
    double best = -1.0;
    for (const auto& row : table.rows) {
      if (row[cmp] != "Proust_gen" || row[space] != "fulld" || row[slice] != "pooled" || row[rc].empty()) continue;
      const double v = std::abs(std::stod(row[rc]));
      if (v > best) {
        best = v;
        top = row[family];
      }
    }
    CHECK(top == "Letters");
  }
}
