#include <doctest.h>

#include <fmt/format.h>

#include "stylespace/corpus.hpp"
#include "stylespace/error.hpp"
#include "stylespace/io.hpp"
#include "support/support.hpp"

using namespace stylespace;
using testing::TempDir;

namespace {

Json entry(const std::string& id, const std::string& group, const std::string& author) {
  return {{"id", id}, {"path", "texts/" + id + ".txt"}, {"group", group}, {"author", author}};
}

void write_texts(const TempDir& dir, const std::vector<std::string>& ids) {
  for (const auto& id : ids) write_file(dir / ("texts/" + id + ".txt"), "Texte " + id + ".\r\nFin.");
}

std::vector<Document> authored(std::size_t n, Author author, const std::string& prefix) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    docs.push_back({fmt::format("{}-{:03d}", prefix, i), "x", {CorpusGroup::kStyleRef, author, {}}, std::nullopt});
  }
  return docs;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("96 Tuffery entries load as 96 labelled documents") {
    TempDir dir;
    Json manifest = {{"entries", Json::array()}, {"counts", {{ClassLabel{}.key(), 96}}}};
    std::vector<std::string> ids;
    for (int i = 0; i < 96; ++i) {
      ids.push_back(fmt::format("tuf-{:03d}", i));
      manifest["entries"].push_back(entry(ids.back(), "TUFFERY_REF", "TUFFERY"));
    }
    write_texts(dir, ids);
    write_json(dir / "manifest.json", manifest);
    const auto manifest_loaded = load_manifest(dir / "manifest.json");
    const auto key = manifest_loaded.declared_counts.begin()->first;
    const auto docs = load_corpus(dir / "manifest.json");
    REQUIRE(docs.size() == 96);
    for (const auto& d : docs) {
      CHECK(d.label.group == CorpusGroup::kTufferyRef);
      CHECK(d.label.author == Author::kTuffery);
      CHECK(d.label.key() == key);
      CHECK(d.text.find('\r') == std::string::npos);
    }
  }

  TEST_CASE("empty manifest gives an empty corpus") {
    TempDir dir;
    write_json(dir / "manifest.json", Json{{"entries", Json::array()}});
    CHECK(load_corpus(dir / "manifest.json").empty());
  }

  TEST_CASE("a missing file is a count mismatch naming the id") {
    TempDir dir;
    Json manifest = {{"entries",
                      {entry("a", "TUFFERY_REF", "TUFFERY"), entry("b", "TUFFERY_REF", "TUFFERY"),
                       entry("c", "TUFFERY_REF", "TUFFERY")}}};
    write_texts(dir, {"a", "c"});
    write_json(dir / "manifest.json", manifest);
    try {
      load_corpus(dir / "manifest.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kCountMismatch);
      CHECK(e.subject() == "b");
      CHECK(std::string(e.what()).find("b") != std::string::npos);
    }
  }

  TEST_CASE("declared counts must match") {
    TempDir dir;
    Json manifest = {{"entries", {entry("a", "TUFFERY_REF", "TUFFERY")}}, {"counts", {{ClassLabel{}.key(), 2}}}};
    write_texts(dir, {"a"});
    write_json(dir / "manifest.json", manifest);
    try {
      load_corpus(dir / "manifest.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kCountMismatch);
    }
  }

  TEST_CASE("duplicate ids, bad labels and invalid UTF-8 are rejected") {
    TempDir dir;
    write_texts(dir, {"a"});
    write_json(dir / "dup.json", Json{{"entries", {entry("a", "TUFFERY_REF", "TUFFERY"), entry("a", "TUFFERY_REF", "TUFFERY")}}});
    CHECK_THROWS_AS(load_corpus(dir / "dup.json"), Error);

    Json gen = entry("g", "STYLE_GEN", "PROUST");  // generator missing
    CHECK_THROWS_AS(parse_manifest(Json{{"entries", {gen}}}), Error);
    Json tuf = entry("t", "TUFFERY_REF", "TUFFERY");
    tuf["source_id"] = "x";
    CHECK_THROWS_AS(parse_manifest(Json{{"entries", {tuf}}}), Error);

    write_file(dir / "texts/bad.txt", std::string("caf\xc3", 4));
    write_json(dir / "bad.json", Json{{"entries", {entry("bad", "TUFFERY_REF", "TUFFERY")}}});
    try {
      load_corpus(dir / "bad.json");
      FAIL("expected a decode error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kDecode);
    }
  }

  TEST_CASE("manifest round trip is byte-identical") {
    Json gen = entry("g1", "STYLE_GEN", "PROUST");
    gen["generator"] = "MISTRAL";
    gen["source_id"] = "t1";
    gen["provenance"] = {{"model", "m"}, {"temperature", 0.7}};
    const Json raw = {{"entries", {entry("t1", "TUFFERY_REF", "TUFFERY"), gen}},
                      {"exclusions", {{{"id", "t9"}, {"reason", "duplicate"}}}}};
    const auto once = serialize_manifest(parse_manifest(raw));
    const auto twice = serialize_manifest(parse_manifest(Json::parse(once)));
    CHECK(once == twice);
  }

  TEST_CASE("stratified split of 288 Style_ref documents") {
    std::vector<Document> docs;
    for (auto a : {Author::kProust, Author::kCeline, Author::kYourcenar}) {
      auto part = authored(96, a, std::string(to_string(a)));
      docs.insert(docs.end(), part.begin(), part.end());
    }
    const auto split = stratified_split(docs, 0.8, 42);
    CHECK((split.train.size() == 230 || split.train.size() == 231));
    CHECK(split.train.size() + split.validation.size() == 288);
    for (auto a : {Author::kProust, Author::kCeline, Author::kYourcenar}) {
      const auto n = std::count_if(split.train.begin(), split.train.end(), [&](const auto& d) { return d.label.author == a; });
      CHECK(n >= 76);
      CHECK(n <= 77);
    }
  }

  TEST_CASE("split determinism and seed sensitivity") {
    const auto docs = authored(10, Author::kProust, "p");
    auto ids = [](const Split& s) {
      std::vector<std::string> out;
      for (const auto& d : s.train) out.push_back(d.id);
      return out;
    };
    CHECK(ids(stratified_split(docs, 0.8, 1)) == ids(stratified_split(docs, 0.8, 1)));
    std::size_t differing = 0;
    for (std::uint64_t s = 0; s < 100; ++s) differing += ids(stratified_split(docs, 0.8, s)) != ids(stratified_split(docs, 0.8, s + 1));
    CHECK(differing > 90);
    CHECK_THROWS_AS(stratified_split(docs, 1.0, 1), Error);
  }

  TEST_CASE("class names") {
    CHECK(class_name({CorpusGroup::kStyleGen, Author::kProust, Generator::kMistral}) == "Proust_gen");
    CHECK(class_name({CorpusGroup::kStyleGen, Author::kProust, Generator::kMistral}, true) == "Proust_gen[MISTRAL]");
    CHECK(class_name({CorpusGroup::kTufferyRef, Author::kTuffery, {}}) == "Tuffery_ref");
  }
}
