#include <doctest.h>

#include "stylespace/annotate.hpp"
#include "stylespace/error.hpp"
#include "stylespace/io.hpp"
#include "support/support.hpp"

using namespace stylespace;

namespace {

std::vector<std::string> surfaces(const Segmentation& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) out.push_back(t.surface);
  return out;
}

std::size_t words(const Segmentation& s) {
  return static_cast<std::size_t>(std::count_if(s.tokens.begin(), s.tokens.end(), [](const Token& t) { return t.is_word(); }));
}

}  // namespace

TEST_SUITE("annotate") {
  TEST_CASE("two short sentences") {
    const auto s = segment("Le bus part. Il pleut.");
    CHECK(surfaces(s) == std::vector<std::string>{"Le", "bus", "part", ".", "Il", "pleut", "."});
    CHECK(words(s) == 5);
    CHECK(s.sentences.size() == 2);
  }

  TEST_CASE("lone ellipsis") {
    const auto s = segment("…");
    CHECK(words(s) == 0);
    CHECK(s.sentences.size() == 1);
  }

  TEST_CASE("abbreviations do not end sentences") {
    const auto s = segment("M. Proust écrit.");
    CHECK(s.sentences.size() == 1);
  }

  TEST_CASE("apostrophe clitics split after the apostrophe") {
    const auto s = segment("l'autobus s'arrête");
    CHECK(surfaces(s) == std::vector<std::string>{"l'", "autobus", "s'", "arrête"});
  }

  TEST_CASE("offsets index code points") {
    const auto s = segment("été à Paris");
    REQUIRE(s.tokens.size() == 3);
    CHECK(s.tokens[1].begin == 4);
    CHECK(s.tokens[2].end == 11);
  }

  TEST_CASE("segmentation is deterministic") {
    const std::string text = "Il était une fois. « Oui ! » dit-il… Puis rien.";
    const auto a = segment(text);
    const auto b = segment(text);
    CHECK(surfaces(a) == surfaces(b));
    CHECK(a.sentences == b.sentences);
  }

  TEST_CASE("capitalized non-initial words become entities") {
    Lexicons lex = Lexicons::builtin();
    lex.pos["marche"] = Pos::kVerb;
    const auto set = builtin_annotate("d", segment("Hadrien marche"), lex);
    REQUIRE(set.pos.size() == 2);
    CHECK(set.pos[1] == Pos::kVerb);
    // Sentence-initial capitals are not evidence of a name.
    CHECK(set.entities.empty());

    const auto later = builtin_annotate("d", segment("Puis Hadrien marche"), lex);
    REQUIRE(later.entities.size() == 1);
    CHECK(later.entities[0].tokens == TokenRange{1, 2});
    CHECK(later.entities[0].kind == EntityKind::kPerson);
  }

  TEST_CASE("empty input gives an empty set") {
    const auto set = builtin_annotate("d", segment(""), Lexicons::builtin());
    CHECK(set.tokens.empty());
    CHECK(set.entities.empty());
  }

  TEST_CASE("gazetteer match yields a location") {
    testing::TempDir dir;
    write_file(dir / "gaz.tsv", "Paris\tLOCATION\n");
    const auto lex = Lexicons::load("", dir / "gaz.tsv", false);
    const auto set = builtin_annotate("d", segment("Il arrive à Paris."), lex);
    REQUIRE(set.entities.size() == 1);
    CHECK(set.entities[0].kind == EntityKind::kLocation);
    CHECK(set.tokens[set.entities[0].tokens.begin].surface == "Paris");
  }

  TEST_CASE("JSONL round trip and validation") {
    const std::string a = "Le bus part.";
    const std::string b = "Il pleut sur Paris.";
    const auto sa = builtin_annotate("a", segment(a), Lexicons::builtin());
    const auto sb = builtin_annotate("b", segment(b), Lexicons::builtin());
    const TextLengths known = {{"a", text_length(a)}, {"b", text_length(b)}};
    const auto jsonl = annotations_to_jsonl({sa, sb});
    const auto parsed = parse_annotations(jsonl, known);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed.at("a") == sa);
    CHECK(parsed.at("b") == sb);

    SUBCASE("overlapping entity spans name the line") {
      Json bad = annotation_to_json(sb);
      bad["entities"] = Json::array({Json{{"b", 0}, {"e", 2}, {"kind", "PERSON"}}, Json{{"b", 1}, {"e", 3}, {"kind", "PERSON"}}});
      const std::string text = annotation_to_json(sa).dump() + "\n" + bad.dump() + "\n";
      try {
        parse_annotations(text, known);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
      }
    }

    SUBCASE("unknown doc id is named") {
      try {
        parse_annotations(jsonl, {{"a", text_length(a)}});
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kUnknownId);
        CHECK(e.subject() == "b");
      }
    }

    SUBCASE("token beyond the text is out of bounds") {
      CHECK_THROWS_AS(parse_annotations(jsonl, {{"a", 3}, {"b", text_length(b)}}), Error);
    }
  }
}
