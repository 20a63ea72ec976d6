#include <doctest.h>

#include <cmath>

#include "stylespace/annotate.hpp"
#include "stylespace/error.hpp"
#include "stylespace/stylefeatures.hpp"

using namespace stylespace;

namespace {

/// Segmented text with the given tags on word tokens (OTHER elsewhere) and
/// entities given as token ranges.
AnnotationSet annotated(const std::string& text, std::vector<Pos> word_tags = {},
                        std::vector<TokenRange> entities = {}) {
  const auto seg = segment(text);
  AnnotationSet set;
  set.doc_id = "d";
  set.tokens = seg.tokens;
  set.sentences = seg.sentences;
  set.pos.assign(seg.tokens.size(), Pos::kOther);
  std::size_t w = 0;
  for (std::size_t i = 0; i < seg.tokens.size() && w < word_tags.size(); ++i) {
    if (seg.tokens[i].is_word()) set.pos[i] = word_tags[w++];
  }
  for (const auto& r : entities) set.entities.push_back({r, EntityKind::kPerson, false});
  return set;
}

StyleFeatureVector features_of(const std::string& text, const std::string& id = "d") {
  return compute_features(text, builtin_annotate(id, segment(text), Lexicons::builtin()));
}

}  // namespace

TEST_SUITE("stylefeatures") {
  TEST_CASE("structural: le bus rouge") {
    const auto s = structural_features(annotated("le bus rouge"));
    CHECK(s.mean_word_length == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
    CHECK(s.mean_sentence_length == 3.0);
    CHECK(s.normalized_word_length == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
  }

  TEST_CASE("structural: single letter and repeated sentences") {
    const auto one = structural_features(annotated("a"));
    CHECK(one.mean_word_length == 1.0);
    CHECK(one.mean_sentence_length == 1.0);
    const auto rep = structural_features(annotated("Le chat dort bien. Le chat dort bien."));
    CHECK(rep.mean_sentence_length == 4.0);
  }

  TEST_CASE("pos frequencies") {
    auto p = pos_frequencies(annotated("a b c d", {Pos::kNoun, Pos::kVerb, Pos::kOther, Pos::kOther}));
    CHECK(p.noun == 0.25);
    CHECK(p.verb == 0.25);
    CHECK(p.adj == 0.0);
    p = pos_frequencies(annotated("a b c"));
    CHECK((p.noun == 0.0 && p.verb == 0.0 && p.adj == 0.0));
    p = pos_frequencies(annotated("a b c", {Pos::kAdj, Pos::kAdj, Pos::kNoun}));
    CHECK(p.noun == doctest::Approx(1.0 / 3.0));
    CHECK(p.verb == 0.0);
    CHECK(p.adj == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("lexical entropy") {
    CHECK(lexical_entropy(segment("a b c d").tokens) == 2.0);
    CHECK(lexical_entropy(segment("a a a a a a a a a a").tokens) == 0.0);
    CHECK(lexical_entropy(segment("a a b c").tokens) == doctest::Approx(1.5).epsilon(1e-15));
  }

  TEST_CASE("letter features") {
    auto l = letter_features("aab", segment("aab").tokens);
    CHECK(l.distribution.at("a") == doctest::Approx(2.0 / 3.0));
    CHECK(l.distribution.at("b") == doctest::Approx(1.0 / 3.0));
    CHECK(l.capitalized_fraction == 0.0);
    l = letter_features("Ab ab", segment("Ab ab").tokens);
    CHECK(l.distribution.at("a") == 0.5);
    CHECK(l.distribution.at("b") == 0.5);
    CHECK(l.capitalized_fraction == 0.5);
    l = letter_features("1234 !", segment("1234 !").tokens);
    CHECK(l.distribution.empty());
    CHECK(l.capitalized_fraction == 0.0);
  }

  TEST_CASE("ner density is entities per sentence") {
    CHECK(ner_density(annotated("Aa bb cc. Dd ee ff.", {}, {{0, 1}, {1, 2}, {4, 5}})) == 1.5);
    CHECK(ner_density(annotated("a b.")) == 0.0);
    CHECK(ner_density(annotated("Aa. Bb. Cc. Dd.", {}, {{0, 1}})) == 0.25);
  }

  TEST_CASE("doubling the text leaves distributional features unchanged") {
    const std::string text = "Le Chat dort sous la table. Il rêve d'une souris grise.";
    const auto once = features_of(text);
    const auto twice = features_of(text + " " + text);
    CHECK(twice.pos.noun == doctest::Approx(once.pos.noun).epsilon(1e-9));
    CHECK(twice.pos.verb == doctest::Approx(once.pos.verb).epsilon(1e-9));
    CHECK(twice.entropy_bits == doctest::Approx(once.entropy_bits).epsilon(1e-9));
    CHECK(twice.structural.mean_word_length == doctest::Approx(once.structural.mean_word_length).epsilon(1e-12));
    for (const auto& [letter, p] : once.letters.distribution) {
      CHECK(twice.letters.distribution.at(letter) == doctest::Approx(p).epsilon(1e-9));
    }
  }

  TEST_CASE("family scalars are mean z-scores") {
    std::vector<StyleFeatureVector> pop = {features_of("le bus part."), features_of("Les grandes maisons silencieuses attendent longtemps."),
                                           features_of("Il pleut sur Paris et Lyon.")};
    const auto stats = attach_family_scalars(pop);
    // NER has a single component: its scalar is that component's z-score.
    std::size_t ner = 0;
    for (std::size_t c = 0; c < stats.components().size(); ++c) {
      if (stats.components()[c].family == Family::kNer) ner = c;
    }
    for (const auto& f : pop) {
      const double z = stats.stddev()[ner] > 0 ? (f.ner_density - stats.mean()[ner]) / stats.stddev()[ner] : 0.0;
      CHECK(f.family_scalar.at(Family::kNer) == doctest::Approx(z).epsilon(1e-12));
    }
    // Shorter words and sentences give a lower structural scalar.
    CHECK(pop[0].family_scalar.at(Family::kStructural) < pop[1].family_scalar.at(Family::kStructural));
  }

  TEST_CASE("a document at the population mean scores zero everywhere") {
    std::vector<StyleFeatureVector> pop = {features_of("le chat dort."), features_of("le chat dort.")};
    attach_family_scalars(pop);
    for (const auto& [family, v] : pop[0].family_scalar) CHECK(v == 0.0);
  }

  TEST_CASE("feature table round trip") {
    std::vector<StyleFeatureVector> pop = {features_of("le bus part.", "a"), features_of("Il pleut sur Paris.", "b")};
    const auto stats = attach_family_scalars(pop);
    const auto records = read_feature_table(feature_table(pop, stats));
    REQUIRE(records.size() == 2);
    for (const auto& f : pop) {
      for (const auto& [family, v] : f.family_scalar) CHECK(records.at(f.doc_id).family.at(family) == v);
    }
  }

  TEST_CASE("family names") {
    for (auto f : {Family::kStructural, Family::kTag, Family::kEntropy, Family::kLetters, Family::kNer}) {
      CHECK(parse_family(to_string(f)) == f);
    }
    CHECK_THROWS_AS(parse_family("Syntax"), Error);
  }
}
