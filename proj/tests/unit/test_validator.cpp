#include <doctest.h>

#include <cmath>
#include <set>

#include "stylespace/error.hpp"
#include "stylespace/harness.hpp"
#include "stylespace/validator.hpp"

using namespace stylespace;

namespace {

SparseVector dense(std::vector<double> v) {
  SparseVector s;
  for (std::uint32_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      s.indices.push_back(i);
      s.values.push_back(v[i]);
    }
  }
  return s;
}

std::vector<Document> docs_of(const std::vector<SyntheticDoc>& synth) {
  std::vector<Document> out;
  for (const auto& d : synth) out.push_back(d.document);
  return out;
}

}  // namespace

TEST_SUITE("validator") {
  TEST_CASE("abcd vocabulary and vector") {
    const auto v = Vectorizer::fit({"abcd"}, VectorizerMode::kCharNgram);
    CHECK(std::set<std::string>(v.vocabulary().begin(), v.vocabulary().end()) == std::set<std::string>{"abc", "bcd", "abcd"});
    for (double idf : v.idf()) CHECK(idf == 1.0);
    const auto x = v.transform("abcd");
    REQUIRE(x.nnz() == 3);
    for (double value : x.values) CHECK(value == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  }

  TEST_CASE("two identical documents") {
    const auto v = Vectorizer::fit({"abcde", "abcde"}, VectorizerMode::kCharNgram);
    for (double idf : v.idf()) CHECK(idf == 1.0);
    CHECK(v.vocabulary() == Vectorizer::fit({"abcde"}, VectorizerMode::kCharNgram).vocabulary());
  }

  TEST_CASE("idf follows the smoothed formula") {
    const auto v = Vectorizer::fit({"abc", "xyz"}, VectorizerMode::kCharNgram);
    const auto id = v.term_id("abc");
    REQUIRE(id.has_value());
    CHECK(v.idf()[*id] == doctest::Approx(std::log(3.0 / 2.0) + 1.0).epsilon(1e-12));
  }

  TEST_CASE("function-word mode with a custom lexicon") {
    const auto v = Vectorizer::fit({"le chat de la voisine", "un autre texte"}, VectorizerMode::kFunctionWords, {"le", "de"});
    CHECK(v.vocabulary().size() == 2);
  }

  TEST_CASE("out-of-vocabulary text is a zero vector; scaling is invisible") {
    const auto v = Vectorizer::fit({"abcd", "bcde"}, VectorizerMode::kCharNgram);
    CHECK(v.transform("xyz").nnz() == 0);
    const auto once = v.transform("abcdbcde");
    const auto twice = v.transform("abcdbcdeabcdbcde");
    REQUIRE(once.indices == twice.indices);
    for (std::size_t i = 0; i < once.values.size(); ++i) CHECK(once.values[i] == doctest::Approx(twice.values[i]).epsilon(1e-12));
  }

  TEST_CASE("vectorizer JSON round trip") {
    const auto v = Vectorizer::fit({"le chat dort", "la pluie tombe"}, VectorizerMode::kCharNgram);
    const auto back = Vectorizer::from_json(Json::parse(v.to_json().dump()));
    CHECK(back.vocabulary() == v.vocabulary());
    CHECK(back.idf() == v.idf());
    CHECK(back.fitted_on() == v.fitted_on());
  }

  TEST_CASE("separable toy set is learned exactly") {
    const std::vector<SparseVector> x = {dense({1, 0}), dense({2, 0.5}), dense({0, 1}), dense({0.3, 2})};
    const std::vector<std::size_t> y = {0, 0, 1, 1};
    const auto model = train(x, y, 2, 2, {});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(model.predict(x[i]) == y[i]);
    for (const auto& trace : model.traces()) {
      for (std::size_t e = 1; e < trace.dual_objective.size(); ++e) {
        CHECK(trace.dual_objective[e] <= trace.dual_objective[e - 1] + 1e-12);
      }
    }
  }

  TEST_CASE("tiny C gives near-zero weights and the majority class") {
    const std::vector<SparseVector> x = {dense({1, 0}), dense({0.9, 0.1}), dense({0.8, 0}), dense({0, 1})};
    const std::vector<std::size_t> y = {0, 0, 0, 1};
    SvmHyper h;
    h.c = 1e-8;
    const auto model = train(x, y, 2, 2, h);
    for (std::size_t k = 0; k < 2; ++k) {
      for (double w : model.weights(k)) CHECK(std::abs(w) < 1e-6);
    }
    for (const auto& xi : x) CHECK(model.predict(xi) == 0);
  }

  TEST_CASE("training is deterministic for a fixed seed") {
    const auto corpus = docs_of(disjoint_alphabet_corpus(6, 120, 3));
    std::vector<std::string> texts;
    std::vector<std::size_t> y;
    for (const auto& d : corpus) {
      texts.push_back(d.text);
      y.push_back(target_class(d.label.author));
    }
    const auto v = Vectorizer::fit(texts, VectorizerMode::kCharNgram);
    const auto x = v.transform(texts);
    const auto a = train(x, y, 3, v.vocabulary().size(), {});
    const auto b = train(x, y, 3, v.vocabulary().size(), {});
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.weights(k) == b.weights(k));
    const auto back = LinearModel::from_json(Json::parse(a.to_json().dump()));
    for (std::size_t k = 0; k < 3; ++k) CHECK(back.weights(k) == a.weights(k));
  }

  TEST_CASE("evaluation arithmetic") {
    auto r = evaluate_predictions({0, 1, 1, 0}, {0, 1, 1, 0}, {"A", "B"});
    CHECK(r.accuracy == 1.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.confusion == std::vector<std::vector<std::size_t>>{{2, 0}, {0, 2}});

    r = evaluate_predictions({0, 0, 1}, {0, 1, 1}, {"A", "B"});
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(*r.per_class_accuracy[0] == 0.5);
    CHECK(*r.per_class_accuracy[1] == 1.0);
    // F1(A) = 2/3, F1(B) = 2/3.
    CHECK(r.macro_f1 == doctest::Approx(2.0 / 3.0));

    r = evaluate_predictions({0, 0}, {0, 0}, {"A", "B"});
    CHECK_FALSE(r.per_class_accuracy[1].has_value());
  }

  TEST_CASE("transfer protocol fits on the training split only") {
    const auto ref = docs_of(disjoint_alphabet_corpus(10, 150, 8));
    auto gen = docs_of(disjoint_alphabet_corpus(4, 150, 9));
    for (auto& d : gen) {
      d.id = "gen-" + d.id;
      d.label.group = CorpusGroup::kStyleGen;
      d.label.generator = Generator::kGpt;
    }
    const auto result = transfer_protocol(ref, gen, VectorizerMode::kCharNgram);
    CHECK(result.vectorizer.fitted_documents() == 24);
    CHECK(result.validation.total == 6);
    REQUIRE(result.transfer.has_value());
    CHECK(result.transfer->total == 12);
    CHECK(result.transfer->accuracy >= 0.9);
    REQUIRE(result.transfer_by_generator.size() == 1);
    CHECK(result.transfer_by_generator[0].slice == "GPT");

    const auto [v, m] = validator_from_json(Json::parse(validator_to_json(result.vectorizer, result.model).dump()));
    CHECK(v.vocabulary() == result.vectorizer.vocabulary());
    CHECK(m.weights(0) == result.model.weights(0));
  }

  TEST_CASE("eval table has one row per class and slice") {
    const auto r = evaluate_predictions({0, 1}, {0, 1}, {"A", "B"});
    const auto t = eval_table({r});
    CHECK_FALSE(t.header.empty());
    CHECK_FALSE(t.rows.empty());
  }
}
