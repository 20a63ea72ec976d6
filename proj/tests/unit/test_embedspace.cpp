#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "stylespace/embedspace.hpp"
#include "stylespace/error.hpp"
#include "stylespace/io.hpp"
#include "support/support.hpp"

using namespace stylespace;
using testing::TempDir;

namespace {

EmbeddingSet toy(std::size_t rows, std::size_t dim) {
  EmbeddingSet s;
  s.model_name = "toy";
  s.dim = dim;
  for (std::size_t r = 0; r < rows; ++r) {
    s.doc_ids.push_back("d" + std::to_string(r));
    for (std::size_t c = 0; c < dim; ++c) s.values.push_back(static_cast<float>(r * 10 + c) / 7.0f);
  }
  return s;
}

/// Definition-level trustworthiness: ranks by brute-force sorting.
double trust_oracle(const Matrix& hi, const Matrix& lo, std::size_t k) {
  const std::size_t n = hi.rows();
  auto ranks = [&](const Matrix& m, std::size_t i) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return squared_distance(m.row(i), m.row(a)) < squared_distance(m.row(i), m.row(b));
    });
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
    return std::pair{order, rank};
  };
  double penalty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [hi_order, hi_rank] = ranks(hi, i);
    const auto [lo_order, lo_rank] = ranks(lo, i);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = lo_order[r];
      if (hi_rank[j] > k) penalty += static_cast<double>(hi_rank[j] - k);
    }
  }
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

}  // namespace

TEST_SUITE("embedspace") {
  TEST_CASE("binary and JSONL round trips") {
    TempDir dir;
    const auto set = toy(2, 5);
    write_embedding_binary(set, dir / "toy.json", dir / "toy.f32");
    CHECK(read_embedding_binary(dir / "toy.json") == set);
    write_embedding_jsonl(set, dir / "toy.jsonl");
    CHECK(read_embedding_jsonl(dir / "toy.jsonl", "toy", 5) == set);
    CHECK(set.to_matrix().rows() == 2);
    CHECK(set.to_matrix().cols() == 5);
  }

  TEST_CASE("loading reorders rows to the corpus and validates") {
    TempDir dir;
    const auto set = toy(3, 2);
    write_embedding_binary(set, dir / "toy.json", dir / "toy.f32");
    write_embedding_manifest(dir / "manifest.json", {{"toy", 2, "f32", dir / "toy.json"}});
    const auto entries = load_embedding_manifest(dir / "manifest.json");
    REQUIRE(entries.size() == 1);

    const auto aligned = load_embeddings(entries[0], {"d2", "d0", "d1"});
    CHECK(aligned.doc_ids == std::vector<std::string>{"d2", "d0", "d1"});
    CHECK(aligned.values[0] == set.values[4]);

    CHECK_THROWS_AS(load_embeddings(entries[0], {"d0", "d1"}), Error);
    try {
      load_embeddings(entries[0], {"d0", "d1", "zz"});
      FAIL("expected unknown id");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kUnknownId);
      CHECK(e.subject() == "zz");
    }
  }

  TEST_CASE("a NaN is rejected with its row") {
    TempDir dir;
    auto set = toy(3, 2);
    set.values[3] = std::numeric_limits<float>::quiet_NaN();
    write_embedding_binary(set, dir / "toy.json", dir / "toy.f32");
    try {
      load_embeddings({"toy", 2, "f32", dir / "toy.json"}, set.doc_ids);
      FAIL("expected non-finite error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kNonFinite);
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
  }

  TEST_CASE("purity examples") {
    CHECK(purity({0, 0, 1, 1, 2, 2}, encode_labels({"A", "A", "B", "B", "B", "C"})) == doctest::Approx(5.0 / 6.0));
    CHECK(purity({0, 1, 2, 1}, {0, 1, 2, 1}) == 1.0);
    // Relabeling clusters changes nothing.
    CHECK(purity({2, 2, 0, 0, 1, 1}, encode_labels({"A", "A", "B", "B", "B", "C"})) == doctest::Approx(5.0 / 6.0));
  }

  TEST_CASE("k-means: blobs, k = n, determinism") {
    std::vector<std::size_t> labels;
    const auto x = testing::blobs(3, 30, 4, 10.0, 5, &labels);
    const auto c = kmeans(x, 3, 1);
    CHECK(purity(c.assignments, labels) == 1.0);
    CHECK(kmeans(x, 3, 1).assignments == c.assignments);
    CHECK(c.restart_inertia.size() == KMeansOptions{}.n_init);

    const auto small = testing::blobs(1, 6, 2, 0.0, 9);
    const auto each = kmeans(small, 6, 0);
    CHECK(each.inertia == 0.0);
    CHECK(std::set<std::size_t>(each.assignments.begin(), each.assignments.end()).size() == 6);
    CHECK_THROWS_AS(kmeans(small, 7, 0), Error);
  }

  TEST_CASE("trustworthiness matches the definition") {
    const auto hi = testing::blobs(2, 15, 6, 3.0, 11);
    Matrix lo(hi.rows(), 2);
    for (std::size_t r = 0; r < hi.rows(); ++r) {
      lo(r, 0) = hi(r, 0);
      lo(r, 1) = hi(r, 3);
    }
    CHECK(trustworthiness(hi, hi, 5) == doctest::Approx(1.0));
    for (std::size_t k : {1, 3, 5}) CHECK(trustworthiness(hi, lo, k) == doctest::Approx(trust_oracle(hi, lo, k)).epsilon(1e-12));
  }

  TEST_CASE("fidelity summary arithmetic") {
    const std::map<std::string, double> full = {{"a", 0.70}, {"b", 0.60}};
    const auto report = summarize_fidelity(full, {{2, {{"a", 0.68}, {"b", 0.63}}}, {3, full}});
    REQUIRE(report.dims.size() == 2);
    CHECK(report.dims[0].mae == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(report.dims[0].max_ae == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(report.dims[1].mae == 0.0);
    CHECK(report.dims[1].max_ae == 0.0);
    CHECK(report.dims[report.ranking.front()].dim == 3);
  }

  TEST_CASE("coverage ellipse") {
    Rng rng(3);
    Matrix pts(10, 2);
    for (auto& v : pts.data()) v = rng.normal();
    const auto e = coverage_ellipse(pts, 0.8);
    std::size_t inside = 0;
    for (std::size_t r = 0; r < 10; ++r) inside += e.contains(pts(r, 0), pts(r, 1));
    CHECK(inside == 8);

    const auto all = coverage_ellipse(pts, 1.0);
    for (std::size_t r = 0; r < 10; ++r) CHECK(all.contains(pts(r, 0), pts(r, 1)));

    Matrix circle(4000, 2);
    for (std::size_t r = 0; r < circle.rows(); ++r) {
      circle(r, 0) = rng.normal();
      circle(r, 1) = rng.normal();
    }
    const auto iso = coverage_ellipse(circle, 0.8);
    CHECK(iso.semi_major / iso.semi_minor == doctest::Approx(1.0).epsilon(0.1));
  }
}
