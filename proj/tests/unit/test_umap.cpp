#include <doctest.h>

#include <cmath>

#include "stylespace/embedspace.hpp"
#include "stylespace/error.hpp"
#include "stylespace/umap.hpp"
#include "support/support.hpp"

using namespace stylespace;

TEST_SUITE("umap") {
  TEST_CASE("curve parameters for the default spread and min_dist") {
    const auto [a, b] = find_ab_params(1.0, 0.1);
    CHECK(a == doctest::Approx(1.577).epsilon(0.01));
    CHECK(b == doctest::Approx(0.895).epsilon(0.01));
  }

  TEST_CASE("preconditions") {
    const auto x = testing::blobs(1, 10, 3, 0.0, 1);
    UmapParams p;
    p.n_neighbors = 10;
    CHECK_THROWS_AS(umap_reduce(x, 2, 0, p), Error);
    p.n_neighbors = 5;
    CHECK_THROWS_AS(umap_reduce(x, kMaxUmapDim + 1, 0, p), Error);
    p.min_dist = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);
  }

  TEST_CASE("graph memberships") {
    const auto x = testing::blobs(2, 20, 5, 8.0, 2);
    const auto g = UmapGraph::build(x, {});
    CHECK(g.size() == 40);
    REQUIRE(g.heads().size() == g.weights().size());
    for (double w : g.weights()) {
      CHECK(w > 0.0);
      CHECK(w <= 1.0);
    }
    for (double s : g.sigmas()) CHECK(s > 0.0);
  }

  TEST_CASE("deterministic per seed, different across seeds") {
    const auto x = testing::blobs(3, 20, 8, 10.0, 4);
    UmapParams p;
    p.n_neighbors = 10;
    p.n_epochs = 50;
    const auto a = umap_reduce(x, 2, 7, p);
    const auto b = umap_reduce(x, 2, 7, p);
    CHECK(a == b);
    CHECK_FALSE(a == umap_reduce(x, 2, 8, p));
  }

  TEST_CASE("blobs stay separated") {
    std::vector<std::size_t> labels;
    const auto x = testing::blobs(3, 40, 20, 10.0, 5, &labels);
    const auto low = umap_reduce(x, 2, 0);
    CHECK(purity(kmeans(low, 3, 0).assignments, labels) == 1.0);
    CHECK(trustworthiness(x, low, 10) > 0.85);
  }

  TEST_CASE("identical points do not break the layout") {
    Matrix x(20, 3, 1.0);
    const auto low = umap_reduce(x, 2, 0);
    for (double v : low.data()) CHECK(std::isfinite(v));
  }

  TEST_CASE("reduce_all ordering, thread independence and storage") {
    const auto x = testing::blobs(2, 15, 4, 6.0, 6);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < x.rows(); ++i) ids.push_back("d" + std::to_string(i));
    const auto set = EmbeddingSet::from_matrix("m", ids, x);
    UmapParams p;
    p.n_neighbors = 5;
    p.n_epochs = 30;
    const auto one = reduce_all(set, {2, 3}, 2, p, 1);
    const auto many = reduce_all(set, {2, 3}, 2, p, 4);
    REQUIRE(one.size() == 4);
    CHECK(one[0].target_dim == 2);
    CHECK(one[1].seed == 1);
    CHECK(one[2].target_dim == 3);
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(one[i].points == many[i].points);

    testing::TempDir dir;
    write_reductions(dir.path(), one, p);
    const auto back = read_reductions(dir / "reductions.json");
    REQUIRE(back.size() == one.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(back[i].model_name == "m");
      CHECK(back[i].doc_ids == ids);
      // Stored as float32.
      for (std::size_t v = 0; v < one[i].points.data().size(); ++v) {
        CHECK(back[i].points.data()[v] == static_cast<double>(static_cast<float>(one[i].points.data()[v])));
      }
    }
  }

  TEST_CASE("fidelity with identical labels in every space") {
    std::vector<std::size_t> labels;
    const auto x = testing::blobs(3, 20, 6, 12.0, 8, &labels);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < x.rows(); ++i) ids.push_back("d" + std::to_string(i));
    FidelityOptions o;
    o.dims = {2};
    o.seeds = 3;
    o.umap.n_neighbors = 8;
    o.umap.n_epochs = 60;
    const auto report = reduction_fidelity({EmbeddingSet::from_matrix("m", ids, x)}, labels, o);
    CHECK(report.fulld_purity.at("m") == 1.0);
    CHECK(report.dims[0].mae == 0.0);
    CHECK(report.per_seed.at("m").at(2).size() == 3);
  }
}
