#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stylespace/embedspace.hpp"
#include "stylespace/io.hpp"
#include "stylespace/matrix.hpp"

namespace stylespace {

struct UmapParams {
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  double spread = 1.0;
  std::size_t n_epochs = 200;
  double learning_rate = 1.0;
  std::size_t negative_sample_rate = 5;
  double repulsion_strength = 1.0;

  void validate() const;
  OrderedJson to_json() const;
};

/// Fits 1 / (1 + a d^(2b)) to the min_dist/spread target curve.
std::pair<double, double> find_ab_params(double spread, double min_dist);

/// Everything in UMAP that does not depend on the seed: the fuzzy graph and
/// the spectral eigenvectors. Build once, reduce for many seeds and dims.
class UmapGraph {
 public:
  static UmapGraph build(const Matrix& x, const UmapParams& params);

  std::size_t size() const { return n_; }
  bool degenerate() const { return degenerate_; }
  /// Symmetric edge list (both directions), weights in (0, 1].
  const std::vector<std::uint32_t>& heads() const { return head_; }
  const std::vector<std::uint32_t>& tails() const { return tail_; }
  const std::vector<double>& weights() const { return weight_; }
  /// Per-point smooth kNN normalisers (for tests).
  const std::vector<double>& sigmas() const { return sigma_; }
  const std::vector<double>& rhos() const { return rho_; }

  /// Unscaled spectral coordinates for `dim` components, or empty when the
  /// eigensolver could not provide them (falls back to random init).
  Matrix spectral(std::size_t dim) const;

 private:
  std::size_t n_ = 0;
  bool degenerate_ = false;
  std::vector<std::uint32_t> head_;
  std::vector<std::uint32_t> tail_;
  std::vector<double> weight_;
  std::vector<double> sigma_;
  std::vector<double> rho_;
  Matrix eigvecs_;  // n x (max_dim + 1), ascending eigenvalues
};

inline constexpr std::size_t kMaxUmapDim = 10;

/// One seeded projection from a prepared graph.
Matrix umap_embed(const UmapGraph& graph, std::size_t target_dim, std::uint64_t seed, const UmapParams& params);

struct ReducedEmbedding {
  std::string model_name;
  std::size_t target_dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> doc_ids;
  Matrix points;
};

/// Convenience: build graph + embed. Deterministic for a fixed seed.
ReducedEmbedding umap_reduce(const EmbeddingSet& set, std::size_t target_dim, std::uint64_t seed,
                             const UmapParams& params = {});
Matrix umap_reduce(const Matrix& x, std::size_t target_dim, std::uint64_t seed, const UmapParams& params = {});

/// All (dim, seed) projections of one set; seeds are 0..seeds-1, run on
/// `threads` workers. Ordered by (dim, seed).
std::vector<ReducedEmbedding> reduce_all(const EmbeddingSet& set, const std::vector<std::size_t>& dims,
                                         std::size_t seeds, const UmapParams& params, std::size_t threads = 0);

/// {"umap": params, "reductions": [{"model","dim","seed","path"}]}; each
/// projection is stored in the embedding binary format.
void write_reductions(const std::filesystem::path& dir, const std::vector<ReducedEmbedding>& reductions,
                      const UmapParams& params);
std::vector<ReducedEmbedding> read_reductions(const std::filesystem::path& manifest_path);

struct FidelityOptions {
  std::vector<std::size_t> dims = {2, 3, 10};
  std::size_t seeds = 30;
  std::size_t k = 3;
  UmapParams umap;
  std::size_t threads = 0;
};

/// FullD purity (k-means seed 0) per model, reduced purity = mean over
/// seeded projections of purity (k-means seed 0 each), then MAE/MaxAE.
/// `labels` are aligned with every set's rows. Reductions may be supplied
/// pre-computed; missing ones are computed.
FidelityReport reduction_fidelity(const std::vector<EmbeddingSet>& sets, const std::vector<std::size_t>& labels,
                                  const FidelityOptions& options = {},
                                  const std::vector<ReducedEmbedding>& precomputed = {});

}  // namespace stylespace
