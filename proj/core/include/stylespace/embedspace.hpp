#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylespace/csv.hpp"
#include "stylespace/io.hpp"
#include "stylespace/matrix.hpp"

namespace stylespace {

/// One model's document vectors, rows aligned to `doc_ids`.
struct EmbeddingSet {
  std::string model_name;
  std::size_t dim = 0;
  std::vector<std::string> doc_ids;
  std::vector<float> values;  // row-major, doc_ids.size() * dim

  std::size_t rows() const { return doc_ids.size(); }
  Matrix to_matrix() const;
  static EmbeddingSet from_matrix(std::string model_name, std::vector<std::string> doc_ids, const Matrix& m);

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

/// Binary layout: little-endian IEEE-754 float32, row-major, no padding.
/// The JSON sidecar header carries {model, dim, rows, doc_ids, data, dtype}
/// with `data` resolved relative to the header's directory.
void write_embedding_binary(const EmbeddingSet& set, const std::filesystem::path& header_path,
                            const std::filesystem::path& data_path);
EmbeddingSet read_embedding_binary(const std::filesystem::path& header_path);

/// JSONL fixture format: one {"doc_id": ..., "vector": [...]} per line.
EmbeddingSet read_embedding_jsonl(const std::filesystem::path& path, std::string model_name, std::size_t dim);
void write_embedding_jsonl(const EmbeddingSet& set, const std::filesystem::path& path);

struct EmbeddingManifestEntry {
  std::string model;
  std::size_t dim = 0;
  std::string format;  // "f32" or "jsonl"
  std::filesystem::path path;  // header (f32) or data file (jsonl), absolute after loading
};

/// {"models": [{"model", "dim", "format", "path"}]}; paths relative to the manifest.
std::vector<EmbeddingManifestEntry> load_embedding_manifest(const std::filesystem::path& path);
void write_embedding_manifest(const std::filesystem::path& path, const std::vector<EmbeddingManifestEntry>& entries);

/// Reads one model and reorders rows to `corpus_ids`. Rejects dimension
/// mismatches, missing or extra documents, and non-finite values (with row).
EmbeddingSet load_embeddings(const EmbeddingManifestEntry& entry, const std::vector<std::string>& corpus_ids);

struct KMeansOptions {
  std::size_t n_init = 10;
  std::size_t max_iter = 300;
  double tolerance = 1e-4;  // relative inertia improvement
};

struct Clustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> restart_inertia;  // one per restart, in run order
};

/// Greedy k-means++ seeding, Lloyd iterations, n_init restarts; the
/// lowest-inertia restart wins (earliest on ties). Empty clusters are
/// reseeded to the point farthest from its centroid.
Clustering kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& options = {});

/// (1/N) * sum over clusters of the majority label count.
double purity(const std::vector<std::size_t>& assignments, const std::vector<std::size_t>& labels);

/// Dense 0..L-1 codes for arbitrary string labels, in first-seen order.
std::vector<std::size_t> encode_labels(const std::vector<std::string>& labels);

/// Fraction of low-dimensional k-neighbourhoods that are true neighbours,
/// penalised by high-dimensional rank (Venna & Kaski). Exact O(n^2 log n).
double trustworthiness(const Matrix& high, const Matrix& low, std::size_t k);

struct DimFidelity {
  std::size_t dim = 0;
  std::map<std::string, double> reduced_purity;  // per model
  double mae = 0.0;
  double max_ae = 0.0;
};

struct FidelityReport {
  std::map<std::string, double> fulld_purity;
  std::vector<DimFidelity> dims;         // input order
  std::vector<std::size_t> ranking;      // dims sorted best first (MAE, then MaxAE)
  /// Raw per-seed purities: model -> dim -> seed-ordered values.
  std::map<std::string, std::map<std::size_t, std::vector<double>>> per_seed;

  OrderedJson to_json() const;
  CsvTable to_csv() const;
};

/// MAE/MaxAE of reduced purities against FullD purity across models.
FidelityReport summarize_fidelity(const std::map<std::string, double>& fulld,
                                  const std::map<std::size_t, std::map<std::string, double>>& reduced);

struct Ellipse {
  std::array<double, 2> center{};
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;   // radians, major axis against +x
  double radius = 0.0;  // Mahalanobis radius
  std::array<double, 4> inverse_covariance{};  // row-major 2x2

  double mahalanobis(double x, double y) const;
  bool contains(double x, double y) const;
};

/// Covariance ellipse scaled to the ceil(fraction * n)-th smallest
/// Mahalanobis distance, so that many points lie inside (boundary included).
Ellipse coverage_ellipse(const Matrix& points, double fraction = 0.8);

}  // namespace stylespace
