#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/corpus.hpp"
#include "stylespace/csv.hpp"
#include "stylespace/io.hpp"
#include "stylespace/matrix.hpp"
#include "stylespace/stylefeatures.hpp"

namespace stylespace {

enum class Pairing { kCross, kMatched };
enum class Aggregation { kNormalizedMean, kConcat };

std::string_view to_string(Pairing pairing);          // "cross" / "matched"
std::string_view to_string(Aggregation aggregation);  // "normalized-mean" / "concat"
Pairing parse_pairing(std::string_view text);
Aggregation parse_aggregation(std::string_view text);

/// Mean distance to the class centroid per document, averaged over the
/// iterations (seeded projections; a single one for the full space).
struct DispersionTable {
  std::vector<std::string> doc_ids;
  std::vector<std::string> classes;  // class key per document
  std::vector<double> mean_distance;
  std::size_t iterations = 0;
  /// class -> per-iteration centroid.
  std::map<std::string, std::vector<std::vector<double>>> centroids;

  std::optional<double> of(const std::string& doc_id) const;
};

/// `iterations` are point sets aligned with `doc_ids`; `classes` partitions
/// the rows. Throws on empty input or misaligned shapes.
DispersionTable dispersion(const std::vector<Matrix>& iterations, const std::vector<std::string>& doc_ids,
                           const std::vector<std::string>& classes);

struct ShiftSample {
  std::string ref_id;
  std::string cmp_id;
  double delta_d = 0.0;
  std::map<Family, double> delta_f;
};

/// CROSS: every (ref, cmp) pair. MATCHED: one pair per cmp document, with its
/// source. Deltas are ref minus cmp. `dispersion_of` and `features` must
/// cover every listed document.
std::vector<ShiftSample> shift_samples(const std::vector<std::string>& ref_ids,
                                       const std::vector<std::string>& cmp_ids,
                                       const std::map<std::string, double>& dispersion_of,
                                       const std::map<std::string, std::map<Family, double>>& features,
                                       Pairing pairing,
                                       const std::map<std::string, std::string>& source_of = {});

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

/// Sample Pearson r with a two-sided p-value from Student's t with n-2 df.
/// Throws kUndefined on zero variance and kInsufficientData for n < 3.
Correlation pearson(const std::vector<double>& x, const std::vector<double>& y);

struct Adjusted {
  double p_adjusted = 1.0;
  bool significant = false;
};

Adjusted bonferroni(double p_raw, std::size_t m, double alpha = 0.01);

/// One model's points in one space: a single iteration for the full space,
/// one per seed for a reduced space. Rows align with the dataset documents.
struct ModelSpace {
  std::string model;
  std::vector<Matrix> iterations;
};

struct SpaceData {
  std::string name;  // "fulld", "2d", "3d", ...
  std::vector<ModelSpace> models;
};

struct DocumentMeta {
  std::string id;
  ClassLabel label;
  std::optional<std::string> source_id;
};

struct SensitivityDataset {
  std::vector<DocumentMeta> documents;
  std::map<std::string, FeatureRecord> features;
  std::vector<SpaceData> spaces;
};

struct SensitivityConfig {
  Pairing pairing = Pairing::kCross;
  Aggregation aggregation = Aggregation::kNormalizedMean;
  std::size_t bonferroni_m = 15;
  double alpha = 0.01;
  /// Also correlate Δd with each individual feature component.
  bool component_audit = false;

  OrderedJson to_json() const;
};

struct SensitivityRow {
  std::string reference;
  std::string comparison;
  std::string slice;  // "pooled" or generator name
  std::string family;
  std::string space;
  std::string aggregation;
  std::string pairing;
  std::optional<double> r;  // nullopt: undefined (zero variance or no pairs)
  std::optional<double> p_raw;
  std::optional<double> p_adjusted;
  bool significant = false;
  std::size_t n_pairs = 0;
  std::string note;
};

struct SensitivityReport {
  SensitivityConfig config;
  std::vector<SensitivityRow> rows;        // family rows
  std::vector<SensitivityRow> components;  // per-component audit rows (family = component name)

  /// Family with the largest |r| among significant rows of one comparison,
  /// if any is significant.
  std::optional<std::string> top_significant_family(const std::string& comparison, const std::string& space,
                                                    const std::string& slice = "pooled") const;
  /// Family with the largest |r| regardless of significance.
  std::optional<std::string> top_family(const std::string& comparison, const std::string& space,
                                        const std::string& slice = "pooled") const;

  OrderedJson to_json() const;
  CsvTable to_csv() const;
};

/// Aggregated per-document dispersion for one space and class partition.
std::map<std::string, double> aggregate_dispersion(const SpaceData& space, const std::vector<std::string>& doc_ids,
                                                   const std::vector<std::string>& classes, Aggregation aggregation);

/// Tuffery_ref against every Style_ref class and every Style_gen class
/// (pooled, then per generator) present in the dataset, for every space
/// and family.
SensitivityReport sensitivity_report(const SensitivityDataset& dataset, const SensitivityConfig& config = {});

}  // namespace stylespace
