#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylespace/corpus.hpp"
#include "stylespace/csv.hpp"
#include "stylespace/io.hpp"

namespace stylespace {

enum class VectorizerMode { kCharNgram, kFunctionWords };

std::string_view to_string(VectorizerMode mode);  // "char-ngram" / "function-words"
VectorizerMode parse_vectorizer_mode(std::string_view text);

/// Sorted-index sparse vector.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  double norm() const;
};

/// TF-IDF vectorizer over character 3-5-grams of the raw text, or over a
/// fixed function-word list. idf(t) = ln((1 + N) / (1 + df(t))) + 1 with N
/// the number of fitted documents; rows are L2-normalized.
class Vectorizer {
 public:
  static constexpr std::size_t kMinN = 3;
  static constexpr std::size_t kMaxN = 5;

  /// `function_words` is only used in kFunctionWords mode; an empty list
  /// selects the bundled lexicon.
  static Vectorizer fit(const std::vector<std::string>& texts, VectorizerMode mode,
                        std::vector<std::string> function_words = {});

  SparseVector transform(std::string_view text) const;
  std::vector<SparseVector> transform(const std::vector<std::string>& texts) const;

  VectorizerMode mode() const { return mode_; }
  const std::vector<std::string>& vocabulary() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  std::optional<std::uint32_t> term_id(const std::string& term) const;
  const std::string& fitted_on() const { return fingerprint_; }
  std::size_t fitted_documents() const { return n_docs_; }

  OrderedJson to_json() const;
  static Vectorizer from_json(const Json& json);

 private:
  std::unordered_map<std::string, std::size_t> raw_counts(std::string_view text) const;

  VectorizerMode mode_ = VectorizerMode::kCharNgram;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
  std::string fingerprint_;
  std::size_t n_docs_ = 0;
};

/// Raw term counts used by the vectorizer (exposed for oracles and tests).
std::map<std::string, std::size_t> char_ngrams(std::string_view text, std::size_t min_n = 3, std::size_t max_n = 5);

struct SvmHyper {
  double c = 1.0;
  double tolerance = 1e-4;
  int max_epochs = 1000;
  std::uint64_t seed = 0;
};

struct TrainingTrace {
  std::vector<double> dual_objective;  // per epoch, non-increasing
  std::vector<double> primal_objective;
  int epochs = 0;
  bool converged = false;
};

/// One-vs-rest linear classifier trained with the L2-regularized squared
/// hinge loss (1/2)|w|^2 + C * sum max(0, 1 - y (w.x + b))^2. The bias is an
/// extra constant feature and is regularized with the weights.
class LinearModel {
 public:
  std::size_t num_classes() const { return weights_.size(); }
  std::size_t dimension() const { return dim_; }
  const std::vector<double>& weights(std::size_t k) const { return weights_[k]; }
  double bias(std::size_t k) const { return bias_[k]; }
  const SvmHyper& hyper() const { return hyper_; }
  const std::vector<TrainingTrace>& traces() const { return traces_; }

  std::vector<double> decision(const SparseVector& x) const;
  /// Argmax of decision values; ties go to the lowest class index.
  std::size_t predict(const SparseVector& x) const;

  OrderedJson to_json() const;
  static LinearModel from_json(const Json& json);

 private:
  friend LinearModel train(const std::vector<SparseVector>&, const std::vector<std::size_t>&, std::size_t,
                           std::size_t, const SvmHyper&);
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
  SvmHyper hyper_;
  std::vector<TrainingTrace> traces_;
};

/// Dual coordinate descent per class, sweeping instances in a seeded random
/// order each epoch; stops when the duality gap falls below
/// tolerance * primal objective, or after max_epochs.
LinearModel train(const std::vector<SparseVector>& x, const std::vector<std::size_t>& y, std::size_t num_classes,
                  std::size_t dimension, const SvmHyper& hyper);

struct EvalReport {
  std::vector<std::string> class_names;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::optional<double>> per_class_accuracy;  // recall; empty support → nullopt
  std::vector<std::vector<std::size_t>> confusion;        // [gold][predicted]
  std::size_t total = 0;
  std::optional<std::string> slice;

  std::vector<std::size_t> support() const;
  OrderedJson to_json() const;
};

EvalReport evaluate_predictions(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                                const std::vector<std::string>& class_names);

EvalReport evaluate(const LinearModel& model, const std::vector<SparseVector>& x, const std::vector<std::size_t>& y,
                    const std::vector<std::string>& class_names);

/// Reports per distinct slice value, in sorted slice order.
std::vector<EvalReport> evaluate_slices(const LinearModel& model, const std::vector<SparseVector>& x,
                                        const std::vector<std::size_t>& y, const std::vector<std::string>& slices,
                                        const std::vector<std::string>& class_names);

struct TransferOptions {
  double train_fraction = 0.8;
  std::uint64_t split_seed = 42;
  SvmHyper hyper;
  std::vector<std::string> function_words;  // empty → bundled list
};

struct TransferResult {
  Vectorizer vectorizer;
  LinearModel model;
  EvalReport validation;
  std::optional<EvalReport> transfer;
  std::vector<EvalReport> transfer_by_generator;
};

/// Index of a target author in validator class order; throws for Tufféry.
std::size_t target_class(Author author);
std::vector<std::string> target_class_names();

/// Splits `style_ref` 80/20 by author, fits on the train part only, and
/// scores the held-out part and the whole of `style_gen` (may be empty).
TransferResult transfer_protocol(const std::vector<Document>& style_ref, const std::vector<Document>& style_gen,
                                 VectorizerMode mode, const TransferOptions& options = {});

/// Bundled model container: vectorizer + model + provenance.
OrderedJson validator_to_json(const Vectorizer& vectorizer, const LinearModel& model);
std::pair<Vectorizer, LinearModel> validator_from_json(const Json& json);

CsvTable eval_table(const std::vector<EvalReport>& reports);

}  // namespace stylespace
