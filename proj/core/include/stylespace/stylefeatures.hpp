#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/annotate.hpp"
#include "stylespace/csv.hpp"

namespace stylespace {

enum class Family { kStructural, kTag, kEntropy, kLetters, kNer };

inline constexpr std::array<Family, 5> kFamilies = {Family::kStructural, Family::kTag, Family::kEntropy,
                                                    Family::kLetters, Family::kNer};

std::string_view to_string(Family family);  // "Structural", "TAG", "Entropy", "Letters", "NER"
Family parse_family(std::string_view text);

struct StructuralFeatures {
  double mean_word_length = 0.0;      // characters per word token
  double mean_sentence_length = 0.0;  // word tokens per sentence
  double normalized_word_length = 0.0;      // mean_word_length / word count
  double normalized_sentence_length = 0.0;  // mean_sentence_length / word count
};

struct PosFrequencies {
  double noun = 0.0;
  double verb = 0.0;
  double adj = 0.0;
};

struct LetterFeatures {
  /// Lowercased letter (UTF-8) → relative frequency among letters.
  std::map<std::string, double> distribution;
  double capitalized_fraction = 0.0;
};

struct StyleFeatureVector {
  std::string doc_id;
  StructuralFeatures structural;
  PosFrequencies pos;
  double entropy_bits = 0.0;
  LetterFeatures letters;
  double ner_density = 0.0;
  /// Filled by family_scalars once population statistics are fitted.
  std::map<Family, double> family_scalar;
};

/// Throws kInsufficientData when there are no word tokens.
StructuralFeatures structural_features(const AnnotationSet& annotations);
PosFrequencies pos_frequencies(const AnnotationSet& annotations);
/// Shannon entropy in bits of lowercased word-token frequencies.
double lexical_entropy(const std::vector<Token>& tokens);
LetterFeatures letter_features(std::string_view text, const std::vector<Token>& tokens);
double ner_density(const AnnotationSet& annotations);

StyleFeatureVector compute_features(std::string_view text, const AnnotationSet& annotations);

/// Named scalar components in a fixed order, with the family each belongs to.
/// Letter components are named "letter:<c>" and follow the population alphabet.
struct Component {
  std::string name;
  Family family;
};

/// Per-component mean and population standard deviation over a dataset.
class PopulationStats {
 public:
  static PopulationStats fit(const std::vector<StyleFeatureVector>& features);

  bool fitted() const { return fitted_; }
  const std::vector<Component>& components() const { return components_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }

  /// Component values of `features` in components() order.
  std::vector<double> values(const StyleFeatureVector& features) const;

 private:
  bool fitted_ = false;
  std::vector<Component> components_;
  std::vector<double> mean_;
  std::vector<double> stddev_;
};

/// Mean of z-scored components per family; zero-variance components count as 0.
std::map<Family, double> family_scalars(const StyleFeatureVector& features, const PopulationStats& stats);

/// Fits population stats on `features` and fills every family_scalar map.
PopulationStats attach_family_scalars(std::vector<StyleFeatureVector>& features);

/// One row per document; raw and normalized structural values, every
/// component, and the five family scalars.
CsvTable feature_table(const std::vector<StyleFeatureVector>& features, const PopulationStats& stats);

/// Per-document family scalars and components read back from a feature table.
struct FeatureRecord {
  std::map<Family, double> family;
  std::map<std::string, double> components;
};
std::map<std::string, FeatureRecord> read_feature_table(const CsvTable& table);

}  // namespace stylespace
