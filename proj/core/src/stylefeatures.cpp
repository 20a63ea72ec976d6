#include "stylespace/stylefeatures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

#include "stylespace/error.hpp"
#include "stylespace/io.hpp"
#include "stylespace/lexicon.hpp"
#include "stylespace/utf8.hpp"

namespace stylespace {
namespace {

constexpr std::string_view kLetterPrefix = "letter:";
constexpr std::string_view kFamilyPrefix = "family:";

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kSchema, "non-numeric value '" + text + "' in " + where, where);
  }
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kStructural: return "Structural";
    case Family::kTag: return "TAG";
    case Family::kEntropy: return "Entropy";
    case Family::kLetters: return "Letters";
    case Family::kNer: return "NER";
  }
  return "?";
}

Family parse_family(std::string_view text) {
  for (Family f : kFamilies) {
    std::string a(to_string(f));
    std::string b(text);
    for (auto& c : a) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto& c : b) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (a == b) return f;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown feature family '" + std::string(text) + "'", std::string(text));
}

StructuralFeatures structural_features(const AnnotationSet& annotations) {
  std::size_t words = 0;
  std::size_t chars = 0;
  for (const auto& t : annotations.tokens) {
    if (!t.is_word()) continue;
    ++words;
    chars += t.end - t.begin;
  }
  if (words == 0) throw Error(ErrorKind::kInsufficientData, "document has no word tokens", annotations.doc_id);
  if (annotations.sentences.empty()) throw Error(ErrorKind::kInsufficientData, "document has no sentences", annotations.doc_id);
  StructuralFeatures out;
  const auto w = static_cast<double>(words);
  out.mean_word_length = static_cast<double>(chars) / w;
  out.mean_sentence_length = w / static_cast<double>(annotations.sentences.size());
  out.normalized_word_length = out.mean_word_length / w;
  out.normalized_sentence_length = out.mean_sentence_length / w;
  return out;
}

PosFrequencies pos_frequencies(const AnnotationSet& annotations) {
  std::size_t words = 0;
  std::size_t noun = 0;
  std::size_t verb = 0;
  std::size_t adj = 0;
  for (std::size_t i = 0; i < annotations.tokens.size(); ++i) {
    if (!annotations.tokens[i].is_word()) continue;
    ++words;
    switch (annotations.pos.at(i)) {
      case Pos::kNoun: ++noun; break;
      case Pos::kVerb: ++verb; break;
      case Pos::kAdj: ++adj; break;
      case Pos::kOther: break;
    }
  }
  if (words == 0) throw Error(ErrorKind::kInsufficientData, "document has no word tokens", annotations.doc_id);
  const auto w = static_cast<double>(words);
  return {static_cast<double>(noun) / w, static_cast<double>(verb) / w, static_cast<double>(adj) / w};
}

double lexical_entropy(const std::vector<Token>& tokens) {
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& t : tokens) {
    if (!t.is_word()) continue;
    ++counts[lexicon::normalize_word(t.surface)];
    ++total;
  }
  if (total == 0) throw Error(ErrorKind::kInsufficientData, "no word tokens for entropy");
  // Sum in a fixed order so the result does not depend on hash iteration.
  std::vector<std::size_t> sorted;
  sorted.reserve(counts.size());
  for (const auto& [w, c] : counts) sorted.push_back(c);
  std::sort(sorted.begin(), sorted.end());
  double h = 0.0;
  const auto n = static_cast<double>(total);
  for (std::size_t c : sorted) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;
}

LetterFeatures letter_features(std::string_view text, const std::vector<Token>& tokens) {
  auto cps = utf8::decode(text);
  if (!cps) throw Error(ErrorKind::kDecode, "text is not valid UTF-8");
  std::map<char32_t, std::size_t> counts;
  std::size_t letters = 0;
  for (char32_t c : *cps) {
    if (!utf8::is_letter(c)) continue;
    ++counts[utf8::to_lower(c)];
    ++letters;
  }
  LetterFeatures out;
  for (const auto& [c, k] : counts) out.distribution[utf8::encode(c)] = static_cast<double>(k) / static_cast<double>(letters);
  std::size_t words = 0;
  std::size_t capitalized = 0;
  for (const auto& t : tokens) {
    if (!t.is_word()) continue;
    ++words;
    auto tc = utf8::decode(t.surface);
    if (tc && !tc->empty() && utf8::is_upper(tc->front())) ++capitalized;
  }
  out.capitalized_fraction = words ? static_cast<double>(capitalized) / static_cast<double>(words) : 0.0;
  return out;
}

double ner_density(const AnnotationSet& annotations) {
  if (annotations.sentences.empty()) throw Error(ErrorKind::kInsufficientData, "document has no sentences", annotations.doc_id);
  return static_cast<double>(annotations.entities.size()) / static_cast<double>(annotations.sentences.size());
}

StyleFeatureVector compute_features(std::string_view text, const AnnotationSet& annotations) {
  StyleFeatureVector f;
  f.doc_id = annotations.doc_id;
  f.structural = structural_features(annotations);
  f.pos = pos_frequencies(annotations);
  f.entropy_bits = lexical_entropy(annotations.tokens);
  f.letters = letter_features(text, annotations.tokens);
  f.ner_density = ner_density(annotations);
  return f;
}

PopulationStats PopulationStats::fit(const std::vector<StyleFeatureVector>& features) {
  PopulationStats stats;
  stats.components_ = {
      {"mean_word_length", Family::kStructural},
      {"mean_sentence_length", Family::kStructural},
      {"noun", Family::kTag},
      {"verb", Family::kTag},
      {"adj", Family::kTag},
      {"entropy_bits", Family::kEntropy},
  };
  std::set<std::string> alphabet;
  for (const auto& f : features) {
    for (const auto& [letter, p] : f.letters.distribution) alphabet.insert(letter);
  }
  for (const auto& letter : alphabet) stats.components_.push_back({std::string(kLetterPrefix) + letter, Family::kLetters});
  stats.components_.push_back({"capitalized_fraction", Family::kLetters});
  stats.components_.push_back({"ner_density", Family::kNer});

  const std::size_t m = stats.components_.size();
  stats.mean_.assign(m, 0.0);
  stats.stddev_.assign(m, 0.0);
  if (!features.empty()) {
    std::vector<std::vector<double>> rows;
    rows.reserve(features.size());
    stats.fitted_ = true;  // values() needs the component list only
    for (const auto& f : features) rows.push_back(stats.values(f));
    const auto n = static_cast<double>(features.size());
    for (std::size_t c = 0; c < m; ++c) {
      double sum = 0.0;
      for (const auto& r : rows) sum += r[c];
      const double mu = sum / n;
      double ss = 0.0;
      for (const auto& r : rows) ss += (r[c] - mu) * (r[c] - mu);
      stats.mean_[c] = mu;
      stats.stddev_[c] = std::sqrt(ss / n);
    }
  }
  stats.fitted_ = !features.empty();
  return stats;
}

std::vector<double> PopulationStats::values(const StyleFeatureVector& f) const {
  std::vector<double> out;
  out.reserve(components_.size());
  for (const auto& c : components_) {
    if (c.name == "mean_word_length") out.push_back(f.structural.mean_word_length);
    else if (c.name == "mean_sentence_length") out.push_back(f.structural.mean_sentence_length);
    else if (c.name == "noun") out.push_back(f.pos.noun);
    else if (c.name == "verb") out.push_back(f.pos.verb);
    else if (c.name == "adj") out.push_back(f.pos.adj);
    else if (c.name == "entropy_bits") out.push_back(f.entropy_bits);
    else if (c.name == "capitalized_fraction") out.push_back(f.letters.capitalized_fraction);
    else if (c.name == "ner_density") out.push_back(f.ner_density);
    else {
      auto it = f.letters.distribution.find(c.name.substr(kLetterPrefix.size()));
      out.push_back(it == f.letters.distribution.end() ? 0.0 : it->second);
    }
  }
  return out;
}

std::map<Family, double> family_scalars(const StyleFeatureVector& features, const PopulationStats& stats) {
  if (!stats.fitted()) throw Error(ErrorKind::kInvalidArgument, "population statistics are not fitted", features.doc_id);
  const auto values = stats.values(features);
  std::map<Family, double> sum;
  std::map<Family, std::size_t> count;
  for (std::size_t c = 0; c < values.size(); ++c) {
    const Family fam = stats.components()[c].family;
    const double sd = stats.stddev()[c];
    sum[fam] += sd > 0.0 ? (values[c] - stats.mean()[c]) / sd : 0.0;
    ++count[fam];
  }
  std::map<Family, double> out;
  for (Family f : kFamilies) out[f] = count[f] ? sum[f] / static_cast<double>(count[f]) : 0.0;
  return out;
}

PopulationStats attach_family_scalars(std::vector<StyleFeatureVector>& features) {
  PopulationStats stats = PopulationStats::fit(features);
  for (auto& f : features) f.family_scalar = family_scalars(f, stats);
  return stats;
}

CsvTable feature_table(const std::vector<StyleFeatureVector>& features, const PopulationStats& stats) {
  CsvTable table;
  table.header = {"doc_id", "normalized_word_length", "normalized_sentence_length"};
  for (const auto& c : stats.components()) table.header.push_back(c.name);
  for (Family f : kFamilies) table.header.push_back(std::string(kFamilyPrefix) + std::string(to_string(f)));
  for (const auto& f : features) {
    std::vector<std::string> row = {f.doc_id, format_double(f.structural.normalized_word_length),
                                     format_double(f.structural.normalized_sentence_length)};
    for (double v : stats.values(f)) row.push_back(format_double(v));
    const auto scalars = f.family_scalar.empty() ? family_scalars(f, stats) : f.family_scalar;
    for (Family fam : kFamilies) row.push_back(format_double(scalars.at(fam)));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::map<std::string, FeatureRecord> read_feature_table(const CsvTable& table) {
  const std::size_t id_col = table.column("doc_id");
  std::map<std::string, FeatureRecord> out;
  for (const auto& row : table.rows) {
    FeatureRecord rec;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c == id_col) continue;
      const std::string& name = table.header[c];
      const double v = parse_number(row[c], row[id_col] + "/" + name);
      if (name.rfind(kFamilyPrefix, 0) == 0) {
        rec.family[parse_family(name.substr(kFamilyPrefix.size()))] = v;
      } else {
        rec.components[name] = v;
      }
    }
    for (Family f : kFamilies) {
      if (!rec.family.count(f)) throw Error(ErrorKind::kSchema, "feature table lacks family column " + std::string(to_string(f)));
    }
    if (!out.emplace(row[id_col], std::move(rec)).second) {
      throw Error(ErrorKind::kDuplicateId, "duplicate doc_id in feature table", row[id_col]);
    }
  }
  return out;
}

}  // namespace stylespace
