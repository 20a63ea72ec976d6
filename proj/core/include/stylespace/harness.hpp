#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylespace/annotate.hpp"
#include "stylespace/corpus.hpp"
#include "stylespace/embedspace.hpp"
#include "stylespace/stylefeatures.hpp"

namespace stylespace {

struct PosMix {
  double noun = 0.3;
  double verb = 0.2;
  double adj = 0.1;
};

/// Generative knobs for synthetic documents. The alphabet is a..z.
struct StyleKnobs {
  std::array<double, 26> letter_weights = default_letter_weights();
  double mean_word_len = 5.0;
  double mean_sentence_len = 12.0;
  std::size_t vocab_size = 200;
  double entity_rate = 0.5;  // entities per sentence
  PosMix pos_mix;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument for out-of-range or contradictory knobs.
  void validate() const;

  /// Rough French-like letter frequencies.
  static std::array<double, 26> default_letter_weights();
};

struct SyntheticDoc {
  Document document;
  AnnotationSet annotations;  // exact by construction
};

/// One document from `knobs`: a private vocabulary drawn from the letter
/// weights and split into POS pools, uniform usage within pools, word and
/// sentence lengths 1 + Poisson, and Poisson entity counts per sentence
/// planted as capitalized vocabulary words at non-initial positions.
SyntheticDoc synthesize_document(const StyleKnobs& knobs, std::size_t tokens, std::string id, ClassLabel label,
                                 std::uint64_t seed);

/// `n_docs` i.i.d. documents, ids "<prefix>-NNN" counting from 001, seeds
/// derived from knobs.seed.
std::vector<SyntheticDoc> synthesize_corpus(const StyleKnobs& knobs, std::size_t n_docs, std::size_t tokens_per_doc,
                                            ClassLabel label = {}, const std::string& id_prefix = "syn");

struct FixtureOptions {
  std::size_t n_docs = 96;
  std::size_t tokens_per_doc = 600;
  Author cmp_author = Author::kProust;
  Generator generator = Generator::kMistral;
  std::uint64_t seed = 0;
};

struct PlantedFixture {
  std::vector<SyntheticDoc> ref;  // Tuffery_ref
  std::vector<SyntheticDoc> cmp;  // Style_gen rewrites, source_id -> ref
  /// Latent intensity u in [0, 1) per document (ref then cmp order); the
  /// perturbed knob of a cmp document moves by u * delta. Ref documents have 0.
  std::map<std::string, double> intensity;
  std::optional<Family> expected;  // nullopt for a null fixture

  std::vector<SyntheticDoc> all() const;
};

/// Ref and cmp corpora identical in every knob except one family's, which
/// each cmp document shifts by its own intensity times delta. At most one
/// family may carry a nonzero delta.
///   Structural: mean_word_len += u*delta
///   TAG:        noun, verb and adj shares += u*delta/3 each, taken from the
///               unassigned share
///   Entropy:    vocab_size *= 2^(u*delta)
///   Letters:    mix u*delta of the mass into rare letters (k, w, x, y, z)
///   NER:        entity_rate += u*delta
PlantedFixture planted_sensitivity_fixture(const StyleKnobs& base, const std::map<Family, double>& delta,
                                           const FixtureOptions& options = {});

/// A per-family delta large enough for the planted signal to dominate at
/// the default fixture size.
double default_delta(Family family);

/// Knobs after shifting `family` by `amount` (the per-document shift above).
StyleKnobs perturb(const StyleKnobs& base, Family family, double amount);

struct ProbeOptions {
  std::vector<std::string> models = {"probe-a", "probe-b", "probe-c"};
  std::size_t dim = 32;
  double kappa = 3.0;   // radius = 1 + kappa * intensity
  double noise = 0.05;  // isotropic noise scale
  std::uint64_t seed = 0;
};

/// Stand-in embedder whose geometry is driven by the planted intensity:
/// each document sits on a circle of radius 1 + kappa*u inside a random
/// 2-plane of R^dim (one plane per model), plus small isotropic noise.
std::vector<EmbeddingSet> probe_embeddings(const std::vector<std::string>& doc_ids,
                                           const std::map<std::string, double>& intensity,
                                           const ProbeOptions& options = {});

/// Three Style_ref classes (Proust, Céline, Yourcenar) whose letter weights
/// have disjoint supports.
std::vector<SyntheticDoc> disjoint_alphabet_corpus(std::size_t per_class, std::size_t tokens_per_doc, std::uint64_t seed);

/// Three Style_ref classes sharing content vocabulary but each favouring a
/// different slice of the function-word list.
std::vector<SyntheticDoc> function_word_corpus(std::size_t per_class, std::size_t tokens_per_doc, std::uint64_t seed);

/// Writes texts/, manifest.json and annotations.jsonl under `dir`; returns
/// the manifest path.
std::filesystem::path write_synthetic(const std::filesystem::path& dir, const std::vector<SyntheticDoc>& docs);

}  // namespace stylespace
