#include "stylespace/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "stylespace/error.hpp"
#include "stylespace/lexicon.hpp"
#include "stylespace/rng.hpp"

namespace stylespace {
namespace {

constexpr std::array<std::size_t, 5> kRareLetters = {'k' - 'a', 'w' - 'a', 'x' - 'a', 'y' - 'a', 'z' - 'a'};

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string draw_word(Rng& rng, std::span<const double> letters, double mean_len) {
  const std::size_t len = 1 + static_cast<std::size_t>(rng.poisson(mean_len - 1.0));
  std::string w;
  w.reserve(len);
  for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng.categorical(letters)));
  return w;
}

std::vector<std::string> draw_vocabulary(Rng& rng, std::span<const double> letters, double mean_len, std::size_t size) {
  std::set<std::string> seen;
  std::vector<std::string> words;
  words.reserve(size);
  for (std::size_t v = 0; v < size; ++v) {
    std::string w;
    for (int attempt = 0; attempt < 100; ++attempt) {
      w = draw_word(rng, letters, mean_len);
      if (!seen.count(w)) break;
    }
    seen.insert(w);
    words.push_back(std::move(w));
  }
  return words;
}

/// Builds text + exact annotations from already-chosen sentences.
struct Builder {
  std::string text;
  AnnotationSet ann;

  void sentence(const std::vector<std::string>& words, const std::vector<Pos>& pos, const std::vector<bool>& entity) {
    const std::size_t first = ann.tokens.size();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!text.empty()) text += " ";
      const std::size_t b = text.size();
      text += words[i];
      ann.tokens.push_back({words[i], b, text.size()});
      ann.pos.push_back(pos[i]);
      if (entity[i]) ann.entities.push_back({{ann.tokens.size() - 1, ann.tokens.size()}, EntityKind::kPerson, false});
    }
    const std::size_t b = text.size();
    text += ".";
    ann.tokens.push_back({".", b, b + 1});
    ann.pos.push_back(Pos::kOther);
    ann.sentences.push_back({first, ann.tokens.size()});
  }
};

std::string padded(const std::string& prefix, std::size_t i) { return fmt::format("{}-{:03d}", prefix, i + 1); }

}  // namespace

std::array<double, 26> StyleKnobs::default_letter_weights() {
  return {7.6, 0.9, 3.3, 3.7, 14.7, 1.1, 0.9, 0.7, 7.5, 0.5, 0.05, 5.5, 3.0,
          7.1, 5.8, 3.0, 1.4, 6.6, 7.9, 7.2, 6.3, 1.6, 0.04, 0.4, 0.3, 0.1};
}

void StyleKnobs::validate() const {
  double total = 0.0;
  for (double w : letter_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::kInvalidArgument, "letter weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kInvalidArgument, "letter weights must not all be zero");
  if (!(mean_word_len >= 1.0)) throw Error(ErrorKind::kInvalidArgument, "mean_word_len must be >= 1");
  if (!(mean_sentence_len >= 1.0)) throw Error(ErrorKind::kInvalidArgument, "mean_sentence_len must be >= 1");
  if (vocab_size == 0) throw Error(ErrorKind::kInvalidArgument, "vocab_size must be >= 1");
  if (!(entity_rate >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "entity_rate must be >= 0");
  if (entity_rate > mean_sentence_len - 1.0) {
    throw Error(ErrorKind::kInvalidArgument,
                "contradictory knobs: entity_rate " + format_double(entity_rate) +
                    " exceeds the non-initial capacity of a sentence (" + format_double(mean_sentence_len - 1.0) + ")");
  }
  if (pos_mix.noun < 0.0 || pos_mix.verb < 0.0 || pos_mix.adj < 0.0 ||
      pos_mix.noun + pos_mix.verb + pos_mix.adj > 1.0 + 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "pos_mix components must be >= 0 and sum to <= 1");
  }
}

SyntheticDoc synthesize_document(const StyleKnobs& knobs, std::size_t tokens, std::string id, ClassLabel label,
                                 std::uint64_t seed) {
  knobs.validate();
  if (tokens == 0) throw Error(ErrorKind::kInvalidArgument, "tokens per document must be >= 1");
  Rng rng(seed);
  const auto vocab = draw_vocabulary(rng, knobs.letter_weights, knobs.mean_word_len, knobs.vocab_size);

  // POS pools sized in proportion to the mix so usage stays uniform over words.
  const std::size_t v = vocab.size();
  std::array<double, 4> share = {knobs.pos_mix.noun, knobs.pos_mix.verb, knobs.pos_mix.adj,
                                 std::max(0.0, 1.0 - knobs.pos_mix.noun - knobs.pos_mix.verb - knobs.pos_mix.adj)};
  std::array<std::size_t, 4> pool_size{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    pool_size[c] = std::min(v - assigned, static_cast<std::size_t>(std::llround(share[c] * static_cast<double>(v))));
    assigned += pool_size[c];
  }
  pool_size[3] = v - assigned;
  std::array<std::size_t, 4> pool_begin{};
  for (std::size_t c = 1; c < 4; ++c) pool_begin[c] = pool_begin[c - 1] + pool_size[c - 1];
  std::array<double, 4> weights{};
  for (std::size_t c = 0; c < 4; ++c) weights[c] = pool_size[c] ? share[c] : 0.0;
  if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) {
    for (std::size_t c = 0; c < 4; ++c) weights[c] = static_cast<double>(pool_size[c]);
  }
  constexpr std::array<Pos, 4> kPoolPos = {Pos::kNoun, Pos::kVerb, Pos::kAdj, Pos::kOther};

  Builder out;
  out.ann.doc_id = id;
  std::size_t emitted = 0;
  while (emitted < tokens) {
    std::size_t len = 1 + static_cast<std::size_t>(rng.poisson(knobs.mean_sentence_len - 1.0));
    len = std::min(len, tokens - emitted);
    std::vector<std::string> words(len);
    std::vector<Pos> pos(len);
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t c = rng.categorical(weights);
      words[i] = vocab[pool_begin[c] + rng.below(pool_size[c])];
      pos[i] = kPoolPos[c];
    }
    std::vector<bool> entity(len, false);
    const std::size_t want = std::min<std::size_t>(rng.poisson(knobs.entity_rate), len - 1);
    if (want > 0) {
      std::vector<std::size_t> slots(len - 1);
      std::iota(slots.begin(), slots.end(), 1);
      rng.shuffle(slots);
      for (std::size_t k = 0; k < want; ++k) entity[slots[k]] = true;
    }
    words[0] = capitalize(words[0]);
    for (std::size_t i = 1; i < len; ++i) {
      if (entity[i]) words[i] = capitalize(words[i]);
    }
    out.sentence(words, pos, entity);
    emitted += len;
  }
  out.ann.validate(out.text.size());
  SyntheticDoc doc;
  doc.document.id = std::move(id);
  doc.document.text = std::move(out.text);
  doc.document.label = label;
  doc.annotations = std::move(out.ann);
  return doc;
}

std::vector<SyntheticDoc> synthesize_corpus(const StyleKnobs& knobs, std::size_t n_docs, std::size_t tokens_per_doc,
                                            ClassLabel label, const std::string& id_prefix) {
  if (n_docs == 0) throw Error(ErrorKind::kInvalidArgument, "n_docs must be >= 1");
  label.validate();
  std::vector<SyntheticDoc> docs;
  docs.reserve(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    docs.push_back(synthesize_document(knobs, tokens_per_doc, padded(id_prefix, i), label, Rng::derive(knobs.seed, i)));
  }
  return docs;
}

double default_delta(Family family) {
  switch (family) {
    case Family::kStructural: return 3.0;
    case Family::kTag: return 0.3;
    case Family::kEntropy: return 2.0;
    case Family::kLetters: return 0.3;
    case Family::kNer: return 1.5;
  }
  return 0.0;
}

StyleKnobs perturb(const StyleKnobs& base, Family family, double amount) {
  StyleKnobs k = base;
  switch (family) {
    case Family::kStructural:
      k.mean_word_len += amount;
      break;
    case Family::kTag:
      // All three tagged shares move together, so every TAG component
      // carries the signal.
      k.pos_mix.noun += amount / 3.0;
      k.pos_mix.verb += amount / 3.0;
      k.pos_mix.adj += amount / 3.0;
      break;
    case Family::kEntropy:
      k.vocab_size = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(static_cast<double>(base.vocab_size) * std::exp2(amount))));
      break;
    case Family::kLetters: {
      const double s = std::clamp(amount, 0.0, 1.0);
      const double total = std::accumulate(base.letter_weights.begin(), base.letter_weights.end(), 0.0);
      for (auto& w : k.letter_weights) w = (1.0 - s) * w / total;
      for (std::size_t r : kRareLetters) k.letter_weights[r] += s / static_cast<double>(kRareLetters.size());
      break;
    }
    case Family::kNer:
      k.entity_rate += amount;
      break;
  }
  k.validate();
  return k;
}

std::vector<SyntheticDoc> PlantedFixture::all() const {
  std::vector<SyntheticDoc> out = ref;
  out.insert(out.end(), cmp.begin(), cmp.end());
  return out;
}

PlantedFixture planted_sensitivity_fixture(const StyleKnobs& base, const std::map<Family, double>& delta,
                                           const FixtureOptions& options) {
  base.validate();
  std::optional<Family> family;
  double amount = 0.0;
  for (const auto& [f, d] : delta) {
    if (d == 0.0) continue;
    if (family) throw Error(ErrorKind::kInvalidArgument, "a planted fixture perturbs exactly one family");
    family = f;
    amount = d;
  }
  if (options.n_docs < 3) throw Error(ErrorKind::kInvalidArgument, "planted fixtures need at least 3 documents per side");

  PlantedFixture fx;
  fx.expected = family;
  Rng rng(Rng::derive(options.seed, 0xf1));
  const ClassLabel ref_label{CorpusGroup::kTufferyRef, Author::kTuffery, std::nullopt};
  const ClassLabel cmp_label{CorpusGroup::kStyleGen, options.cmp_author, options.generator};
  for (std::size_t i = 0; i < options.n_docs; ++i) {
    auto doc = synthesize_document(base, options.tokens_per_doc, padded("ref", i), ref_label,
                                   Rng::derive(options.seed, 2 * i));
    fx.intensity[doc.document.id] = 0.0;
    fx.ref.push_back(std::move(doc));
  }
  for (std::size_t i = 0; i < options.n_docs; ++i) {
    const double u = rng.uniform();
    const StyleKnobs knobs = family ? perturb(base, *family, u * amount) : base;
    auto doc = synthesize_document(knobs, options.tokens_per_doc, padded("gen", i), cmp_label,
                                   Rng::derive(options.seed, 2 * i + 1));
    doc.document.source_id = fx.ref[i].document.id;
    fx.intensity[doc.document.id] = u;
    fx.cmp.push_back(std::move(doc));
  }
  return fx;
}

std::vector<EmbeddingSet> probe_embeddings(const std::vector<std::string>& doc_ids,
                                           const std::map<std::string, double>& intensity,
                                           const ProbeOptions& options) {
  if (options.dim < 2) throw Error(ErrorKind::kInvalidArgument, "probe embeddings need dim >= 2");
  std::vector<double> angle(doc_ids.size());
  std::vector<double> radius(doc_ids.size());
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    auto it = intensity.find(doc_ids[i]);
    if (it == intensity.end()) throw Error(ErrorKind::kUnknownId, "no intensity for " + doc_ids[i], doc_ids[i]);
    Rng r(Rng::derive(options.seed, i));
    angle[i] = 2.0 * std::numbers::pi * r.uniform();
    radius[i] = 1.0 + options.kappa * it->second;
  }
  std::vector<EmbeddingSet> out;
  for (std::size_t m = 0; m < options.models.size(); ++m) {
    Rng rng(Rng::derive(options.seed, 1'000'000 + m));
    // Random orthonormal 2-frame by Gram-Schmidt.
    std::vector<double> e1(options.dim);
    std::vector<double> e2(options.dim);
    for (auto& v : e1) v = rng.normal();
    for (auto& v : e2) v = rng.normal();
    auto norm = [](std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      s = std::sqrt(s);
      for (double& x : v) x /= s;
    };
    norm(e1);
    double dot = 0.0;
    for (std::size_t d = 0; d < options.dim; ++d) dot += e1[d] * e2[d];
    for (std::size_t d = 0; d < options.dim; ++d) e2[d] -= dot * e1[d];
    norm(e2);

    Matrix x(doc_ids.size(), options.dim);
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
      const double a = radius[i] * std::cos(angle[i]);
      const double b = radius[i] * std::sin(angle[i]);
      for (std::size_t d = 0; d < options.dim; ++d) x(i, d) = a * e1[d] + b * e2[d] + options.noise * rng.normal();
    }
    out.push_back(EmbeddingSet::from_matrix(options.models[m], doc_ids, x));
  }
  return out;
}

std::vector<SyntheticDoc> disjoint_alphabet_corpus(std::size_t per_class, std::size_t tokens_per_doc, std::uint64_t seed) {
  std::vector<SyntheticDoc> docs;
  for (std::size_t c = 0; c < 3; ++c) {
    StyleKnobs k;
    k.letter_weights.fill(0.0);
    for (std::size_t l = 8 * c; l < 8 * c + 8; ++l) k.letter_weights[l] = 1.0;
    k.seed = Rng::derive(seed, c);
    const Author a = kTargetAuthors[c];
    std::string prefix = "fx-" + std::string(to_string(a));
    std::transform(prefix.begin(), prefix.end(), prefix.begin(), [](unsigned char ch) { return std::tolower(ch); });
    auto part = synthesize_corpus(k, per_class, tokens_per_doc, {CorpusGroup::kStyleRef, a, std::nullopt}, prefix);
    for (auto& d : part) docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<SyntheticDoc> function_word_corpus(std::size_t per_class, std::size_t tokens_per_doc, std::uint64_t seed) {
  std::vector<std::string> fw;
  std::set<std::string> seen;
  for (auto w : lexicon::function_words()) {
    const bool plain = !w.empty() && std::all_of(w.begin(), w.end(), [](char ch) { return ch >= 'a' && ch <= 'z'; });
    if (plain && seen.insert(std::string(w)).second) fw.emplace_back(w);
    if (fw.size() == 90) break;
  }
  if (fw.size() < 30) throw Error(ErrorKind::kInsufficientData, "bundled function-word list is too short");
  const std::size_t slice = fw.size() / 3;

  Rng vocab_rng(Rng::derive(seed, 99));
  const auto letters = StyleKnobs::default_letter_weights();
  // Content words must not collide with function words.
  std::vector<std::string> content;
  while (content.size() < 400) {
    auto w = draw_word(vocab_rng, letters, 6.0);
    if (w.size() >= 4 && !seen.count(w)) {
      seen.insert(w);
      content.push_back(std::move(w));
    }
  }

  std::vector<SyntheticDoc> docs;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> weights(fw.size(), 1.0);
    for (std::size_t i = c * slice; i < (c + 1) * slice; ++i) weights[i] = 3.0;
    const Author a = kTargetAuthors[c];
    std::string prefix = "fw-" + std::string(to_string(a));
    std::transform(prefix.begin(), prefix.end(), prefix.begin(), [](unsigned char ch) { return std::tolower(ch); });
    for (std::size_t d = 0; d < per_class; ++d) {
      Rng rng(Rng::derive(seed, 1000 * (c + 1) + d));
      Builder out;
      out.ann.doc_id = padded(prefix, d);
      std::size_t emitted = 0;
      while (emitted < tokens_per_doc) {
        std::size_t len = std::min<std::size_t>(1 + rng.poisson(11.0), tokens_per_doc - emitted);
        std::vector<std::string> words(len);
        std::vector<Pos> pos(len, Pos::kOther);
        for (std::size_t i = 0; i < len; ++i) {
          if (rng.uniform() < 0.5) {
            words[i] = fw[rng.categorical(weights)];
          } else {
            words[i] = content[rng.below(content.size())];
            pos[i] = Pos::kNoun;
          }
        }
        words[0] = capitalize(words[0]);
        out.sentence(words, pos, std::vector<bool>(len, false));
        emitted += len;
      }
      out.ann.validate(out.text.size());
      SyntheticDoc doc;
      doc.document.id = out.ann.doc_id;
      doc.document.text = std::move(out.text);
      doc.document.label = {CorpusGroup::kStyleRef, a, std::nullopt};
      doc.annotations = std::move(out.ann);
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

std::filesystem::path write_synthetic(const std::filesystem::path& dir, const std::vector<SyntheticDoc>& docs) {
  CorpusManifest manifest;
  std::vector<AnnotationSet> sets;
  for (const auto& d : docs) {
    const std::string rel = "texts/" + d.document.id + ".txt";
    write_file(dir / rel, d.document.text);
    manifest.entries.push_back({d.document.id, rel, d.document.label, d.document.source_id, std::nullopt});
    sets.push_back(d.annotations);
  }
  const auto manifest_path = dir / "manifest.json";
  write_file(manifest_path, serialize_manifest(manifest));
  write_annotations(dir / "annotations.jsonl", sets);
  return manifest_path;
}

}  // namespace stylespace
