#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylespace/io.hpp"

namespace stylespace {

enum class CorpusGroup { kTufferyRef, kStyleRef, kStyleGen };
enum class Author { kTuffery, kProust, kCeline, kYourcenar };
enum class Generator { kGpt, kMistral, kGemini };

std::string_view to_string(CorpusGroup group);
std::string_view to_string(Author author);
std::string_view to_string(Generator generator);
CorpusGroup parse_group(std::string_view text);
Author parse_author(std::string_view text);
Generator parse_generator(std::string_view text);

/// Human-readable author name used in prompts and reports ("Céline").
std::string_view display_name(Author author);

/// The three imitated authors in validator class order.
inline constexpr Author kTargetAuthors[] = {Author::kProust, Author::kCeline, Author::kYourcenar};
inline constexpr Generator kGenerators[] = {Generator::kGpt, Generator::kMistral, Generator::kGemini};

struct ClassLabel {
  CorpusGroup group = CorpusGroup::kTufferyRef;
  Author author = Author::kTuffery;
  std::optional<Generator> generator;

  /// Throws kInvalidArgument if the label violates the group/author/generator rules.
  void validate() const;

  /// Stable key, e.g. "STYLE_GEN/PROUST/MISTRAL".
  std::string key() const;

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

/// "Tuffery_ref", "Proust_ref", "Proust_gen"; with `with_generator`,
/// generated classes become "Proust_gen[MISTRAL]".
std::string class_name(const ClassLabel& label, bool with_generator = false);

struct Document {
  std::string id;
  std::string text;  // UTF-8, LF line endings
  ClassLabel label;
  std::optional<std::string> source_id;
};

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the corpus root
  ClassLabel label;
  std::optional<std::string> source_id;
  /// Free-form provenance stamped by the rewrite stage (model id, prompt hash, sampling).
  std::optional<OrderedJson> provenance;
};

struct Exclusion {
  std::string id;
  std::string reason;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  /// Declared document count per ClassLabel::key(). Empty means "not declared".
  std::map<std::string, std::size_t> declared_counts;
  /// Source texts deliberately left out, recorded for provenance only.
  std::vector<Exclusion> exclusions;
};

CorpusManifest parse_manifest(const Json& json);
CorpusManifest load_manifest(const std::filesystem::path& path);
OrderedJson manifest_to_json(const CorpusManifest& manifest);
std::string serialize_manifest(const CorpusManifest& manifest);

/// Reads every manifest entry under `root`. Documents come back in manifest
/// order with CRLF normalized to LF. Errors carry the offending id as subject.
std::vector<Document> load_corpus(const std::filesystem::path& root, const CorpusManifest& manifest);

/// Loads the manifest at `manifest_path` and resolves entries against its directory.
std::vector<Document> load_corpus(const std::filesystem::path& manifest_path);

/// Content fingerprint over ids, labels and texts in order.
std::string corpus_fingerprint(const std::vector<Document>& docs);

struct Split {
  std::vector<Document> train;
  std::vector<Document> validation;
};

/// Author-stratified split. Per author, floor(fraction * n) documents go to
/// train; the remaining shortfall against round(fraction * N) is handed out
/// one document at a time in author-name order. Membership within an author
/// is a seeded shuffle; both outputs keep input order.
Split stratified_split(const std::vector<Document>& docs, double train_fraction, std::uint64_t seed);

std::vector<Document> select_group(const std::vector<Document>& docs, CorpusGroup group);

}  // namespace stylespace
