#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylespace/io.hpp"

namespace stylespace {

enum class Pos { kNoun, kVerb, kAdj, kOther };
enum class EntityKind { kPerson, kLocation, kOrganization, kOther };

std::string_view to_string(Pos pos);
std::string_view to_string(EntityKind kind);
Pos parse_pos(std::string_view text);
EntityKind parse_entity_kind(std::string_view text);

/// Token with a half-open span in Unicode scalar-value offsets.
struct Token {
  std::string surface;
  std::size_t begin = 0;
  std::size_t end = 0;

  /// Word tokens start with a letter or digit; everything else is punctuation.
  bool is_word() const;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Half-open range of token indices.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

struct Entity {
  TokenRange tokens;
  EntityKind kind = EntityKind::kOther;
  bool cross_sentence = false;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Segmentation {
  std::vector<Token> tokens;
  std::vector<TokenRange> sentences;
};

struct AnnotationSet {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<TokenRange> sentences;
  std::vector<Pos> pos;
  std::vector<Entity> entities;  // sorted, non-overlapping

  std::size_t word_count() const;

  /// Checks span ordering and bounds, the sentence partition, POS alignment
  /// and entity ranges. `text_length` is in scalar values. Throws kSchema or
  /// kOutOfBounds. Recomputes each entity's cross_sentence flag.
  void validate(std::size_t text_length);

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

/// Rule-based tokenizer and sentence splitter.
///
/// Words are maximal runs of letters and digits; an apostrophe between two
/// letters closes the left token and stays attached to it ("l'" + "autobus").
/// Every other non-space scalar value is its own punctuation token. A
/// sentence ends after a run of '.', '!', '?' or '…' that is followed by
/// whitespace and an uppercase letter (opening quotes skipped) or by the end
/// of the text, unless the '.' closes a known abbreviation or a single-letter
/// initial. Text without tokens yields one empty sentence.
Segmentation segment(std::string_view text);

struct GazetteerEntry {
  std::vector<std::string> tokens;  // exact surfaces
  EntityKind kind = EntityKind::kOther;
};

struct Lexicons {
  std::unordered_map<std::string, Pos> pos;  // keyed by normalized (lowercased) surface
  std::vector<GazetteerEntry> gazetteer;
  bool capitalization_heuristic = true;

  /// Bundled POS lexicon, empty gazetteer, heuristic on.
  static Lexicons builtin();

  /// POS lexicon: "surface<TAB>TAG" per line. Gazetteer: "surface<TAB>KIND",
  /// where the surface may span several space-separated tokens. Either path
  /// may be empty to keep the bundled/empty default.
  static Lexicons load(const std::filesystem::path& pos_path, const std::filesystem::path& gazetteer_path,
                       bool capitalization_heuristic = true);
};

/// Lexicon POS lookup (else OTHER), gazetteer matches (longest first), then
/// runs of capitalized words that are not sentence-initial become PERSON.
AnnotationSet builtin_annotate(std::string doc_id, const Segmentation& segmentation, const Lexicons& lexicons);

Json annotation_to_json(const AnnotationSet& set);
AnnotationSet annotation_from_json(const Json& json);

/// Text length (scalar values) per known document id.
using TextLengths = std::unordered_map<std::string, std::size_t>;

/// Parses annotation JSONL. Every set is validated against its document's
/// length; unknown ids, malformed lines and bad spans report the 1-based line.
std::map<std::string, AnnotationSet> load_annotations(const std::filesystem::path& path, const TextLengths& known);
std::map<std::string, AnnotationSet> parse_annotations(std::string_view jsonl, const TextLengths& known);

void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationSet>& sets);
std::string annotations_to_jsonl(const std::vector<AnnotationSet>& sets);

std::size_t text_length(std::string_view utf8_text);

}  // namespace stylespace
