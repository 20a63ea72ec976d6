#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylespace::lexicon {

/// Version tag of the bundled word lists; stamped into fitted models.
inline constexpr std::string_view kVersion = "fr-2026.1";

/// Bundled French function words (articles, prepositions, pronouns,
/// conjunctions, auxiliary forms, clitics), lowercased, apostrophes as '\''.
std::span<const std::string_view> function_words();

/// Bundled surface→tag pairs for the naive POS tagger. Tags are
/// "NOUN", "VERB" or "ADJ".
struct PosEntry {
  std::string_view surface;
  std::string_view tag;
};
std::span<const PosEntry> pos_entries();

/// Tokens that, followed by '.', do not end a sentence ("M", "Mme", "Dr", ...).
std::span<const std::string_view> abbreviations();

/// Reads a one-word-per-line list; blank lines and '#' comments skipped.
std::vector<std::string> read_word_list(const std::string& path);

/// Lowercases and maps typographic apostrophes to '\''.
std::string normalize_word(std::string_view word);

}  // namespace stylespace::lexicon
