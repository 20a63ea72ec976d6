#include "stylespace/annotate.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "stylespace/error.hpp"
#include "stylespace/lexicon.hpp"
#include "stylespace/utf8.hpp"

namespace stylespace {
namespace {

bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == 0x2026; }

bool is_closer(char32_t c) { return c == U')' || c == U']' || c == 0xBB || c == U'"' || c == 0x201D || c == 0x2019; }

bool is_opener(char32_t c) {
  return c == U'(' || c == U'[' || c == 0xAB || c == U'"' || c == 0x201C || c == 0x2014 || c == 0x2013 || c == U'-';
}

const std::unordered_set<std::string>& abbreviation_set() {
  static const std::unordered_set<std::string> set = [] {
    std::unordered_set<std::string> s;
    for (auto a : lexicon::abbreviations()) s.emplace(a);
    return s;
  }();
  return set;
}

std::u32string decode_or_throw(std::string_view text) {
  auto decoded = utf8::decode(text);
  if (!decoded) throw Error(ErrorKind::kDecode, "text is not valid UTF-8");
  return std::move(*decoded);
}

}  // namespace

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return "NOUN";
    case Pos::kVerb: return "VERB";
    case Pos::kAdj: return "ADJ";
    case Pos::kOther: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::kPerson: return "PERSON";
    case EntityKind::kLocation: return "LOCATION";
    case EntityKind::kOrganization: return "ORGANIZATION";
    case EntityKind::kOther: return "OTHER";
  }
  return "OTHER";
}

Pos parse_pos(std::string_view text) {
  if (text == "NOUN") return Pos::kNoun;
  if (text == "VERB") return Pos::kVerb;
  if (text == "ADJ") return Pos::kAdj;
  if (text == "OTHER") return Pos::kOther;
  throw Error(ErrorKind::kSchema, "unknown POS tag '" + std::string(text) + "'", std::string(text));
}

EntityKind parse_entity_kind(std::string_view text) {
  if (text == "PERSON") return EntityKind::kPerson;
  if (text == "LOCATION") return EntityKind::kLocation;
  if (text == "ORGANIZATION") return EntityKind::kOrganization;
  if (text == "OTHER") return EntityKind::kOther;
  throw Error(ErrorKind::kSchema, "unknown entity kind '" + std::string(text) + "'", std::string(text));
}

bool Token::is_word() const {
  auto decoded = utf8::decode(surface);
  if (!decoded || decoded->empty()) return false;
  const char32_t c = decoded->front();
  return utf8::is_letter(c) || utf8::is_digit(c);
}

std::size_t AnnotationSet::word_count() const {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_word(); }));
}

void AnnotationSet::validate(std::size_t text_length) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.begin >= t.end) throw Error(ErrorKind::kSchema, "token " + std::to_string(i) + " has an empty span", doc_id);
    if (t.begin < prev_end) throw Error(ErrorKind::kSchema, "token " + std::to_string(i) + " overlaps or precedes the previous token", doc_id);
    if (t.end > text_length) throw Error(ErrorKind::kOutOfBounds, "token " + std::to_string(i) + " ends past the text", doc_id);
    prev_end = t.end;
  }
  if (sentences.empty()) throw Error(ErrorKind::kSchema, "at least one sentence is required", doc_id);
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& r = sentences[s];
    if (r.begin != cursor || r.end < r.begin || (r.begin == r.end && !tokens.empty())) {
      throw Error(ErrorKind::kSchema, "sentence " + std::to_string(s) + " breaks the token partition", doc_id);
    }
    cursor = r.end;
  }
  if (cursor != tokens.size()) throw Error(ErrorKind::kSchema, "sentences do not cover every token", doc_id);
  if (pos.size() != tokens.size()) throw Error(ErrorKind::kSchema, "pos length differs from token count", doc_id);
  std::size_t entity_end = 0;
  for (std::size_t k = 0; k < entities.size(); ++k) {
    auto& e = entities[k];
    if (e.tokens.begin >= e.tokens.end || e.tokens.end > tokens.size()) {
      throw Error(ErrorKind::kOutOfBounds, "entity " + std::to_string(k) + " has an invalid token range", doc_id);
    }
    if (e.tokens.begin < entity_end) {
      throw Error(ErrorKind::kSchema, "entity " + std::to_string(k) + " overlaps or precedes the previous entity", doc_id);
    }
    entity_end = e.tokens.end;
    auto inside = std::find_if(sentences.begin(), sentences.end(), [&](const TokenRange& r) {
      return r.begin <= e.tokens.begin && e.tokens.end <= r.end;
    });
    e.cross_sentence = inside == sentences.end();
  }
}

Segmentation segment(std::string_view text) {
  const std::u32string cps = decode_or_throw(text);
  Segmentation out;
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    const char32_t c = cps[i];
    if (utf8::is_space(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (utf8::is_letter(c) || utf8::is_digit(c)) {
      while (i < n && (utf8::is_letter(cps[i]) || utf8::is_digit(cps[i]))) {
        ++i;
        if (i + 1 < n && utf8::is_apostrophe(cps[i]) && utf8::is_letter(cps[i - 1]) && utf8::is_letter(cps[i + 1])) {
          ++i;  // clitic: apostrophe stays with the left part
          break;
        }
      }
    } else {
      ++i;
    }
    out.tokens.push_back(Token{utf8::encode(std::u32string_view(cps).substr(start, i - start)), start, i});
  }

  const auto& abbrevs = abbreviation_set();
  const auto& toks = out.tokens;
  const std::size_t count = toks.size();
  auto first_cp = [&](std::size_t k) { return cps[toks[k].begin]; };
  auto single_cp = [&](std::size_t k) { return toks[k].end - toks[k].begin == 1; };

  std::size_t sentence_start = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (!single_cp(k) || !is_terminal(first_cp(k))) continue;
    if (first_cp(k) == U'.' && k > 0 && toks[k - 1].end == toks[k].begin && toks[k - 1].is_word()) {
      const std::u32string_view prev = std::u32string_view(cps).substr(toks[k - 1].begin, toks[k - 1].end - toks[k - 1].begin);
      if (abbrevs.count(toks[k - 1].surface) || (prev.size() == 1 && utf8::is_upper(prev[0]))) continue;
    }
    std::size_t last = k;
    while (last + 1 < count && single_cp(last + 1) && (is_terminal(first_cp(last + 1)) || is_closer(first_cp(last + 1)))) ++last;
    bool boundary = false;
    if (last + 1 == count) {
      boundary = true;
    } else if (toks[last + 1].begin > toks[last].end) {
      std::size_t next = last + 1;
      while (next < count && single_cp(next) && is_opener(first_cp(next))) ++next;
      boundary = next < count && utf8::is_upper(first_cp(next));
    }
    if (boundary) {
      out.sentences.push_back({sentence_start, last + 1});
      sentence_start = last + 1;
    }
    k = last;
  }
  if (sentence_start < count || out.sentences.empty()) out.sentences.push_back({sentence_start, count});
  return out;
}

Lexicons Lexicons::builtin() {
  Lexicons lex;
  for (const auto& e : lexicon::pos_entries()) lex.pos.emplace(std::string(e.surface), parse_pos(e.tag));
  return lex;
}

Lexicons Lexicons::load(const std::filesystem::path& pos_path, const std::filesystem::path& gazetteer_path,
                        bool capitalization_heuristic) {
  Lexicons lex = pos_path.empty() ? builtin() : Lexicons{};
  lex.capitalization_heuristic = capitalization_heuristic;
  auto for_each_pair = [](const std::filesystem::path& path, auto&& fn) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kMissingFile, "cannot open lexicon " + path.string(), path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw Error(ErrorKind::kSchema, path.string() + ":" + std::to_string(line_no) + ": expected 'surface<TAB>tag'",
                    std::to_string(line_no));
      }
      fn(line.substr(0, tab), line.substr(tab + 1));
    }
  };
  if (!pos_path.empty()) {
    for_each_pair(pos_path, [&](const std::string& surface, const std::string& tag) {
      lex.pos[lexicon::normalize_word(surface)] = parse_pos(tag);
    });
  }
  if (!gazetteer_path.empty()) {
    for_each_pair(gazetteer_path, [&](const std::string& surface, const std::string& kind) {
      GazetteerEntry entry;
      entry.kind = parse_entity_kind(kind);
      for (const auto& tok : segment(surface).tokens) entry.tokens.push_back(tok.surface);
      if (!entry.tokens.empty()) lex.gazetteer.push_back(std::move(entry));
    });
  }
  return lex;
}

AnnotationSet builtin_annotate(std::string doc_id, const Segmentation& segmentation, const Lexicons& lexicons) {
  AnnotationSet set;
  set.doc_id = std::move(doc_id);
  set.tokens = segmentation.tokens;
  set.sentences = segmentation.sentences;
  if (set.sentences.empty()) set.sentences.push_back({0, set.tokens.size()});
  const std::size_t n = set.tokens.size();

  set.pos.assign(n, Pos::kOther);
  for (std::size_t i = 0; i < n; ++i) {
    if (!set.tokens[i].is_word()) continue;
    auto it = lexicons.pos.find(lexicon::normalize_word(set.tokens[i].surface));
    if (it != lexicons.pos.end()) set.pos[i] = it->second;
  }

  std::vector<bool> taken(n, false);
  std::vector<std::size_t> sentence_of(n, 0);
  std::vector<bool> sentence_initial(n, false);
  for (std::size_t s = 0; s < set.sentences.size(); ++s) {
    bool first_word = true;
    for (std::size_t i = set.sentences[s].begin; i < set.sentences[s].end; ++i) {
      sentence_of[i] = s;
      if (first_word && set.tokens[i].is_word()) {
        sentence_initial[i] = true;
        first_word = false;
      }
    }
  }

  std::vector<const GazetteerEntry*> by_length;
  for (const auto& g : lexicons.gazetteer) by_length.push_back(&g);
  std::stable_sort(by_length.begin(), by_length.end(),
                   [](const GazetteerEntry* a, const GazetteerEntry* b) { return a->tokens.size() > b->tokens.size(); });
  for (std::size_t i = 0; i < n; ++i) {
    if (taken[i]) continue;
    for (const auto* g : by_length) {
      const std::size_t len = g->tokens.size();
      if (i + len > n) continue;
      bool match = true;
      for (std::size_t k = 0; k < len && match; ++k) match = !taken[i + k] && set.tokens[i + k].surface == g->tokens[k];
      if (!match) continue;
      set.entities.push_back(Entity{{i, i + len}, g->kind, false});
      for (std::size_t k = 0; k < len; ++k) taken[i + k] = true;
      break;
    }
  }

  if (lexicons.capitalization_heuristic) {
    auto candidate = [&](std::size_t i) {
      if (taken[i] || sentence_initial[i] || !set.tokens[i].is_word()) return false;
      auto cps = utf8::decode(set.tokens[i].surface);
      return cps && utf8::is_upper(cps->front());
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!candidate(i)) continue;
      std::size_t j = i + 1;
      while (j < n && sentence_of[j] == sentence_of[i] && candidate(j)) ++j;
      set.entities.push_back(Entity{{i, j}, EntityKind::kPerson, false});
      for (std::size_t k = i; k < j; ++k) taken[k] = true;
      i = j - 1;
    }
  }
  std::sort(set.entities.begin(), set.entities.end(),
            [](const Entity& a, const Entity& b) { return a.tokens.begin < b.tokens.begin; });
  for (auto& e : set.entities) e.cross_sentence = sentence_of[e.tokens.begin] != sentence_of[e.tokens.end - 1];
  return set;
}

Json annotation_to_json(const AnnotationSet& set) {
  Json tokens = Json::array();
  for (const auto& t : set.tokens) tokens.push_back({{"s", t.surface}, {"b", t.begin}, {"e", t.end}});
  Json sentences = Json::array();
  for (const auto& s : set.sentences) sentences.push_back({s.begin, s.end});
  Json pos = Json::array();
  for (auto p : set.pos) pos.push_back(to_string(p));
  Json entities = Json::array();
  for (const auto& e : set.entities) entities.push_back({{"b", e.tokens.begin}, {"e", e.tokens.end}, {"kind", to_string(e.kind)}});
  return Json{{"doc_id", set.doc_id}, {"tokens", tokens}, {"sentences", sentences}, {"pos", pos}, {"entities", entities}};
}

AnnotationSet annotation_from_json(const Json& j) {
  auto need = [&](const char* field, Json::value_t type) -> const Json& {
    auto it = j.find(field);
    if (it == j.end() || it->type() != type) throw Error(ErrorKind::kSchema, std::string("missing or mistyped field '") + field + "'");
    return *it;
  };
  AnnotationSet set;
  if (!j.is_object()) throw Error(ErrorKind::kSchema, "annotation must be a JSON object");
  set.doc_id = need("doc_id", Json::value_t::string).get<std::string>();
  for (const auto& t : need("tokens", Json::value_t::array)) {
    if (!t.is_object() || !t.contains("s") || !t.contains("b") || !t.contains("e") || !t["s"].is_string() ||
        !t["b"].is_number_unsigned() || !t["e"].is_number_unsigned()) {
      throw Error(ErrorKind::kSchema, "token needs string 's' and unsigned 'b', 'e'");
    }
    set.tokens.push_back(Token{t["s"].get<std::string>(), t["b"].get<std::size_t>(), t["e"].get<std::size_t>()});
  }
  for (const auto& s : need("sentences", Json::value_t::array)) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_unsigned() || !s[1].is_number_unsigned()) {
      throw Error(ErrorKind::kSchema, "sentence must be a [begin, end] pair");
    }
    set.sentences.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
  }
  for (const auto& p : need("pos", Json::value_t::array)) {
    if (!p.is_string()) throw Error(ErrorKind::kSchema, "pos entries must be strings");
    set.pos.push_back(parse_pos(p.get<std::string>()));
  }
  for (const auto& e : need("entities", Json::value_t::array)) {
    if (!e.is_object() || !e.contains("b") || !e.contains("e") || !e.contains("kind") || !e["b"].is_number_unsigned() ||
        !e["e"].is_number_unsigned() || !e["kind"].is_string()) {
      throw Error(ErrorKind::kSchema, "entity needs unsigned 'b', 'e' and string 'kind'");
    }
    set.entities.push_back(Entity{{e["b"].get<std::size_t>(), e["e"].get<std::size_t>()},
                                  parse_entity_kind(e["kind"].get<std::string>()), false});
  }
  return set;
}

std::map<std::string, AnnotationSet> parse_annotations(std::string_view jsonl, const TextLengths& known) {
  std::map<std::string, AnnotationSet> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      AnnotationSet set = annotation_from_json(Json::parse(line));
      auto it = known.find(set.doc_id);
      if (it == known.end()) {
        throw Error(ErrorKind::kUnknownId, where + ": doc_id '" + set.doc_id + "' is not in the corpus", set.doc_id);
      }
      set.validate(it->second);
      if (out.count(set.doc_id)) throw Error(ErrorKind::kDuplicateId, where + ": duplicate doc_id '" + set.doc_id + "'", set.doc_id);
      std::string id = set.doc_id;
      out.emplace(std::move(id), std::move(set));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kSchema, where + ": " + e.what(), where);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kUnknownId || e.kind() == ErrorKind::kDuplicateId) throw;
      throw Error(e.kind(), where + ": " + e.what(), where);
    }
  }
  return out;
}

std::map<std::string, AnnotationSet> load_annotations(const std::filesystem::path& path, const TextLengths& known) {
  return parse_annotations(read_file(path), known);
}

std::string annotations_to_jsonl(const std::vector<AnnotationSet>& sets) {
  std::string out;
  for (const auto& s : sets) out += annotation_to_json(s).dump() + "\n";
  return out;
}

void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationSet>& sets) {
  write_file(path, annotations_to_jsonl(sets));
}

std::size_t text_length(std::string_view utf8_text) {
  auto decoded = utf8::decode(utf8_text);
  if (!decoded) throw Error(ErrorKind::kDecode, "text is not valid UTF-8");
  return decoded->size();
}

}  // namespace stylespace
