#include "stylespace/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

#include "stylespace/error.hpp"
#include "stylespace/rng.hpp"
#include "stylespace/utf8.hpp"

namespace stylespace {
namespace {

std::string upper(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    out += text[i];
  }
  return out;
}

std::string required_string(const Json& obj, const char* field, std::size_t index) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::kSchema,
                "manifest entry " + std::to_string(index) + ": missing string field '" + field + "'",
                std::to_string(index));
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, const char* field, std::size_t index) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorKind::kSchema,
                "manifest entry " + std::to_string(index) + ": field '" + field + "' must be a string or null",
                std::to_string(index));
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(CorpusGroup group) {
  switch (group) {
    case CorpusGroup::kTufferyRef: return "TUFFERY_REF";
    case CorpusGroup::kStyleRef: return "STYLE_REF";
    case CorpusGroup::kStyleGen: return "STYLE_GEN";
  }
  return "?";
}

std::string_view to_string(Author author) {
  switch (author) {
    case Author::kTuffery: return "TUFFERY";
    case Author::kProust: return "PROUST";
    case Author::kCeline: return "CELINE";
    case Author::kYourcenar: return "YOURCENAR";
  }
  return "?";
}

std::string_view to_string(Generator generator) {
  switch (generator) {
    case Generator::kGpt: return "GPT";
    case Generator::kMistral: return "MISTRAL";
    case Generator::kGemini: return "GEMINI";
  }
  return "?";
}

std::string_view display_name(Author author) {
  switch (author) {
    case Author::kTuffery: return "Tufféry";
    case Author::kProust: return "Proust";
    case Author::kCeline: return "Céline";
    case Author::kYourcenar: return "Yourcenar";
  }
  return "?";
}

CorpusGroup parse_group(std::string_view text) {
  const std::string u = upper(text);
  if (u == "TUFFERY_REF") return CorpusGroup::kTufferyRef;
  if (u == "STYLE_REF") return CorpusGroup::kStyleRef;
  if (u == "STYLE_GEN") return CorpusGroup::kStyleGen;
  throw Error(ErrorKind::kSchema, "unknown corpus group '" + std::string(text) + "'", std::string(text));
}

Author parse_author(std::string_view text) {
  const std::string u = upper(text);
  if (u == "TUFFERY") return Author::kTuffery;
  if (u == "PROUST") return Author::kProust;
  if (u == "CELINE") return Author::kCeline;
  if (u == "YOURCENAR") return Author::kYourcenar;
  throw Error(ErrorKind::kSchema, "unknown author '" + std::string(text) + "'", std::string(text));
}

Generator parse_generator(std::string_view text) {
  const std::string u = upper(text);
  if (u == "GPT") return Generator::kGpt;
  if (u == "MISTRAL") return Generator::kMistral;
  if (u == "GEMINI") return Generator::kGemini;
  throw Error(ErrorKind::kSchema, "unknown generator '" + std::string(text) + "'", std::string(text));
}

void ClassLabel::validate() const {
  if (generator.has_value() != (group == CorpusGroup::kStyleGen)) {
    throw Error(ErrorKind::kInvalidArgument, "generator must be set exactly for STYLE_GEN labels", key());
  }
  if (group == CorpusGroup::kTufferyRef && author != Author::kTuffery) {
    throw Error(ErrorKind::kInvalidArgument, "TUFFERY_REF documents must have author TUFFERY", key());
  }
  if (group != CorpusGroup::kTufferyRef && author == Author::kTuffery) {
    throw Error(ErrorKind::kInvalidArgument, "author TUFFERY only appears in TUFFERY_REF", key());
  }
}

std::string ClassLabel::key() const {
  std::string out = std::string(to_string(group)) + "/" + std::string(to_string(author));
  if (generator) out += "/" + std::string(to_string(*generator));
  return out;
}

std::string class_name(const ClassLabel& label, bool with_generator) {
  std::string base;
  switch (label.author) {
    case Author::kTuffery: base = "Tuffery"; break;
    case Author::kProust: base = "Proust"; break;
    case Author::kCeline: base = "Celine"; break;
    case Author::kYourcenar: base = "Yourcenar"; break;
  }
  base += label.group == CorpusGroup::kStyleGen ? "_gen" : "_ref";
  if (with_generator && label.generator) base += "[" + std::string(to_string(*label.generator)) + "]";
  return base;
}

CorpusManifest parse_manifest(const Json& json) {
  if (!json.is_object() || !json.contains("entries") || !json["entries"].is_array()) {
    throw Error(ErrorKind::kSchema, "manifest must be an object with an 'entries' array");
  }
  CorpusManifest manifest;
  std::size_t index = 0;
  for (const auto& e : json["entries"]) {
    if (!e.is_object()) throw Error(ErrorKind::kSchema, "manifest entry must be an object", std::to_string(index));
    ManifestEntry entry;
    entry.id = required_string(e, "id", index);
    entry.path = required_string(e, "path", index);
    entry.label.group = parse_group(required_string(e, "group", index));
    entry.label.author = parse_author(required_string(e, "author", index));
    if (auto g = optional_string(e, "generator", index)) entry.label.generator = parse_generator(*g);
    entry.source_id = optional_string(e, "source_id", index);
    if (auto it = e.find("provenance"); it != e.end() && !it->is_null()) {
      entry.provenance = OrderedJson::parse(it->dump());
    }
    try {
      entry.label.validate();
    } catch (const Error& err) {
      throw Error(ErrorKind::kSchema, entry.id + ": " + err.what(), entry.id);
    }
    if (entry.source_id && entry.label.group != CorpusGroup::kStyleGen) {
      throw Error(ErrorKind::kSchema, entry.id + ": source_id is only allowed on STYLE_GEN entries", entry.id);
    }
    manifest.entries.push_back(std::move(entry));
    ++index;
  }
  if (auto it = json.find("counts"); it != json.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorKind::kSchema, "'counts' must be an object");
    for (auto c = it->begin(); c != it->end(); ++c) {
      if (!c.value().is_number_unsigned()) throw Error(ErrorKind::kSchema, "count for " + c.key() + " must be a non-negative integer", c.key());
      manifest.declared_counts[c.key()] = c.value().get<std::size_t>();
    }
  }
  if (auto it = json.find("exclusions"); it != json.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorKind::kSchema, "'exclusions' must be an array");
    for (const auto& x : *it) {
      if (!x.is_object() || !x.contains("id") || !x["id"].is_string()) {
        throw Error(ErrorKind::kSchema, "exclusion needs a string 'id'");
      }
      manifest.exclusions.push_back({x["id"].get<std::string>(), x.value("reason", std::string{})});
    }
  }
  return manifest;
}

CorpusManifest load_manifest(const std::filesystem::path& path) { return parse_manifest(read_json(path)); }

OrderedJson manifest_to_json(const CorpusManifest& manifest) {
  OrderedJson out = OrderedJson::object();
  OrderedJson entries = OrderedJson::array();
  for (const auto& e : manifest.entries) {
    OrderedJson j = OrderedJson::object();
    j["id"] = e.id;
    j["path"] = e.path;
    j["group"] = to_string(e.label.group);
    j["author"] = to_string(e.label.author);
    j["generator"] = e.label.generator ? OrderedJson(to_string(*e.label.generator)) : OrderedJson(nullptr);
    j["source_id"] = e.source_id ? OrderedJson(*e.source_id) : OrderedJson(nullptr);
    if (e.provenance) j["provenance"] = *e.provenance;
    entries.push_back(std::move(j));
  }
  out["entries"] = std::move(entries);
  if (!manifest.declared_counts.empty()) {
    OrderedJson counts = OrderedJson::object();
    for (const auto& [key, n] : manifest.declared_counts) counts[key] = n;
    out["counts"] = std::move(counts);
  }
  if (!manifest.exclusions.empty()) {
    OrderedJson ex = OrderedJson::array();
    for (const auto& x : manifest.exclusions) ex.push_back({{"id", x.id}, {"reason", x.reason}});
    out["exclusions"] = std::move(ex);
  }
  return out;
}

std::string serialize_manifest(const CorpusManifest& manifest) { return manifest_to_json(manifest).dump(2) + "\n"; }

std::vector<Document> load_corpus(const std::filesystem::path& root, const CorpusManifest& manifest) {
  std::unordered_set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.id).second) throw Error(ErrorKind::kDuplicateId, "duplicate document id '" + e.id + "'", e.id);
  }

  std::vector<std::string> missing;
  for (const auto& e : manifest.entries) {
    if (!std::filesystem::is_regular_file(root / e.path)) missing.push_back(e.id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorKind::kCountMismatch,
                "manifest declares " + std::to_string(manifest.entries.size()) + " documents but only " +
                    std::to_string(manifest.entries.size() - missing.size()) + " files exist; missing: " + list,
                missing.front());
  }

  std::map<std::string, std::size_t> actual;
  for (const auto& e : manifest.entries) ++actual[e.label.key()];
  for (const auto& [key, declared] : manifest.declared_counts) {
    const std::size_t found = actual.count(key) ? actual.at(key) : 0;
    if (found != declared) {
      throw Error(ErrorKind::kCountMismatch,
                  "class " + key + " declares " + std::to_string(declared) + " documents, manifest lists " +
                      std::to_string(found),
                  key);
    }
  }
  if (!manifest.declared_counts.empty()) {
    for (const auto& [key, found] : actual) {
      if (!manifest.declared_counts.count(key)) {
        throw Error(ErrorKind::kCountMismatch, "class " + key + " has " + std::to_string(found) + " entries but no declared count", key);
      }
    }
  }

  std::vector<Document> docs;
  docs.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    const std::string raw = read_file(root / e.path);
    const auto decoded = utf8::decode(raw);
    if (!decoded) throw Error(ErrorKind::kDecode, e.id + ": file is not valid UTF-8", e.id);
    if (utf8::trim(*decoded).empty()) throw Error(ErrorKind::kDecode, e.id + ": document is empty", e.id);
    docs.push_back(Document{e.id, normalize_newlines(raw), e.label, e.source_id});
  }
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& manifest_path) {
  return load_corpus(manifest_path.parent_path(), load_manifest(manifest_path));
}

std::string corpus_fingerprint(const std::vector<Document>& docs) {
  std::uint64_t h = fnv1a64("");
  for (const auto& d : docs) {
    h = fnv1a64(d.id, h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(d.label.key(), h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    h = fnv1a64(d.text, h);
    h = fnv1a64(std::string_view("\x1e", 1), h);
  }
  return hex64(h);
}

Split stratified_split(const std::vector<Document>& docs, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "train_fraction must lie strictly between 0 and 1");
  }
  std::map<std::string, std::vector<std::size_t>> by_author;  // keyed by author name
  for (std::size_t i = 0; i < docs.size(); ++i) by_author[std::string(to_string(docs[i].label.author))].push_back(i);
  for (const auto& [author, idx] : by_author) {
    if (idx.size() < 2) {
      throw Error(ErrorKind::kInsufficientData, "author " + author + " has fewer than 2 documents", author);
    }
  }

  std::map<std::string, std::size_t> train_count;
  std::size_t assigned = 0;
  for (const auto& [author, idx] : by_author) {
    const auto n = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(idx.size())));
    train_count[author] = n;
    assigned += n;
  }
  const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(docs.size())));
  for (const auto& [author, idx] : by_author) {
    if (assigned >= target) break;
    const double exact = train_fraction * static_cast<double>(idx.size());
    if (exact > static_cast<double>(train_count[author])) {
      ++train_count[author];
      ++assigned;
    }
  }

  Rng rng(seed);
  std::vector<bool> in_train(docs.size(), false);
  for (auto& [author, idx] : by_author) {
    rng.shuffle(idx);
    for (std::size_t k = 0; k < train_count[author]; ++k) in_train[idx[k]] = true;
  }
  Split split;
  for (std::size_t i = 0; i < docs.size(); ++i) (in_train[i] ? split.train : split.validation).push_back(docs[i]);
  return split;
}

std::vector<Document> select_group(const std::vector<Document>& docs, CorpusGroup group) {
  std::vector<Document> out;
  for (const auto& d : docs) {
    if (d.label.group == group) out.push_back(d);
  }
  return out;
}

}  // namespace stylespace
