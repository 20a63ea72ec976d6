#include "stylespace/lexicon.hpp"

#include <array>
#include <fstream>

#include "stylespace/error.hpp"
#include "stylespace/utf8.hpp"

namespace stylespace::lexicon {
namespace {

// clang-format off
constexpr std::string_view kFunctionWords[] = {
  // articles and determiners
  "le", "la", "les", "l'", "un", "une", "des", "du", "de", "d'", "au", "aux",
  "ce", "cet", "cette", "ces", "mon", "ton", "son", "ma", "ta", "sa", "mes", "tes", "ses",
  "notre", "votre", "leur", "nos", "vos", "leurs", "quel", "quelle", "quels", "quelles",
  "chaque", "plusieurs", "quelque", "quelques", "aucun", "aucune", "nul", "nulle",
  "tout", "toute", "tous", "toutes", "certain", "certaine", "certains", "certaines",
  "même", "mêmes", "autre", "autres", "tel", "telle", "tels", "telles",
  // prepositions
  "à", "après", "avant", "avec", "chez", "contre", "dans", "depuis", "derrière", "dès",
  "devant", "durant", "en", "entre", "envers", "hormis", "hors", "jusque", "jusqu'",
  "malgré", "outre", "par", "parmi", "pendant", "pour", "sans", "sauf", "selon", "sous",
  "suivant", "sur", "vers", "via", "voici", "voilà", "près", "loin", "autour", "auprès",
  "dessous", "dessus", "travers", "lors", "face", "grâce",
  // personal, reflexive and adverbial pronouns
  "je", "j'", "tu", "il", "elle", "on", "nous", "vous", "ils", "elles", "me", "m'",
  "te", "t'", "se", "s'", "lui", "eux", "moi", "toi", "soi", "y", "en",
  // demonstrative, possessive, relative and interrogative pronouns
  "ceci", "cela", "ça", "celui", "celle", "ceux", "celles", "c'", "ç'",
  "mien", "mienne", "miens", "miennes", "tien", "tienne", "siens", "sien", "sienne", "siennes",
  "nôtre", "vôtre", "nôtres", "vôtres",
  "qui", "que", "qu'", "quoi", "dont", "où", "lequel", "laquelle", "lesquels", "lesquelles",
  "auquel", "auxquels", "auxquelles", "duquel", "desquels", "desquelles",
  "rien", "personne", "chacun", "chacune", "quiconque",
  // conjunctions
  "et", "ou", "mais", "donc", "or", "ni", "car", "comme", "quand", "lorsque", "lorsqu'",
  "puisque", "puisqu'", "quoique", "quoiqu'", "si", "s'il", "sinon", "tandis", "afin",
  "parce", "pourtant", "cependant", "néanmoins", "toutefois", "ainsi", "alors", "puis",
  "ensuite", "enfin", "soit", "bien", "dès", "tant", "aussitôt",
  // negation and frequent adverbs
  "ne", "n'", "pas", "plus", "jamais", "point", "guère", "non", "oui", "aussi", "très",
  "trop", "peu", "moins", "assez", "encore", "déjà", "toujours", "souvent", "parfois",
  "ici", "là", "ailleurs", "partout", "maintenant", "aujourd'", "hier", "demain",
  "beaucoup", "autant", "tellement", "presque", "surtout", "seulement", "même", "combien",
  "comment", "pourquoi", "quelquefois", "tard", "tôt",
  // être
  "être", "suis", "es", "est", "sommes", "êtes", "sont", "étais", "était", "étions",
  "étiez", "étaient", "fus", "fut", "fûmes", "furent", "serai", "sera", "serons",
  "serez", "seront", "serais", "serait", "serions", "seraient", "sois", "soit",
  "soyons", "soyez", "soient", "fût", "été", "étant",
  // avoir
  "avoir", "ai", "as", "a", "avons", "avez", "ont", "avais", "avait", "avions",
  "aviez", "avaient", "eus", "eut", "eûmes", "eurent", "aurai", "aura", "aurons",
  "aurez", "auront", "aurais", "aurait", "aurions", "auraient", "aie", "aies", "ait",
  "ayons", "ayez", "aient", "eût", "eu", "ayant",
  // common modal forms
  "faut", "fallait", "peut", "peuvent", "pouvait", "pouvaient", "doit", "doivent", "devait",
  "veut", "voulait",
};

constexpr PosEntry kPosEntries[] = {
  // nouns
  {"homme", "NOUN"}, {"hommes", "NOUN"}, {"femme", "NOUN"}, {"femmes", "NOUN"},
  {"enfant", "NOUN"}, {"enfants", "NOUN"}, {"mère", "NOUN"}, {"père", "NOUN"},
  {"jour", "NOUN"}, {"jours", "NOUN"}, {"nuit", "NOUN"}, {"nuits", "NOUN"},
  {"temps", "NOUN"}, {"vie", "NOUN"}, {"mort", "NOUN"}, {"monde", "NOUN"},
  {"main", "NOUN"}, {"mains", "NOUN"}, {"yeux", "NOUN"}, {"œil", "NOUN"},
  {"tête", "NOUN"}, {"visage", "NOUN"}, {"corps", "NOUN"}, {"cœur", "NOUN"},
  {"voix", "NOUN"}, {"mot", "NOUN"}, {"mots", "NOUN"}, {"nom", "NOUN"},
  {"maison", "NOUN"}, {"chambre", "NOUN"}, {"porte", "NOUN"}, {"fenêtre", "NOUN"},
  {"rue", "NOUN"}, {"ville", "NOUN"}, {"pays", "NOUN"}, {"terre", "NOUN"},
  {"mer", "NOUN"}, {"ciel", "NOUN"}, {"soleil", "NOUN"}, {"pluie", "NOUN"},
  {"eau", "NOUN"}, {"feu", "NOUN"}, {"air", "NOUN"}, {"vent", "NOUN"},
  {"bus", "NOUN"}, {"autobus", "NOUN"}, {"voiture", "NOUN"}, {"train", "NOUN"},
  {"gare", "NOUN"}, {"route", "NOUN"}, {"chemin", "NOUN"}, {"place", "NOUN"},
  {"matin", "NOUN"}, {"soir", "NOUN"}, {"heure", "NOUN"}, {"heures", "NOUN"},
  {"année", "NOUN"}, {"années", "NOUN"}, {"fois", "NOUN"}, {"moment", "NOUN"},
  {"chose", "NOUN"}, {"choses", "NOUN"}, {"idée", "NOUN"}, {"pensée", "NOUN"},
  {"amour", "NOUN"}, {"souvenir", "NOUN"}, {"souvenirs", "NOUN"}, {"mémoire", "NOUN"},
  {"livre", "NOUN"}, {"lettre", "NOUN"}, {"histoire", "NOUN"}, {"roman", "NOUN"},
  {"guerre", "NOUN"}, {"paix", "NOUN"}, {"empereur", "NOUN"}, {"roi", "NOUN"},
  {"ami", "NOUN"}, {"amis", "NOUN"}, {"gens", "NOUN"}, {"peuple", "NOUN"},
  {"table", "NOUN"}, {"lit", "NOUN"}, {"pain", "NOUN"}, {"vin", "NOUN"},
  {"argent", "NOUN"}, {"travail", "NOUN"}, {"médecin", "NOUN"}, {"docteur", "NOUN"},
  {"passager", "NOUN"}, {"passagers", "NOUN"}, {"chapeau", "NOUN"}, {"cou", "NOUN"},
  {"bouton", "NOUN"}, {"manteau", "NOUN"}, {"ton", "NOUN"}, {"sommeil", "NOUN"},
  {"âme", "NOUN"}, {"esprit", "NOUN"}, {"regard", "NOUN"}, {"silence", "NOUN"},
  {"bruit", "NOUN"}, {"lumière", "NOUN"}, {"ombre", "NOUN"}, {"jardin", "NOUN"},
  {"arbre", "NOUN"}, {"arbres", "NOUN"}, {"fleur", "NOUN"}, {"fleurs", "NOUN"},
  // verbs
  {"marche", "VERB"}, {"marchait", "VERB"}, {"part", "VERB"}, {"partit", "VERB"},
  {"pleut", "VERB"}, {"pleuvait", "VERB"}, {"écrit", "VERB"}, {"écrivait", "VERB"},
  {"dit", "VERB"}, {"disait", "VERB"}, {"fait", "VERB"}, {"faisait", "VERB"},
  {"va", "VERB"}, {"allait", "VERB"}, {"vient", "VERB"}, {"venait", "VERB"},
  {"voit", "VERB"}, {"voyait", "VERB"}, {"vit", "VERB"}, {"vivait", "VERB"},
  {"prend", "VERB"}, {"prenait", "VERB"}, {"met", "VERB"}, {"mettait", "VERB"},
  {"sait", "VERB"}, {"savait", "VERB"}, {"croit", "VERB"}, {"croyait", "VERB"},
  {"pense", "VERB"}, {"pensait", "VERB"}, {"aime", "VERB"}, {"aimait", "VERB"},
  {"regarde", "VERB"}, {"regardait", "VERB"}, {"parle", "VERB"}, {"parlait", "VERB"},
  {"entend", "VERB"}, {"entendait", "VERB"}, {"sent", "VERB"}, {"sentait", "VERB"},
  {"tient", "VERB"}, {"tenait", "VERB"}, {"reste", "VERB"}, {"restait", "VERB"},
  {"semble", "VERB"}, {"semblait", "VERB"}, {"devient", "VERB"}, {"devenait", "VERB"},
  {"monte", "VERB"}, {"monta", "VERB"}, {"descend", "VERB"}, {"descendit", "VERB"},
  {"attend", "VERB"}, {"attendait", "VERB"}, {"répond", "VERB"}, {"répondit", "VERB"},
  {"demande", "VERB"}, {"demanda", "VERB"}, {"trouve", "VERB"}, {"trouva", "VERB"},
  {"laisse", "VERB"}, {"laissa", "VERB"}, {"passe", "VERB"}, {"passa", "VERB"},
  {"meurt", "VERB"}, {"mourut", "VERB"}, {"naît", "VERB"}, {"naquit", "VERB"},
  {"dormir", "VERB"}, {"dormait", "VERB"}, {"écrire", "VERB"}, {"lire", "VERB"},
  {"voir", "VERB"}, {"dire", "VERB"}, {"faire", "VERB"}, {"aller", "VERB"},
  {"venir", "VERB"}, {"prendre", "VERB"}, {"partir", "VERB"}, {"vivre", "VERB"},
  {"mourir", "VERB"}, {"aimer", "VERB"}, {"parler", "VERB"}, {"penser", "VERB"},
  {"bouscule", "VERB"}, {"bousculé", "VERB"}, {"proteste", "VERB"}, {"protesta", "VERB"},
  {"assied", "VERB"}, {"assit", "VERB"}, {"rencontre", "VERB"}, {"rencontra", "VERB"},
  // adjectives
  {"rouge", "ADJ"}, {"bleu", "ADJ"}, {"blanc", "ADJ"}, {"blanche", "ADJ"},
  {"noir", "ADJ"}, {"noire", "ADJ"}, {"vert", "ADJ"}, {"gris", "ADJ"},
  {"grand", "ADJ"}, {"grande", "ADJ"}, {"petit", "ADJ"}, {"petite", "ADJ"},
  {"long", "ADJ"}, {"longue", "ADJ"}, {"court", "ADJ"}, {"courte", "ADJ"},
  {"jeune", "ADJ"}, {"vieux", "ADJ"}, {"vieille", "ADJ"}, {"nouveau", "ADJ"},
  {"nouvelle", "ADJ"}, {"beau", "ADJ"}, {"belle", "ADJ"}, {"bon", "ADJ"},
  {"bonne", "ADJ"}, {"mauvais", "ADJ"}, {"heureux", "ADJ"}, {"heureuse", "ADJ"},
  {"triste", "ADJ"}, {"doux", "ADJ"}, {"douce", "ADJ"}, {"froid", "ADJ"},
  {"chaud", "ADJ"}, {"lent", "ADJ"}, {"rapide", "ADJ"}, {"plein", "ADJ"},
  {"vide", "ADJ"}, {"seul", "ADJ"}, {"seule", "ADJ"}, {"dernier", "ADJ"},
  {"dernière", "ADJ"}, {"premier", "ADJ"}, {"première", "ADJ"}, {"haut", "ADJ"},
  {"bas", "ADJ"}, {"profond", "ADJ"}, {"obscur", "ADJ"}, {"clair", "ADJ"},
  {"ancien", "ADJ"}, {"ancienne", "ADJ"}, {"étrange", "ADJ"}, {"immense", "ADJ"},
  {"lourd", "ADJ"}, {"léger", "ADJ"}, {"faible", "ADJ"}, {"fort", "ADJ"},
  {"pauvre", "ADJ"}, {"riche", "ADJ"}, {"malade", "ADJ"}, {"mort", "ADJ"},
  {"tressé", "ADJ"}, {"libre", "ADJ"}, {"humain", "ADJ"}, {"divin", "ADJ"},
};

constexpr std::string_view kAbbreviations[] = {
  "M", "MM", "Mme", "Mmes", "Mlle", "Mlles", "Dr", "Pr", "Me", "Mgr", "St", "Ste",
  "cf", "ex", "p", "pp", "vol", "chap", "av", "env", "boul", "bd", "n°", "No",
};
// clang-format on

}  // namespace

std::span<const std::string_view> function_words() { return kFunctionWords; }
std::span<const PosEntry> pos_entries() { return kPosEntries; }
std::span<const std::string_view> abbreviations() { return kAbbreviations; }

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "cannot open word list " + path, path);
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto end = line.find_last_not_of(" \t");
    words.push_back(normalize_word(line.substr(start, end - start + 1)));
  }
  return words;
}

std::string normalize_word(std::string_view word) {
  auto decoded = utf8::decode(word);
  if (!decoded) return std::string(word);
  for (auto& c : *decoded) {
    c = utf8::to_lower(c);
    if (c == 0x2019) c = U'\'';
  }
  return utf8::encode(*decoded);
}

}  // namespace stylespace::lexicon
