#include "cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "stylespace/annotate.hpp"
#include "stylespace/corpus.hpp"
#include "stylespace/csv.hpp"
#include "stylespace/embedspace.hpp"
#include "stylespace/error.hpp"
#include "stylespace/genclient.hpp"
#include "stylespace/harness.hpp"
#include "stylespace/io.hpp"
#include "stylespace/log.hpp"
#include "stylespace/sensitivity.hpp"
#include "stylespace/stylefeatures.hpp"
#include "stylespace/svg.hpp"
#include "stylespace/umap.hpp"
#include "stylespace/validator.hpp"

namespace stylespace::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string corpus;
  std::string annotations;
  std::string features;
  std::string embeddings;
  std::string reductions;
  std::string out = "out";
  std::string endpoint;
  std::string sensitivity;
  std::string template_file;
  std::string pos_lexicon;
  std::string gazetteer;
  std::vector<std::string> evals;

  std::uint64_t seed = 0;
  std::uint64_t split_seed = 42;
  double train_fraction = 0.8;
  double svm_c = 1.0;
  std::string mode = "char-ngram";
  bool no_capitalization = false;

  std::string labels = "group";
  std::size_t k = 3;
  std::string dims = "2,3,10";
  std::size_t umap_seeds = 30;
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  std::size_t umap_epochs = 200;
  std::size_t threads = 0;

  std::string space = "fulld,2d";
  std::string pairing = "cross";
  std::string aggregation = "normalized-mean";
  std::size_t bonferroni_m = 15;
  double alpha = 0.01;
  bool component_audit = false;

  std::size_t workers = 4;
  std::size_t limit = 0;

  std::string fixture = "planted";
  std::string family = "Letters";
  std::string delta = "auto";
  std::size_t n_docs = 96;
  std::size_t tokens = 600;
  std::size_t probe_dim = 32;

  std::string log_level = "warn";
};

// Flags that never change results stay out of the recorded config, so
// reruns into another directory or with another thread count fingerprint
// identically.
const std::set<std::string> kUnrecorded = {"help", "out", "threads", "workers", "log-level"};

struct Context {
  const Options& opt;
  fs::path out;
  OrderedJson config;
  std::string fingerprint;
  std::vector<std::string> outputs;

  void json(const std::string& name, const OrderedJson& body) {
    OrderedJson doc;
    doc["config_fingerprint"] = fingerprint;
    doc["config"] = config;
    for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
    write_json(out / name, doc);
    outputs.push_back(name);
  }

  void csv(const std::string& name, CsvTable table) {
    table.comments.insert(table.comments.begin(), "config_fingerprint: " + fingerprint);
    write_csv(out / name, table);
    outputs.push_back(name);
  }

  void text(const std::string& name, const std::string& contents) {
    write_file(out / name, contents);
    outputs.push_back(name);
  }
};

OrderedJson effective_config(const CLI::App& sub) {
  std::map<std::string, std::string> values;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (kUnrecorded.count(name)) continue;
    std::string value;
    if (opt->get_type_size() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
    } else {
      value = opt->get_default_str();
    }
    values[name] = value;
  }
  OrderedJson config;
  config["subcommand"] = sub.get_name();
  for (const auto& [k, v] : values) config[k] = v;
  return config;
}

[[noreturn]] void usage(const std::string& message) { throw Error(ErrorKind::kUsage, message); }

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) usage(flag + " is required");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> dims;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      usage("--dims: not an integer: " + item);
    }
    if (used != item.size() || v < 1 || v > static_cast<long long>(kMaxUmapDim)) {
      usage(fmt::format("--dims: {} is not in 1..{}", item, kMaxUmapDim));
    }
    dims.push_back(static_cast<std::size_t>(v));
  }
  if (dims.empty()) usage("--dims is empty");
  return dims;
}

UmapParams umap_params(const Options& o) {
  UmapParams p;
  p.n_neighbors = o.n_neighbors;
  p.min_dist = o.min_dist;
  p.n_epochs = o.umap_epochs;
  p.validate();
  return p;
}

std::vector<Document> corpus(const Options& o) {
  require(o.corpus, "--corpus");
  auto docs = load_corpus(o.corpus);
  log::info("corpus_loaded", {{"documents", docs.size()}});
  return docs;
}

std::vector<std::string> ids_of(const std::vector<Document>& docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& d : docs) ids.push_back(d.id);
  return ids;
}

std::vector<std::size_t> labels_of(const std::vector<Document>& docs, const std::string& scheme) {
  std::vector<std::string> names;
  for (const auto& d : docs) {
    names.push_back(scheme == "class" ? class_name(d.label, false) : std::string(to_string(d.label.group)));
  }
  return encode_labels(names);
}

std::vector<EmbeddingSet> embeddings(const Options& o, const std::vector<std::string>& ids) {
  require(o.embeddings, "--embeddings");
  std::vector<EmbeddingSet> sets;
  for (const auto& entry : load_embedding_manifest(o.embeddings)) {
    sets.push_back(load_embeddings(entry, ids));
    log::info("embeddings_loaded", {{"model", entry.model}, {"dim", entry.dim}});
  }
  if (sets.empty()) throw Error(ErrorKind::kSchema, "embedding manifest lists no models", o.embeddings);
  return sets;
}

std::vector<StyleFeatureVector> compute_all_features(const Options& o, const std::vector<Document>& docs) {
  TextLengths lengths;
  for (const auto& d : docs) lengths[d.id] = text_length(d.text);
  const auto annotations = load_annotations(o.annotations, lengths);
  std::vector<StyleFeatureVector> features;
  features.reserve(docs.size());
  for (const auto& d : docs) {
    const auto it = annotations.find(d.id);
    if (it == annotations.end()) throw Error(ErrorKind::kUnknownId, "no annotations for document " + d.id, d.id);
    features.push_back(compute_features(d.text, it->second));
  }
  return features;
}

std::map<std::string, FeatureRecord> feature_records(const Options& o, const std::vector<Document>& docs) {
  if (!o.features.empty()) return read_feature_table(read_csv(o.features));
  if (o.annotations.empty()) usage("--features or --annotations is required");
  auto features = compute_all_features(o, docs);
  const auto stats = attach_family_scalars(features);
  return read_feature_table(feature_table(features, stats));
}

// --- subcommands -----------------------------------------------------------

void cmd_ingest(Context& ctx) {
  const auto manifest = load_manifest(ctx.opt.corpus);
  const auto docs = load_corpus(fs::path(ctx.opt.corpus).parent_path(), manifest);
  std::map<std::string, std::size_t> classes;
  CsvTable table;
  table.header = {"id", "class", "source_id", "characters"};
  OrderedJson listed = OrderedJson::array();
  for (const auto& d : docs) {
    ++classes[d.label.key()];
    const auto chars = text_length(d.text);
    table.rows.push_back({d.id, d.label.key(), d.source_id.value_or(""), std::to_string(chars)});
    listed.push_back({{"id", d.id},
                      {"class", d.label.key()},
                      {"source_id", d.source_id ? OrderedJson(*d.source_id) : OrderedJson(nullptr)},
                      {"characters", chars}});
  }
  OrderedJson exclusions = OrderedJson::array();
  for (const auto& e : manifest.exclusions) exclusions.push_back({{"id", e.id}, {"reason", e.reason}});
  OrderedJson counts = OrderedJson::object();
  for (const auto& [k, n] : classes) counts[k] = n;
  ctx.json("ingest.json", {{"corpus_fingerprint", corpus_fingerprint(docs)},
                           {"documents", docs.size()},
                           {"classes", counts},
                           {"exclusions", exclusions},
                           {"entries", listed}});
  ctx.csv("documents.csv", table);
}

void cmd_annotate(Context& ctx) {
  const auto docs = corpus(ctx.opt);
  const auto lex = Lexicons::load(ctx.opt.pos_lexicon, ctx.opt.gazetteer, !ctx.opt.no_capitalization);
  std::vector<AnnotationSet> sets;
  sets.reserve(docs.size());
  std::size_t tokens = 0, words = 0, sentences = 0, entities = 0;
  for (const auto& d : docs) {
    auto set = builtin_annotate(d.id, segment(d.text), lex);
    tokens += set.tokens.size();
    words += set.word_count();
    sentences += set.sentences.size();
    entities += set.entities.size();
    sets.push_back(std::move(set));
  }
  const auto jsonl = annotations_to_jsonl(sets);
  ctx.text("annotations.jsonl", jsonl);
  ctx.json("annotate.json", {{"documents", sets.size()},
                             {"tokens", tokens},
                             {"words", words},
                             {"sentences", sentences},
                             {"entities", entities},
                             {"annotations_fingerprint", hex64(fnv1a64(jsonl))}});
}

void cmd_features(Context& ctx) {
  const auto docs = corpus(ctx.opt);
  require(ctx.opt.annotations, "--annotations");
  auto features = compute_all_features(ctx.opt, docs);
  const auto stats = attach_family_scalars(features);
  ctx.csv("features.csv", feature_table(features, stats));
  OrderedJson population = OrderedJson::array();
  for (std::size_t i = 0; i < stats.components().size(); ++i) {
    const auto& c = stats.components()[i];
    population.push_back({{"component", c.name},
                          {"family", to_string(c.family)},
                          {"mean", stats.mean()[i]},
                          {"stddev", stats.stddev()[i]}});
  }
  ctx.json("features.json", {{"documents", features.size()}, {"population", population}});
}

void cmd_validate(Context& ctx) {
  const auto& o = ctx.opt;
  const auto docs = corpus(o);
  const auto mode = parse_vectorizer_mode(o.mode);
  TransferOptions options;
  options.train_fraction = o.train_fraction;
  options.split_seed = o.split_seed;
  options.hyper.c = o.svm_c;
  options.hyper.seed = o.seed;
  const auto result =
      transfer_protocol(select_group(docs, CorpusGroup::kStyleRef), select_group(docs, CorpusGroup::kStyleGen), mode,
                        options);
  const std::string tag{to_string(mode)};

  std::vector<EvalReport> reports{result.validation};
  OrderedJson body;
  body["mode"] = tag;
  body["validation"] = result.validation.to_json();
  if (result.transfer) {
    reports.push_back(*result.transfer);
    body["transfer"] = result.transfer->to_json();
  } else {
    body["transfer"] = nullptr;
  }
  body["transfer_by_generator"] = OrderedJson::array();
  for (const auto& r : result.transfer_by_generator) {
    reports.push_back(r);
    body["transfer_by_generator"].push_back(r.to_json());
  }
  ctx.json("eval_" + tag + ".json", body);
  ctx.csv("eval_" + tag + ".csv", eval_table(reports));
  ctx.json("validator_" + tag + ".json", {{"validator", validator_to_json(result.vectorizer, result.model)}});
}

void cmd_cluster(Context& ctx) {
  const auto& o = ctx.opt;
  const auto docs = corpus(o);
  const auto ids = ids_of(docs);
  const auto labels = labels_of(docs, o.labels);
  const auto sets = embeddings(o, ids);

  CsvTable purity_table;
  purity_table.header = {"model", "dim", "purity"};
  CsvTable assign;
  assign.header = {"doc_id"};
  assign.rows.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) assign.rows[i].push_back(ids[i]);

  OrderedJson models = OrderedJson::array();
  double total = 0.0;
  for (const auto& set : sets) {
    const auto c = kmeans(set.to_matrix(), o.k, o.seed);
    const double p = purity(c.assignments, labels);
    total += p;
    purity_table.rows.push_back({set.model_name, std::to_string(set.dim), format_double(p)});
    assign.header.push_back(set.model_name);
    for (std::size_t i = 0; i < ids.size(); ++i) assign.rows[i].push_back(std::to_string(c.assignments[i]));
    models.push_back({{"model", set.model_name},
                      {"dim", set.dim},
                      {"purity", p},
                      {"inertia", c.inertia},
                      {"restart_inertia", c.restart_inertia}});
  }
  ctx.json("clusters.json", {{"labels", o.labels},
                             {"k", o.k},
                             {"models", models},
                             {"mean_purity", total / static_cast<double>(sets.size())}});
  ctx.csv("purity.csv", purity_table);
  ctx.csv("assignments.csv", assign);
}

void cmd_reduce(Context& ctx) {
  const auto& o = ctx.opt;
  const auto docs = corpus(o);
  const auto sets = embeddings(o, ids_of(docs));
  const auto dims = parse_dims(o.dims);
  const auto params = umap_params(o);
  std::vector<ReducedEmbedding> all;
  for (const auto& set : sets) {
    auto r = reduce_all(set, dims, o.umap_seeds, params, o.threads);
    log::info("reduced", {{"model", set.model_name}, {"projections", r.size()}});
    std::move(r.begin(), r.end(), std::back_inserter(all));
  }
  write_reductions(ctx.out / "reductions", all, params);
  ctx.outputs.push_back("reductions/reductions.json");
  ctx.json("reduce.json", {{"projections", all.size()}, {"manifest", "reductions/reductions.json"}});
}

void cmd_fidelity(Context& ctx) {
  const auto& o = ctx.opt;
  const auto docs = corpus(o);
  const auto sets = embeddings(o, ids_of(docs));
  FidelityOptions options;
  options.dims = parse_dims(o.dims);
  options.seeds = o.umap_seeds;
  options.k = o.k;
  options.umap = umap_params(o);
  options.threads = o.threads;
  std::vector<ReducedEmbedding> precomputed;
  if (!o.reductions.empty()) precomputed = read_reductions(o.reductions);
  const auto report = reduction_fidelity(sets, labels_of(docs, o.labels), options, precomputed);
  ctx.json("fidelity.json", {{"umap", options.umap.to_json()}, {"fidelity", report.to_json()}});
  ctx.csv("fidelity.csv", report.to_csv());
}

void cmd_sensitivity(Context& ctx) {
  const auto& o = ctx.opt;
  const auto docs = corpus(o);
  const auto ids = ids_of(docs);
  const auto sets = embeddings(o, ids);
  const auto params = umap_params(o);

  SensitivityDataset data;
  for (const auto& d : docs) data.documents.push_back({d.id, d.label, d.source_id});
  data.features = feature_records(o, docs);

  std::vector<ReducedEmbedding> stored;
  if (!o.reductions.empty()) stored = read_reductions(o.reductions);

  const auto names = split_list(o.space);
  if (names.empty()) usage("--space is empty");
  for (const auto& name : names) {
    SpaceData space{name, {}};
    if (name == "fulld") {
      for (const auto& set : sets) space.models.push_back({set.model_name, {set.to_matrix()}});
    } else {
      if (name.size() < 2 || name.back() != 'd') usage("--space: expected fulld or <N>d, got " + name);
      const auto dim = parse_dims(name.substr(0, name.size() - 1)).front();
      for (const auto& set : sets) {
        ModelSpace model{set.model_name, {}};
        for (const auto& r : stored) {
          if (r.model_name != set.model_name || r.target_dim != dim) continue;
          if (r.doc_ids != ids) {
            throw Error(ErrorKind::kUnknownId, "stored reduction rows do not match the corpus", r.model_name);
          }
          model.iterations.push_back(r.points);
        }
        if (model.iterations.empty()) {
          for (auto& r : reduce_all(set, {dim}, o.umap_seeds, params, o.threads)) {
            model.iterations.push_back(std::move(r.points));
          }
        }
        space.models.push_back(std::move(model));
      }
    }
    data.spaces.push_back(std::move(space));
  }

  SensitivityConfig config;
  config.pairing = parse_pairing(o.pairing);
  config.aggregation = parse_aggregation(o.aggregation);
  config.bonferroni_m = o.bonferroni_m;
  config.alpha = o.alpha;
  config.component_audit = o.component_audit;
  const auto report = sensitivity_report(data, config);
  ctx.json("sensitivity.json", {{"umap", params.to_json()}, {"sensitivity", report.to_json()}});
  ctx.csv("sensitivity.csv", report.to_csv());
}

void cmd_rewrite(Context& ctx) {
  const auto& o = ctx.opt;
  require(o.endpoint, "--endpoint");
  const auto docs = corpus(o);
  auto endpoint = EndpointConfig::from_json(read_json(o.endpoint));
  endpoint.validate();
  const std::string prompt = o.template_file.empty() ? std::string(kDefaultPromptTemplate) : read_file(o.template_file);
  auto jobs = make_rewrite_jobs(select_group(docs, CorpusGroup::kTufferyRef), prompt);
  if (o.limit > 0 && jobs.size() > o.limit) jobs.resize(o.limit);

  GenClient client(endpoint);
  const auto results = run_rewrite_jobs(client, jobs, o.workers);
  CorpusManifest manifest;
  for (const auto& r : results) {
    const std::string rel = "texts/" + r.document.id + ".txt";
    write_file(ctx.out / rel, r.document.text);
    manifest.entries.push_back({r.document.id, rel, r.document.label, r.document.source_id, r.provenance});
  }
  ctx.text("manifest.json", serialize_manifest(manifest));
  ctx.json("rewrite.json", {{"endpoint", endpoint.to_json()}, {"jobs", jobs.size()}, {"manifest", "manifest.json"}});
}

struct ChartRow {
  std::string comparison;
  std::string slice;
  std::string family;
  std::optional<double> r;
  bool significant = false;
};

std::vector<std::string> render_sensitivity(Context& ctx, const fs::path& path) {
  const auto table = read_csv(path);
  const auto c_cmp = table.column("comparison"), c_slice = table.column("slice"), c_family = table.column("family"),
             c_space = table.column("space"), c_r = table.column("r"), c_sig = table.column("significant");
  std::vector<std::string> spaces;
  std::map<std::string, std::vector<ChartRow>> by_space;
  for (const auto& row : table.rows) {
    if (std::find(spaces.begin(), spaces.end(), row[c_space]) == spaces.end()) spaces.push_back(row[c_space]);
    ChartRow r{row[c_cmp], row[c_slice], row[c_family], std::nullopt, row[c_sig] == "true"};
    if (!row[c_r].empty()) r.r = std::stod(row[c_r]);
    by_space[row[c_space]].push_back(std::move(r));
  }
  std::vector<std::string> files;
  for (const auto& space : spaces) {
    for (const bool pooled : {true, false}) {
      std::vector<std::string> families;
      std::vector<svg::BarGroup> groups;
      for (const auto& r : by_space[space]) {
        if ((r.slice == "pooled") != pooled) continue;
        if (std::find(families.begin(), families.end(), r.family) == families.end()) families.push_back(r.family);
      }
      if (families.empty()) continue;
      for (const auto& r : by_space[space]) {
        if ((r.slice == "pooled") != pooled) continue;
        const std::string label = pooled ? r.comparison : r.comparison + " " + r.slice;
        auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& x) { return x.label == label; });
        if (g == groups.end()) {
          groups.push_back({label, std::vector<std::optional<double>>(families.size()),
                            std::vector<bool>(families.size(), false)});
          g = std::prev(groups.end());
        }
        const auto f = static_cast<std::size_t>(
            std::find(families.begin(), families.end(), r.family) - families.begin());
        g->values[f] = r.r;
        g->marked[f] = r.significant;
      }
      const std::string name = fmt::format("figures/sensitivity_{}{}.svg", space, pooled ? "" : "_by_generator");
      ctx.text(name, svg::bar_chart(fmt::format("Dispersion shift vs. feature shift ({}{})", space,
                                                pooled ? "" : ", by generator"),
                                    families, groups, "Pearson r"));
      files.push_back(name);
    }
  }
  return files;
}

void render_eval(Context& ctx, const fs::path& path) {
  const Json j = read_json(path);
  const std::string stem = path.stem().string();
  auto one = [&](const Json& report, const std::string& suffix) {
    if (report.is_null()) return;
    const auto classes = report.at("classes").get<std::vector<std::string>>();
    const auto confusion = report.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    const std::string title = report.contains("slice") && report["slice"].is_string()
                                  ? report["slice"].get<std::string>()
                                  : suffix;
    ctx.text(fmt::format("figures/{}_{}.svg", stem, suffix),
             svg::heatmap(fmt::format("Confusion ({}, {})", stem, title), classes, classes, confusion));
  };
  if (j.contains("validation")) one(j["validation"], "validation");
  if (j.contains("transfer")) one(j["transfer"], "transfer");
  if (j.contains("transfer_by_generator")) {
    for (const auto& r : j["transfer_by_generator"]) {
      one(r, r.contains("slice") && r["slice"].is_string() ? r["slice"].get<std::string>() : "slice");
    }
  }
}

void render_scatter(Context& ctx) {
  const auto& o = ctx.opt;
  const auto docs = corpus(o);
  std::map<std::string, std::string> class_of;
  for (const auto& d : docs) class_of[d.id] = class_name(d.label, false);
  for (const auto& r : read_reductions(o.reductions)) {
    if (r.target_dim != 2 || r.seed != o.seed) continue;
    std::vector<std::string> classes;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < r.doc_ids.size(); ++i) {
      const auto it = class_of.find(r.doc_ids[i]);
      if (it == class_of.end()) throw Error(ErrorKind::kUnknownId, "reduction row not in corpus", r.doc_ids[i]);
      classes.push_back(it->second);
      members[it->second].push_back(i);
    }
    std::map<std::string, Ellipse> ellipses;
    for (const auto& [cls, rows] : members) {
      if (rows.size() < 3) continue;
      Matrix pts(rows.size(), 2);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        pts(i, 0) = r.points(rows[i], 0);
        pts(i, 1) = r.points(rows[i], 1);
      }
      ellipses[cls] = coverage_ellipse(pts, 0.8);
    }
    ctx.text(fmt::format("figures/umap_{}.svg", r.model_name),
             svg::scatter(fmt::format("{} (2D, seed {})", r.model_name, r.seed), r.points, classes, ellipses));
  }
}

void cmd_report(Context& ctx) {
  const auto& o = ctx.opt;
  if (o.sensitivity.empty() && o.evals.empty() && o.reductions.empty()) {
    usage("report needs at least one of --sensitivity, --eval, --reductions");
  }
  fs::create_directories(ctx.out / "figures");
  if (!o.sensitivity.empty()) render_sensitivity(ctx, o.sensitivity);
  for (const auto& e : o.evals) render_eval(ctx, e);
  if (!o.reductions.empty()) render_scatter(ctx);
  OrderedJson figures = OrderedJson::array();
  for (const auto& f : ctx.outputs) figures.push_back(f);
  ctx.json("report.json", {{"figures", figures}});
}

void cmd_synth(Context& ctx) {
  const auto& o = ctx.opt;
  std::vector<SyntheticDoc> docs;
  OrderedJson truth;
  truth["fixture"] = o.fixture;
  if (o.fixture == "planted") {
    StyleKnobs base;
    base.seed = o.seed;
    std::map<Family, double> delta;
    std::optional<Family> family;
    if (o.family != "none") {
      family = parse_family(o.family);
      delta[*family] = o.delta == "auto" ? default_delta(*family) : std::stod(o.delta);
    }
    FixtureOptions fo;
    fo.n_docs = o.n_docs;
    fo.tokens_per_doc = o.tokens;
    fo.seed = o.seed;
    const auto fx = planted_sensitivity_fixture(base, delta, fo);
    docs = fx.all();

    std::vector<std::string> ids;
    for (const auto& d : docs) ids.push_back(d.document.id);
    ProbeOptions po;
    po.dim = o.probe_dim;
    po.seed = o.seed;
    std::vector<EmbeddingManifestEntry> entries;
    fs::create_directories(ctx.out / "embeddings");
    for (const auto& set : probe_embeddings(ids, fx.intensity, po)) {
      const auto header = ctx.out / "embeddings" / (set.model_name + ".json");
      write_embedding_binary(set, header, ctx.out / "embeddings" / (set.model_name + ".f32"));
      entries.push_back({set.model_name, set.dim, "f32", header});
    }
    write_embedding_manifest(ctx.out / "embeddings" / "manifest.json", entries);
    ctx.outputs.push_back("embeddings/manifest.json");
    truth["expected_family"] = fx.expected ? OrderedJson(std::string(to_string(*fx.expected))) : OrderedJson(nullptr);
    truth["delta"] = delta.empty() ? 0.0 : delta.begin()->second;
    OrderedJson intensity = OrderedJson::object();
    for (const auto& [id, u] : fx.intensity) intensity[id] = u;
    truth["intensity"] = intensity;
  } else if (o.fixture == "disjoint") {
    docs = disjoint_alphabet_corpus(o.n_docs, o.tokens, o.seed);
  } else {
    docs = function_word_corpus(o.n_docs, o.tokens, o.seed);
  }
  write_synthetic(ctx.out, docs);
  ctx.outputs.push_back("manifest.json");
  ctx.outputs.push_back("annotations.jsonl");
  truth["documents"] = docs.size();
  ctx.json("synth.json", truth);
}

// --- wiring ----------------------------------------------------------------

void add_corpus(CLI::App* sub, Options& o, bool required = true) {
  auto* opt = sub->add_option("--corpus", o.corpus, "Corpus manifest (manifest.json)");
  if (required) opt->required();
}

void add_embedding_flags(CLI::App* sub, Options& o) {
  sub->add_option("--embeddings", o.embeddings, "Embedding manifest")->required();
  sub->add_option("--labels", o.labels, "Purity labels: corpus group or full class")
      ->check(CLI::IsMember({"group", "class"}));
  sub->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)");
}

void add_umap_flags(CLI::App* sub, Options& o) {
  sub->add_option("--umap-seeds", o.umap_seeds, "UMAP runs per dimension (seeds 0..N-1)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));
  sub->add_option("--n-neighbors", o.n_neighbors, "UMAP neighbourhood size");
  sub->add_option("--min-dist", o.min_dist, "UMAP minimum distance");
  sub->add_option("--umap-epochs", o.umap_epochs, "UMAP optimisation epochs");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Stylometric analysis of embedding spaces"};
  app.name(args.empty() ? "stylespace" : fs::path(args.front()).filename().string());
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.add_option("--log-level", o.log_level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));

  std::map<std::string, std::function<void(Context&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, std::function<void(Context&)> fn) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--out", o.out, "Output directory");
    handlers[name] = std::move(fn);
    return s;
  };

  auto* ingest = sub("ingest", "Load and check a corpus manifest", cmd_ingest);
  add_corpus(ingest, o);

  auto* annotate = sub("annotate", "Tokenize, tag and find entities with the built-in annotator", cmd_annotate);
  add_corpus(annotate, o);
  annotate->add_option("--pos-lexicon", o.pos_lexicon, "Extra POS lexicon (surface<TAB>TAG)");
  annotate->add_option("--gazetteer", o.gazetteer, "Entity gazetteer (surface<TAB>KIND)");
  annotate->add_flag("--no-capitalization", o.no_capitalization, "Disable the capitalized-word entity heuristic");

  auto* features = sub("features", "Compute stylometric features", cmd_features);
  add_corpus(features, o);
  features->add_option("--annotations", o.annotations, "Annotation JSONL")->required();

  auto* validate = sub("validate", "Train the authorship validator and measure style transfer", cmd_validate);
  add_corpus(validate, o);
  validate->add_option("--mode", o.mode, "Vectorizer")->check(CLI::IsMember({"char-ngram", "function-words"}));
  validate->add_option("--seed", o.seed, "Solver seed");
  validate->add_option("--split-seed", o.split_seed, "Train/validation split seed");
  validate->add_option("--train-fraction", o.train_fraction, "Training share per class")
      ->check(CLI::Range(0.0, 1.0));
  validate->add_option("--svm-c", o.svm_c, "SVM regularisation C")->check(CLI::PositiveNumber);

  auto* cluster = sub("cluster", "k-means purity on full-dimensional embeddings", cmd_cluster);
  add_corpus(cluster, o);
  add_embedding_flags(cluster, o);
  cluster->add_option("--k", o.k, "Number of clusters")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  cluster->add_option("--seed", o.seed, "k-means seed");

  auto* reduce = sub("reduce", "UMAP projections for every model, dimension and seed", cmd_reduce);
  add_corpus(reduce, o);
  add_embedding_flags(reduce, o);
  add_umap_flags(reduce, o);
  reduce->add_option("--dims", o.dims, "Target dimensions, comma separated");

  auto* fidelity = sub("fidelity", "Purity agreement between full and reduced spaces", cmd_fidelity);
  add_corpus(fidelity, o);
  add_embedding_flags(fidelity, o);
  add_umap_flags(fidelity, o);
  fidelity->add_option("--dims", o.dims, "Target dimensions, comma separated");
  fidelity->add_option("--k", o.k, "Number of clusters")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  fidelity->add_option("--reductions", o.reductions, "Precomputed reductions manifest");

  auto* sensitivity = sub("sensitivity", "Correlate dispersion shifts with feature shifts", cmd_sensitivity);
  add_corpus(sensitivity, o);
  add_embedding_flags(sensitivity, o);
  add_umap_flags(sensitivity, o);
  sensitivity->add_option("--annotations", o.annotations, "Annotation JSONL (features computed on the fly)");
  sensitivity->add_option("--features", o.features, "Feature table from `features`");
  sensitivity->add_option("--reductions", o.reductions, "Precomputed reductions manifest");
  sensitivity->add_option("--space", o.space, "Spaces: fulld and/or <N>d, comma separated");
  sensitivity->add_option("--pairing", o.pairing, "Shift pairing")->check(CLI::IsMember({"cross", "matched"}));
  sensitivity->add_option("--aggregation", o.aggregation, "Cross-model aggregation")
      ->check(CLI::IsMember({"normalized-mean", "concat"}));
  sensitivity->add_option("--bonferroni-m", o.bonferroni_m, "Number of tests for the correction")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  sensitivity->add_option("--alpha", o.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  sensitivity->add_flag("--component-audit", o.component_audit, "Also correlate individual feature components");

  auto* rewrite = sub("rewrite", "Generate style-transfer rewrites through a chat-completions endpoint", cmd_rewrite);
  add_corpus(rewrite, o);
  rewrite->add_option("--endpoint", o.endpoint, "Endpoint config JSON")->required();
  rewrite->add_option("--template-file", o.template_file, "Prompt template with {source} and {author}");
  rewrite->add_option("--workers", o.workers, "Concurrent requests")->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  rewrite->add_option("--limit", o.limit, "Only the first N jobs (0: all)");

  auto* report = sub("report", "Render SVG figures from earlier outputs", cmd_report);
  add_corpus(report, o, false);
  report->add_option("--sensitivity", o.sensitivity, "sensitivity.csv");
  report->add_option("--eval", o.evals, "eval_*.json (repeatable)");
  report->add_option("--reductions", o.reductions, "Reductions manifest (needs --corpus)");
  report->add_option("--seed", o.seed, "Which UMAP seed to scatter");

  auto* synth = sub("synth", "Write a synthetic corpus with known ground truth", cmd_synth);
  synth->add_option("--fixture", o.fixture, "Fixture kind")
      ->check(CLI::IsMember({"planted", "disjoint", "function-words"}));
  synth->add_option("--family", o.family, "Planted family, or none for a null fixture")
      ->check(CLI::IsMember({"Structural", "TAG", "Entropy", "Letters", "NER", "none"}, CLI::ignore_case));
  synth->add_option("--delta", o.delta, "Planted shift (auto: per-family default)");
  synth->add_option("--n-docs", o.n_docs, "Documents per group (per class for non-planted fixtures)");
  synth->add_option("--tokens", o.tokens, "Tokens per document");
  synth->add_option("--probe-dim", o.probe_dim, "Probe embedding dimension");
  synth->add_option("--seed", o.seed, "Generator seed");

  std::vector<char*> argv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"stylespace"} : args;
  for (auto& a : storage) argv.push_back(a.data());

  auto error_json = [&](std::string_view kind, const std::string& message, const std::string& subject) {
    Json e = {{"error", {{"kind", kind}, {"message", message}}}};
    if (!subject.empty()) e["error"]["subject"] = subject;
    err << e.dump() << "\n";
  };

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << app.help() << "\n";
    error_json("usage", e.what(), "");
    return 2;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  try {
    static const std::map<std::string, log::Level> levels = {
        {"debug", log::Level::kDebug}, {"info", log::Level::kInfo}, {"warn", log::Level::kWarn},
        {"error", log::Level::kError}};
    log::set_level(levels.at(o.log_level));
    if (o.family != "none" && chosen->get_name() == "synth") o.family = std::string(to_string(parse_family(o.family)));
    if (o.delta != "auto") {
      try {
        (void)std::stod(o.delta);
      } catch (const std::exception&) {
        usage("--delta: expected a number or auto");
      }
    }

    Context ctx{o, fs::path(o.out), effective_config(*chosen), {}, {}};
    ctx.fingerprint = hex64(fnv1a64(ctx.config.dump()));
    fs::create_directories(ctx.out);
    handlers.at(chosen->get_name())(ctx);

    Json summary = {{"subcommand", chosen->get_name()},
                    {"config_fingerprint", ctx.fingerprint},
                    {"out", ctx.out.generic_string()},
                    {"outputs", ctx.outputs}};
    out << summary.dump() << "\n";
    return 0;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUsage) err << chosen->help() << "\n";
    error_json(to_string(e.kind()), e.what(), e.subject());
    return e.kind() == ErrorKind::kUsage ? 2 : 1;
  } catch (const std::exception& e) {
    error_json("internal", e.what(), "");
    return 1;
  }
}

}  // namespace stylespace::cli
