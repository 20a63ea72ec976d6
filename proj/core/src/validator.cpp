#include "stylespace/validator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "stylespace/annotate.hpp"
#include "stylespace/error.hpp"
#include "stylespace/lexicon.hpp"
#include "stylespace/rng.hpp"
#include "stylespace/utf8.hpp"

namespace stylespace {
namespace {

constexpr const char* kContainerFormat = "stylespace-validator";

SparseVector to_sparse(std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end());
  SparseVector v;
  v.indices.reserve(entries.size());
  v.values.reserve(entries.size());
  for (const auto& [i, x] : entries) {
    v.indices.push_back(i);
    v.values.push_back(x);
  }
  return v;
}

double sparse_dot(const std::vector<double>& w, const SparseVector& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.nnz(); ++k) s += w[x.indices[k]] * x.values[k];
  return s;
}

}  // namespace

std::string_view to_string(VectorizerMode mode) {
  return mode == VectorizerMode::kCharNgram ? "char-ngram" : "function-words";
}

VectorizerMode parse_vectorizer_mode(std::string_view text) {
  if (text == "char-ngram") return VectorizerMode::kCharNgram;
  if (text == "function-words") return VectorizerMode::kFunctionWords;
  throw Error(ErrorKind::kInvalidArgument, "unknown validator mode '" + std::string(text) + "'", std::string(text));
}

double SparseVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

std::map<std::string, std::size_t> char_ngrams(std::string_view text, std::size_t min_n, std::size_t max_n) {
  auto cps = utf8::decode(text);
  if (!cps) throw Error(ErrorKind::kDecode, "text is not valid UTF-8");
  std::map<std::string, std::size_t> counts;
  for (std::size_t n = min_n; n <= max_n; ++n) {
    if (cps->size() < n) break;
    for (std::size_t i = 0; i + n <= cps->size(); ++i) ++counts[utf8::encode(std::u32string_view(*cps).substr(i, n))];
  }
  return counts;
}

std::unordered_map<std::string, std::size_t> Vectorizer::raw_counts(std::string_view text) const {
  std::unordered_map<std::string, std::size_t> counts;
  if (mode_ == VectorizerMode::kCharNgram) {
    auto cps = utf8::decode(text);
    if (!cps) throw Error(ErrorKind::kDecode, "text is not valid UTF-8");
    for (std::size_t n = kMinN; n <= kMaxN; ++n) {
      if (cps->size() < n) break;
      for (std::size_t i = 0; i + n <= cps->size(); ++i) ++counts[utf8::encode(std::u32string_view(*cps).substr(i, n))];
    }
  } else {
    for (const auto& tok : segment(text).tokens) {
      if (!tok.is_word()) continue;
      std::string w = lexicon::normalize_word(tok.surface);
      if (index_.count(w)) ++counts[w];
    }
  }
  return counts;
}

Vectorizer Vectorizer::fit(const std::vector<std::string>& texts, VectorizerMode mode,
                           std::vector<std::string> function_words) {
  if (texts.empty()) throw Error(ErrorKind::kInsufficientData, "cannot fit a vectorizer on an empty corpus");
  Vectorizer v;
  v.mode_ = mode;
  v.n_docs_ = texts.size();

  std::uint64_t h = fnv1a64(to_string(mode));
  for (const auto& t : texts) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\x1e", 1), h);
  }
  v.fingerprint_ = hex64(h);

  std::map<std::string, std::size_t> df;
  if (mode == VectorizerMode::kFunctionWords) {
    if (function_words.empty()) {
      for (auto w : lexicon::function_words()) function_words.emplace_back(w);
    }
    std::set<std::string> unique;
    for (const auto& w : function_words) unique.insert(lexicon::normalize_word(w));
    v.terms_.assign(unique.begin(), unique.end());
    for (std::uint32_t i = 0; i < v.terms_.size(); ++i) v.index_[v.terms_[i]] = i;
    for (const auto& t : texts) {
      for (const auto& [term, c] : v.raw_counts(t)) ++df[term];
    }
  } else {
    for (const auto& t : texts) {
      for (const auto& [term, c] : v.raw_counts(t)) ++df[term];
    }
    v.terms_.reserve(df.size());
    for (const auto& [term, d] : df) v.terms_.push_back(term);
    for (std::uint32_t i = 0; i < v.terms_.size(); ++i) v.index_[v.terms_[i]] = i;
  }
  const auto n = static_cast<double>(v.n_docs_);
  v.idf_.resize(v.terms_.size());
  for (std::size_t i = 0; i < v.terms_.size(); ++i) {
    auto it = df.find(v.terms_[i]);
    const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
    v.idf_[i] = std::log((1.0 + n) / (1.0 + d)) + 1.0;
  }
  return v;
}

SparseVector Vectorizer::transform(std::string_view text) const {
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (const auto& [term, count] : raw_counts(text)) {
    auto it = index_.find(term);
    if (it == index_.end()) continue;
    entries.emplace_back(it->second, static_cast<double>(count) * idf_[it->second]);
  }
  SparseVector v = to_sparse(std::move(entries));
  const double norm = v.norm();
  if (norm > 0.0) {
    for (auto& x : v.values) x /= norm;
  }
  return v;
}

std::vector<SparseVector> Vectorizer::transform(const std::vector<std::string>& texts) const {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(transform(t));
  return out;
}

std::optional<std::uint32_t> Vectorizer::term_id(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

OrderedJson Vectorizer::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["mode"] = to_string(mode_);
  j["ngram_range"] = {kMinN, kMaxN};
  j["lexicon_version"] = lexicon::kVersion;
  j["fitted_on"] = fingerprint_;
  j["fitted_documents"] = n_docs_;
  j["vocabulary"] = terms_;
  j["idf"] = idf_;
  return j;
}

Vectorizer Vectorizer::from_json(const Json& j) {
  try {
    Vectorizer v;
    v.mode_ = parse_vectorizer_mode(j.at("mode").get<std::string>());
    v.fingerprint_ = j.at("fitted_on").get<std::string>();
    v.n_docs_ = j.at("fitted_documents").get<std::size_t>();
    v.terms_ = j.at("vocabulary").get<std::vector<std::string>>();
    v.idf_ = j.at("idf").get<std::vector<double>>();
    if (v.idf_.size() != v.terms_.size()) throw Error(ErrorKind::kSchema, "idf and vocabulary lengths differ");
    for (std::uint32_t i = 0; i < v.terms_.size(); ++i) v.index_[v.terms_[i]] = i;
    return v;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("vectorizer: ") + e.what());
  }
}

std::vector<double> LinearModel::decision(const SparseVector& x) const {
  std::vector<double> out(weights_.size());
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    double s = bias_[k];
    for (std::size_t t = 0; t < x.nnz(); ++t) {
      if (x.indices[t] < dim_) s += weights_[k][x.indices[t]] * x.values[t];
    }
    out[k] = s;
  }
  return out;
}

std::size_t LinearModel::predict(const SparseVector& x) const {
  const auto d = decision(x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (d[k] > d[best]) best = k;
  }
  return best;
}

OrderedJson LinearModel::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["dimension"] = dim_;
  j["hyper"] = {{"C", hyper_.c}, {"tolerance", hyper_.tolerance}, {"max_epochs", hyper_.max_epochs}, {"seed", hyper_.seed}};
  j["loss"] = "squared_hinge";
  j["penalty"] = "l2";
  j["multiclass"] = "ovr";
  j["bias"] = bias_;
  j["weights"] = weights_;
  OrderedJson traces = OrderedJson::array();
  for (const auto& t : traces_) {
    traces.push_back({{"epochs", t.epochs}, {"converged", t.converged},
                      {"final_dual", t.dual_objective.empty() ? 0.0 : t.dual_objective.back()},
                      {"final_primal", t.primal_objective.empty() ? 0.0 : t.primal_objective.back()}});
  }
  j["training"] = std::move(traces);
  return j;
}

LinearModel LinearModel::from_json(const Json& j) {
  try {
    LinearModel m;
    m.dim_ = j.at("dimension").get<std::size_t>();
    const auto& h = j.at("hyper");
    m.hyper_.c = h.at("C").get<double>();
    m.hyper_.tolerance = h.at("tolerance").get<double>();
    m.hyper_.max_epochs = h.at("max_epochs").get<int>();
    m.hyper_.seed = h.at("seed").get<std::uint64_t>();
    m.bias_ = j.at("bias").get<std::vector<double>>();
    m.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
    if (m.weights_.size() != m.bias_.size()) throw Error(ErrorKind::kSchema, "weights and bias class counts differ");
    for (const auto& w : m.weights_) {
      if (w.size() != m.dim_) throw Error(ErrorKind::kSchema, "weight vector length differs from dimension");
    }
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("linear model: ") + e.what());
  }
}

LinearModel train(const std::vector<SparseVector>& x, const std::vector<std::size_t>& y, std::size_t num_classes,
                  std::size_t dimension, const SvmHyper& hyper) {
  if (x.size() != y.size()) throw Error(ErrorKind::kInvalidArgument, "feature and label counts differ");
  if (!(hyper.c > 0.0)) throw Error(ErrorKind::kInvalidArgument, "C must be positive");
  std::set<std::size_t> present(y.begin(), y.end());
  if (present.size() < 2) throw Error(ErrorKind::kInsufficientData, "training needs at least two classes");
  for (std::size_t label : y) {
    if (label >= num_classes) throw Error(ErrorKind::kInvalidArgument, "label out of range");
  }
  for (const auto& v : x) {
    if (!v.indices.empty() && v.indices.back() >= dimension) throw Error(ErrorKind::kDimensionMismatch, "feature index exceeds dimension");
  }

  const std::size_t n = x.size();
  const double diag = 1.0 / (2.0 * hyper.c);
  std::vector<double> sq_norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 1.0;  // bias feature
    for (double v : x[i].values) s += v * v;
    sq_norm[i] = s;
  }

  LinearModel model;
  model.dim_ = dimension;
  model.hyper_ = hyper;
  model.weights_.assign(num_classes, std::vector<double>(dimension, 0.0));
  model.bias_.assign(num_classes, 0.0);
  model.traces_.resize(num_classes);

  for (std::size_t k = 0; k < num_classes; ++k) {
    std::vector<double>& w = model.weights_[k];
    double& b = model.bias_[k];
    TrainingTrace& trace = model.traces_[k];
    std::vector<double> alpha(n, 0.0);
    std::vector<double> sign(n);
    for (std::size_t i = 0; i < n; ++i) sign[i] = y[i] == k ? 1.0 : -1.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::derive(hyper.seed, k));

    for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        const double margin = sign[i] * (sparse_dot(w, x[i]) + b);
        const double g = margin - 1.0 + diag * alpha[i];
        const double pg = alpha[i] == 0.0 ? std::min(g, 0.0) : g;
        if (std::abs(pg) <= 1e-12) continue;
        const double old = alpha[i];
        alpha[i] = std::max(alpha[i] - g / (sq_norm[i] + diag), 0.0);
        const double step = (alpha[i] - old) * sign[i];
        for (std::size_t t = 0; t < x[i].nnz(); ++t) w[x[i].indices[t]] += step * x[i].values[t];
        b += step;
      }

      double w_sq = b * b;
      for (double v : w) w_sq += v * v;
      double alpha_term = 0.0;
      double hinge = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        alpha_term += 0.5 * diag * alpha[i] * alpha[i] - alpha[i];
        const double slack = 1.0 - sign[i] * (sparse_dot(w, x[i]) + b);
        if (slack > 0.0) hinge += slack * slack;
      }
      const double dual = 0.5 * w_sq + alpha_term;
      const double primal = 0.5 * w_sq + hyper.c * hinge;
      trace.dual_objective.push_back(dual);
      trace.primal_objective.push_back(primal);
      trace.epochs = epoch + 1;
      if (primal + dual <= hyper.tolerance * std::max(primal, 1e-300)) {
        trace.converged = true;
        break;
      }
    }
  }
  return model;
}

std::vector<std::size_t> EvalReport::support() const {
  std::vector<std::size_t> out;
  for (const auto& row : confusion) out.push_back(std::accumulate(row.begin(), row.end(), std::size_t{0}));
  return out;
}

OrderedJson EvalReport::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["slice"] = slice ? OrderedJson(*slice) : OrderedJson(nullptr);
  j["total"] = total;
  j["accuracy"] = accuracy;
  j["macro_f1"] = macro_f1;
  OrderedJson per = OrderedJson::object();
  for (std::size_t k = 0; k < class_names.size(); ++k) {
    per[class_names[k]] = per_class_accuracy[k] ? OrderedJson(*per_class_accuracy[k]) : OrderedJson(nullptr);
  }
  j["per_class_accuracy"] = std::move(per);
  j["classes"] = class_names;
  j["confusion"] = confusion;
  return j;
}

EvalReport evaluate_predictions(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                                const std::vector<std::string>& class_names) {
  if (gold.empty()) throw Error(ErrorKind::kInsufficientData, "empty evaluation set");
  if (gold.size() != predicted.size()) throw Error(ErrorKind::kInvalidArgument, "gold and predicted lengths differ");
  const std::size_t k = class_names.size();
  EvalReport r;
  r.class_names = class_names;
  r.total = gold.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= k || predicted[i] >= k) throw Error(ErrorKind::kInvalidArgument, "label out of range");
    ++r.confusion[gold[i]][predicted[i]];
  }
  std::size_t correct = 0;
  double f1_sum = 0.0;
  std::size_t f1_count = 0;
  r.per_class_accuracy.assign(k, std::nullopt);
  for (std::size_t c = 0; c < k; ++c) {
    correct += r.confusion[c][c];
    std::size_t support = 0;
    std::size_t predicted_c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      support += r.confusion[c][j];
      predicted_c += r.confusion[j][c];
    }
    if (support > 0) r.per_class_accuracy[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(support);
    if (support == 0 && predicted_c == 0) continue;
    const double tp = static_cast<double>(r.confusion[c][c]);
    const double denom = static_cast<double>(support + predicted_c);
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    ++f1_count;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  r.macro_f1 = f1_count ? f1_sum / static_cast<double>(f1_count) : 0.0;
  return r;
}

EvalReport evaluate(const LinearModel& model, const std::vector<SparseVector>& x, const std::vector<std::size_t>& y,
                    const std::vector<std::string>& class_names) {
  std::vector<std::size_t> predicted;
  predicted.reserve(x.size());
  for (const auto& v : x) predicted.push_back(model.predict(v));
  return evaluate_predictions(y, predicted, class_names);
}

std::vector<EvalReport> evaluate_slices(const LinearModel& model, const std::vector<SparseVector>& x,
                                        const std::vector<std::size_t>& y, const std::vector<std::string>& slices,
                                        const std::vector<std::string>& class_names) {
  if (slices.size() != x.size()) throw Error(ErrorKind::kInvalidArgument, "slice labels and samples differ in length");
  std::set<std::string> keys(slices.begin(), slices.end());
  std::vector<EvalReport> out;
  for (const auto& key : keys) {
    std::vector<SparseVector> xs;
    std::vector<std::size_t> ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (slices[i] != key) continue;
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
    EvalReport r = evaluate(model, xs, ys, class_names);
    r.slice = key;
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t target_class(Author author) {
  for (std::size_t k = 0; k < std::size(kTargetAuthors); ++k) {
    if (kTargetAuthors[k] == author) return k;
  }
  throw Error(ErrorKind::kInvalidArgument, "author is not a validator target", std::string(to_string(author)));
}

std::vector<std::string> target_class_names() {
  std::vector<std::string> names;
  for (Author a : kTargetAuthors) names.emplace_back(to_string(a));
  return names;
}

TransferResult transfer_protocol(const std::vector<Document>& style_ref, const std::vector<Document>& style_gen,
                                 VectorizerMode mode, const TransferOptions& options) {
  const Split split = stratified_split(style_ref, options.train_fraction, options.split_seed);
  auto texts = [](const std::vector<Document>& docs) {
    std::vector<std::string> out;
    for (const auto& d : docs) out.push_back(d.text);
    return out;
  };
  auto labels = [](const std::vector<Document>& docs) {
    std::vector<std::size_t> out;
    for (const auto& d : docs) out.push_back(target_class(d.label.author));
    return out;
  };
  const auto names = target_class_names();

  Vectorizer vectorizer = Vectorizer::fit(texts(split.train), mode, options.function_words);
  const auto x_train = vectorizer.transform(texts(split.train));
  LinearModel model = train(x_train, labels(split.train), names.size(), vectorizer.vocabulary().size(), options.hyper);

  TransferResult result{vectorizer, model, evaluate(model, vectorizer.transform(texts(split.validation)),
                                                    labels(split.validation), names),
                        std::nullopt, {}};
  result.validation.slice = "validation";
  if (!style_gen.empty()) {
    const auto x_gen = vectorizer.transform(texts(style_gen));
    const auto y_gen = labels(style_gen);
    result.transfer = evaluate(model, x_gen, y_gen, names);
    result.transfer->slice = "transfer";
    std::vector<std::string> slices;
    for (const auto& d : style_gen) slices.emplace_back(d.label.generator ? to_string(*d.label.generator) : "NONE");
    result.transfer_by_generator = evaluate_slices(model, x_gen, y_gen, slices, names);
  }
  return result;
}

OrderedJson validator_to_json(const Vectorizer& vectorizer, const LinearModel& model) {
  OrderedJson j = OrderedJson::object();
  j["format"] = kContainerFormat;
  j["version"] = 1;
  j["classes"] = target_class_names();
  j["vectorizer"] = vectorizer.to_json();
  j["model"] = model.to_json();
  return j;
}

std::pair<Vectorizer, LinearModel> validator_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kContainerFormat) {
    throw Error(ErrorKind::kSchema, "not a stylespace validator container");
  }
  Vectorizer v = Vectorizer::from_json(j.at("vectorizer"));
  LinearModel m = LinearModel::from_json(j.at("model"));
  if (m.dimension() != v.vocabulary().size()) throw Error(ErrorKind::kSchema, "model dimension differs from vocabulary size");
  return {std::move(v), std::move(m)};
}

CsvTable eval_table(const std::vector<EvalReport>& reports) {
  CsvTable t;
  t.header = {"slice", "total", "accuracy", "macro_f1"};
  if (!reports.empty()) {
    for (const auto& name : reports.front().class_names) t.header.push_back("accuracy:" + name);
  }
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.slice.value_or(""), std::to_string(r.total), format_double(r.accuracy),
                                     format_double(r.macro_f1)};
    for (const auto& a : r.per_class_accuracy) row.push_back(a ? format_double(*a) : "");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace stylespace
