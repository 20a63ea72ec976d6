#include "stylespace/sensitivity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "stylespace/error.hpp"
#include "stylespace/log.hpp"

namespace stylespace {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

OrderedJson number_or_null(const std::optional<double>& v) { return v ? OrderedJson(*v) : OrderedJson(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string_view to_string(Pairing pairing) { return pairing == Pairing::kCross ? "cross" : "matched"; }

std::string_view to_string(Aggregation aggregation) {
  return aggregation == Aggregation::kNormalizedMean ? "normalized-mean" : "concat";
}

Pairing parse_pairing(std::string_view text) {
  const auto t = lower(text);
  if (t == "cross") return Pairing::kCross;
  if (t == "matched") return Pairing::kMatched;
  throw Error(ErrorKind::kInvalidArgument, "unknown pairing '" + std::string(text) + "' (cross|matched)", std::string(text));
}

Aggregation parse_aggregation(std::string_view text) {
  const auto t = lower(text);
  if (t == "normalized-mean") return Aggregation::kNormalizedMean;
  if (t == "concat") return Aggregation::kConcat;
  throw Error(ErrorKind::kInvalidArgument, "unknown aggregation '" + std::string(text) + "' (normalized-mean|concat)",
              std::string(text));
}

std::optional<double> DispersionTable::of(const std::string& doc_id) const {
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    if (doc_ids[i] == doc_id) return mean_distance[i];
  }
  return std::nullopt;
}

DispersionTable dispersion(const std::vector<Matrix>& iterations, const std::vector<std::string>& doc_ids,
                           const std::vector<std::string>& classes) {
  if (iterations.empty()) throw Error(ErrorKind::kInsufficientData, "dispersion needs at least one iteration");
  if (doc_ids.size() != classes.size()) throw Error(ErrorKind::kDimensionMismatch, "doc_ids and classes differ in length");
  if (doc_ids.empty()) throw Error(ErrorKind::kInsufficientData, "dispersion needs at least one document");
  const std::size_t n = doc_ids.size();
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) members[classes[i]].push_back(i);

  DispersionTable table;
  table.doc_ids = doc_ids;
  table.classes = classes;
  table.iterations = iterations.size();
  table.mean_distance.assign(n, 0.0);
  for (const auto& it : iterations) {
    if (it.rows() != n) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "iteration has " + std::to_string(it.rows()) + " rows, expected " + std::to_string(n));
    }
    for (const auto& [cls, rows] : members) {
      std::vector<double> c(it.cols(), 0.0);
      for (std::size_t r : rows) {
        const auto x = it.row(r);
        for (std::size_t d = 0; d < c.size(); ++d) c[d] += x[d];
      }
      for (auto& v : c) v /= static_cast<double>(rows.size());
      for (std::size_t r : rows) table.mean_distance[r] += std::sqrt(squared_distance(it.row(r), c));
      table.centroids[cls].push_back(std::move(c));
    }
  }
  for (auto& d : table.mean_distance) d /= static_cast<double>(iterations.size());
  return table;
}

std::vector<ShiftSample> shift_samples(const std::vector<std::string>& ref_ids,
                                       const std::vector<std::string>& cmp_ids,
                                       const std::map<std::string, double>& dispersion_of,
                                       const std::map<std::string, std::map<Family, double>>& features,
                                       Pairing pairing, const std::map<std::string, std::string>& source_of) {
  auto disp = [&](const std::string& id) {
    auto it = dispersion_of.find(id);
    if (it == dispersion_of.end()) throw Error(ErrorKind::kUnknownId, "no dispersion for " + id, id);
    return it->second;
  };
  auto feat = [&](const std::string& id) -> const std::map<Family, double>& {
    auto it = features.find(id);
    if (it == features.end()) throw Error(ErrorKind::kUnknownId, "no features for " + id, id);
    return it->second;
  };
  auto make = [&](const std::string& i, const std::string& j) {
    ShiftSample s;
    s.ref_id = i;
    s.cmp_id = j;
    s.delta_d = disp(i) - disp(j);
    const auto& fi = feat(i);
    const auto& fj = feat(j);
    for (Family f : kFamilies) {
      auto a = fi.find(f);
      auto b = fj.find(f);
      if (a == fi.end() || b == fj.end()) throw Error(ErrorKind::kSchema, "missing family " + std::string(to_string(f)), i);
      s.delta_f[f] = a->second - b->second;
    }
    return s;
  };

  std::vector<ShiftSample> out;
  if (pairing == Pairing::kCross) {
    out.reserve(ref_ids.size() * cmp_ids.size());
    for (const auto& i : ref_ids) {
      for (const auto& j : cmp_ids) out.push_back(make(i, j));
    }
    return out;
  }
  const std::set<std::string> refs(ref_ids.begin(), ref_ids.end());
  out.reserve(cmp_ids.size());
  for (const auto& j : cmp_ids) {
    auto it = source_of.find(j);
    if (it == source_of.end()) {
      throw Error(ErrorKind::kInvalidArgument, "matched pairing needs a source_id for " + j, j);
    }
    if (!refs.count(it->second)) {
      throw Error(ErrorKind::kUnknownId, "source_id " + it->second + " of " + j + " is not in the reference class", j);
    }
    out.push_back(make(it->second, j));
  }
  return out;
}

Correlation pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::kDimensionMismatch, "pearson inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorKind::kInsufficientData, "pearson needs at least 3 pairs");
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) throw Error(ErrorKind::kUndefined, "correlation undefined: zero variance");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorKind::kUndefined, "correlation undefined: zero variance");
  Correlation c;
  c.n = n;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p = 0.0;
  } else {
    const double t = std::abs(c.r) * std::sqrt(df / (1.0 - c.r * c.r));
    const boost::math::students_t dist(df);
    c.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  }
  return c;
}

Adjusted bonferroni(double p_raw, std::size_t m, double alpha) {
  if (m == 0) throw Error(ErrorKind::kInvalidArgument, "Bonferroni family size must be at least 1");
  Adjusted a;
  a.p_adjusted = std::min(1.0, static_cast<double>(m) * p_raw);
  a.significant = a.p_adjusted < alpha;
  return a;
}

OrderedJson SensitivityConfig::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["pairing"] = to_string(pairing);
  j["aggregation"] = to_string(aggregation);
  j["bonferroni_m"] = bonferroni_m;
  j["alpha"] = alpha;
  j["component_audit"] = component_audit;
  return j;
}

std::map<std::string, double> aggregate_dispersion(const SpaceData& space, const std::vector<std::string>& doc_ids,
                                                   const std::vector<std::string>& classes, Aggregation aggregation) {
  if (space.models.empty()) throw Error(ErrorKind::kInsufficientData, "space " + space.name + " has no models", space.name);
  std::vector<double> total(doc_ids.size(), 0.0);
  if (aggregation == Aggregation::kConcat) {
    const std::size_t iters = space.models.front().iterations.size();
    for (const auto& m : space.models) {
      if (m.iterations.size() != iters) {
        throw Error(ErrorKind::kDimensionMismatch, "concat aggregation needs equal iteration counts across models", m.model);
      }
    }
    std::vector<Matrix> stacked;
    for (std::size_t it = 0; it < iters; ++it) {
      std::size_t cols = 0;
      for (const auto& m : space.models) cols += m.iterations[it].cols();
      Matrix s(doc_ids.size(), cols);
      std::size_t offset = 0;
      for (const auto& m : space.models) {
        const Matrix& x = m.iterations[it];
        if (x.rows() != doc_ids.size()) throw Error(ErrorKind::kDimensionMismatch, "rows differ from documents", m.model);
        for (std::size_t r = 0; r < x.rows(); ++r) {
          for (std::size_t c = 0; c < x.cols(); ++c) s(r, offset + c) = x(r, c);
        }
        offset += x.cols();
      }
      stacked.push_back(std::move(s));
    }
    total = dispersion(stacked, doc_ids, classes).mean_distance;
  } else {
    for (const auto& m : space.models) {
      const auto table = dispersion(m.iterations, doc_ids, classes);
      double global = 0.0;
      for (double d : table.mean_distance) global += d;
      global /= static_cast<double>(doc_ids.size());
      if (!(global > 0.0)) {
        log::warn("sensitivity.zero_dispersion_model", {{"model", m.model}, {"space", space.name}});
        continue;
      }
      for (std::size_t i = 0; i < doc_ids.size(); ++i) total[i] += table.mean_distance[i] / global;
    }
    for (auto& v : total) v /= static_cast<double>(space.models.size());
  }
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < doc_ids.size(); ++i) out[doc_ids[i]] = total[i];
  return out;
}

namespace {

struct Comparison {
  std::string name;
  std::string slice;
  bool per_generator = false;
  std::vector<std::string> ids;
};

SensitivityRow correlate(const std::vector<double>& dd, const std::vector<double>& df, std::size_t n_pairs,
                         const SensitivityConfig& config) {
  SensitivityRow row;
  row.n_pairs = n_pairs;
  try {
    const auto c = pearson(dd, df);
    const auto adj = bonferroni(c.p, config.bonferroni_m, config.alpha);
    row.r = c.r;
    row.p_raw = c.p;
    row.p_adjusted = adj.p_adjusted;
    row.significant = adj.significant;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kUndefined && e.kind() != ErrorKind::kInsufficientData) throw;
    row.note = e.what();
  }
  return row;
}

}  // namespace

SensitivityReport sensitivity_report(const SensitivityDataset& dataset, const SensitivityConfig& config) {
  if (config.bonferroni_m == 0) throw Error(ErrorKind::kInvalidArgument, "bonferroni_m must be at least 1");
  SensitivityReport report;
  report.config = config;

  std::vector<std::string> ids;
  std::vector<std::string> pooled_classes;
  std::vector<std::string> generator_classes;
  std::vector<std::string> reference;
  std::map<std::string, std::string> source_of;
  for (const auto& d : dataset.documents) {
    ids.push_back(d.id);
    pooled_classes.push_back(class_name(d.label, false));
    generator_classes.push_back(class_name(d.label, true));
    if (d.label.group == CorpusGroup::kTufferyRef) reference.push_back(d.id);
    if (d.source_id) source_of[d.id] = *d.source_id;
  }
  if (reference.empty()) throw Error(ErrorKind::kInsufficientData, "no Tuffery_ref documents in the dataset");

  std::vector<Comparison> comparisons;
  for (Author a : kTargetAuthors) {
    Comparison ref{class_name({CorpusGroup::kStyleRef, a, std::nullopt}), "pooled", false, {}};
    Comparison gen{class_name({CorpusGroup::kStyleGen, a, std::nullopt}), "pooled", false, {}};
    std::map<Generator, Comparison> by_gen;
    for (const auto& d : dataset.documents) {
      if (d.label.author != a) continue;
      if (d.label.group == CorpusGroup::kStyleRef) ref.ids.push_back(d.id);
      if (d.label.group == CorpusGroup::kStyleGen) {
        gen.ids.push_back(d.id);
        if (d.label.generator) {
          auto& c = by_gen[*d.label.generator];
          c.name = gen.name;
          c.slice = std::string(to_string(*d.label.generator));
          c.per_generator = true;
          c.ids.push_back(d.id);
        }
      }
    }
    if (!ref.ids.empty()) comparisons.push_back(std::move(ref));
    if (!gen.ids.empty()) comparisons.push_back(std::move(gen));
    for (Generator g : kGenerators) {
      auto it = by_gen.find(g);
      if (it != by_gen.end()) comparisons.push_back(std::move(it->second));
    }
  }

  std::map<std::string, std::map<Family, double>> family_of;
  for (const auto& [id, rec] : dataset.features) family_of[id] = rec.family;
  std::vector<std::string> component_names;
  if (config.component_audit && !dataset.features.empty()) {
    for (const auto& [name, v] : dataset.features.begin()->second.components) component_names.push_back(name);
  }
  const std::string ref_name = class_name({CorpusGroup::kTufferyRef, Author::kTuffery, std::nullopt});

  for (const auto& space : dataset.spaces) {
    const auto pooled = aggregate_dispersion(space, ids, pooled_classes, config.aggregation);
    const auto per_gen = aggregate_dispersion(space, ids, generator_classes, config.aggregation);
    for (const auto& cmp : comparisons) {
      const auto& disp = cmp.per_generator ? per_gen : pooled;
      SensitivityRow base;
      base.reference = ref_name;
      base.comparison = cmp.name;
      base.slice = cmp.slice;
      base.space = space.name;
      base.aggregation = std::string(to_string(config.aggregation));
      base.pairing = std::string(to_string(config.pairing));

      std::vector<ShiftSample> samples;
      std::string failure;
      try {
        samples = shift_samples(reference, cmp.ids, disp, family_of, config.pairing, source_of);
      } catch (const Error& e) {
        if (config.pairing != Pairing::kMatched || e.kind() == ErrorKind::kSchema) throw;
        failure = e.what();
      }
      std::vector<double> dd;
      dd.reserve(samples.size());
      for (const auto& s : samples) dd.push_back(s.delta_d);

      for (Family f : kFamilies) {
        SensitivityRow row = base;
        row.family = std::string(to_string(f));
        if (!failure.empty()) {
          row.note = failure;
        } else {
          std::vector<double> df;
          df.reserve(samples.size());
          for (const auto& s : samples) df.push_back(s.delta_f.at(f));
          const auto c = correlate(dd, df, samples.size(), config);
          row.r = c.r;
          row.p_raw = c.p_raw;
          row.p_adjusted = c.p_adjusted;
          row.significant = c.significant;
          row.n_pairs = c.n_pairs;
          row.note = c.note;
        }
        report.rows.push_back(std::move(row));
      }
      if (!failure.empty()) continue;
      for (const auto& name : component_names) {
        std::vector<double> dc;
        dc.reserve(samples.size());
        for (const auto& s : samples) {
          dc.push_back(dataset.features.at(s.ref_id).components.at(name) -
                       dataset.features.at(s.cmp_id).components.at(name));
        }
        SensitivityRow row = base;
        row.family = name;
        const auto c = correlate(dd, dc, samples.size(), config);
        row.r = c.r;
        row.p_raw = c.p_raw;
        row.p_adjusted = c.p_adjusted;
        row.significant = c.significant;
        row.n_pairs = c.n_pairs;
        row.note = c.note;
        report.components.push_back(std::move(row));
      }
    }
  }
  return report;
}

namespace {

std::optional<std::string> top_of(const std::vector<SensitivityRow>& rows, const std::string& comparison,
                                  const std::string& space, const std::string& slice, bool require_significant) {
  const SensitivityRow* best = nullptr;
  for (const auto& r : rows) {
    if (r.comparison != comparison || r.space != space || r.slice != slice || !r.r) continue;
    if (require_significant && !r.significant) continue;
    if (!best || std::abs(*r.r) > std::abs(*best->r)) best = &r;
  }
  if (!best) return std::nullopt;
  return best->family;
}

OrderedJson row_json(const SensitivityRow& r) {
  OrderedJson j = OrderedJson::object();
  j["reference"] = r.reference;
  j["comparison"] = r.comparison;
  j["slice"] = r.slice;
  j["family"] = r.family;
  j["space"] = r.space;
  j["aggregation"] = r.aggregation;
  j["pairing"] = r.pairing;
  j["r"] = number_or_null(r.r);
  j["p_raw"] = number_or_null(r.p_raw);
  j["p_adjusted"] = number_or_null(r.p_adjusted);
  j["significant"] = r.significant;
  j["n_pairs"] = r.n_pairs;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace

std::optional<std::string> SensitivityReport::top_significant_family(const std::string& comparison,
                                                                     const std::string& space,
                                                                     const std::string& slice) const {
  return top_of(rows, comparison, space, slice, true);
}

std::optional<std::string> SensitivityReport::top_family(const std::string& comparison, const std::string& space,
                                                         const std::string& slice) const {
  return top_of(rows, comparison, space, slice, false);
}

OrderedJson SensitivityReport::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["config"] = config.to_json();
  OrderedJson list = OrderedJson::array();
  for (const auto& r : rows) list.push_back(row_json(r));
  j["rows"] = std::move(list);
  if (!components.empty()) {
    OrderedJson audit = OrderedJson::array();
    for (const auto& r : components) audit.push_back(row_json(r));
    j["component_audit"] = std::move(audit);
  }
  return j;
}

CsvTable SensitivityReport::to_csv() const {
  CsvTable t;
  t.header = {"reference", "comparison", "slice", "family", "space", "aggregation", "pairing",
              "r", "p_raw", "p_adjusted", "significant", "n_pairs", "note"};
  for (const auto& r : rows) {
    t.rows.push_back({r.reference, r.comparison, r.slice, r.family, r.space, r.aggregation, r.pairing, cell(r.r),
                      cell(r.p_raw), cell(r.p_adjusted), r.significant ? "true" : "false", std::to_string(r.n_pairs),
                      r.note});
  }
  return t;
}

}  // namespace stylespace
