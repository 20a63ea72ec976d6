#include "stylespace/embedspace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "stylespace/error.hpp"
#include "stylespace/rng.hpp"

namespace stylespace {
namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void check_finite(const EmbeddingSet& set) {
  for (std::size_t r = 0; r < set.rows(); ++r) {
    for (std::size_t c = 0; c < set.dim; ++c) {
      if (!std::isfinite(set.values[r * set.dim + c])) {
        throw Error(ErrorKind::kNonFinite,
                    set.model_name + ": non-finite value at row " + std::to_string(r) + " (" + set.doc_ids[r] + ")",
                    std::to_string(r));
      }
    }
  }
}

std::vector<std::size_t> nearest_centroids(const Matrix& x, const Matrix& centroids, std::vector<double>& dist) {
  std::vector<std::size_t> out(x.rows());
  dist.assign(x.rows(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double d = squared_distance(x.row(i), centroids.row(c));
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    out[i] = arg;
    dist[i] = best;
  }
  return out;
}

Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centers(k, x.cols());
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::size_t first = rng.below(n);
  std::copy(x.row(first).begin(), x.row(first).end(), centers.row(0).begin());
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(x.row(i), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double potential = std::accumulate(closest.begin(), closest.end(), 0.0);
    std::size_t best_candidate = 0;
    double best_potential = std::numeric_limits<double>::infinity();
    std::vector<double> best_closest;
    for (std::size_t t = 0; t < trials; ++t) {
      std::size_t candidate;
      if (potential <= 0.0) {
        candidate = rng.below(n);
      } else {
        candidate = rng.categorical(closest);
      }
      std::vector<double> updated(n);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        updated[i] = std::min(closest[i], squared_distance(x.row(i), x.row(candidate)));
        total += updated[i];
      }
      if (total < best_potential) {
        best_potential = total;
        best_candidate = candidate;
        best_closest = std::move(updated);
      }
    }
    std::copy(x.row(best_candidate).begin(), x.row(best_candidate).end(), centers.row(c).begin());
    closest = std::move(best_closest);
  }
  return centers;
}

struct LloydResult {
  std::vector<std::size_t> assignments;
  Matrix centroids;
  double inertia = 0.0;
};

LloydResult lloyd(const Matrix& x, Matrix centroids, const KMeansOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t k = centroids.rows();
  const std::size_t d = x.cols();
  std::vector<double> dist;
  std::vector<std::size_t> assign = nearest_centroids(x, centroids, dist);
  double inertia = std::accumulate(dist.begin(), dist.end(), 0.0);
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    Matrix next(k, d, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      auto row = next.row(assign[i]);
      const auto xi = x.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] += xi[j];
    }
    std::vector<bool> used(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      std::size_t far = 0;
      double far_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i] && dist[i] > far_dist) {
          far_dist = dist[i];
          far = i;
        }
      }
      used[far] = true;
      dist[far] = 0.0;
      std::copy(x.row(far).begin(), x.row(far).end(), next.row(c).begin());
    }
    centroids = std::move(next);
    std::vector<double> new_dist;
    std::vector<std::size_t> new_assign = nearest_centroids(x, centroids, new_dist);
    const double new_inertia = std::accumulate(new_dist.begin(), new_dist.end(), 0.0);
    const bool unchanged = new_assign == assign;
    const double improvement = inertia - new_inertia;
    assign = std::move(new_assign);
    dist = std::move(new_dist);
    inertia = new_inertia;
    if (unchanged || improvement <= options.tolerance * inertia) break;
  }
  return {std::move(assign), std::move(centroids), inertia};
}

}  // namespace

Matrix EmbeddingSet::to_matrix() const {
  Matrix m(rows(), dim);
  for (std::size_t i = 0; i < values.size(); ++i) m.data()[i] = static_cast<double>(values[i]);
  return m;
}

EmbeddingSet EmbeddingSet::from_matrix(std::string model_name, std::vector<std::string> doc_ids, const Matrix& m) {
  if (doc_ids.size() != m.rows()) throw Error(ErrorKind::kDimensionMismatch, "doc_ids and matrix rows differ");
  EmbeddingSet set;
  set.model_name = std::move(model_name);
  set.dim = m.cols();
  set.doc_ids = std::move(doc_ids);
  set.values.reserve(m.data().size());
  for (double v : m.data()) set.values.push_back(static_cast<float>(v));
  return set;
}

void write_embedding_binary(const EmbeddingSet& set, const std::filesystem::path& header_path,
                            const std::filesystem::path& data_path) {
  if (set.values.size() != set.rows() * set.dim) throw Error(ErrorKind::kDimensionMismatch, "embedding values do not match rows x dim");
  std::string bytes(set.values.size() * 4, '\0');
  for (std::size_t i = 0; i < set.values.size(); ++i) {
    const std::uint32_t le = to_little_endian(std::bit_cast<std::uint32_t>(set.values[i]));
    std::memcpy(bytes.data() + 4 * i, &le, 4);
  }
  write_file(data_path, bytes);
  OrderedJson header = OrderedJson::object();
  header["model"] = set.model_name;
  header["dim"] = set.dim;
  header["rows"] = set.rows();
  header["dtype"] = "float32-le";
  header["data"] = std::filesystem::relative(data_path, header_path.parent_path().empty() ? "." : header_path.parent_path())
                       .generic_string();
  header["doc_ids"] = set.doc_ids;
  write_json(header_path, header);
}

EmbeddingSet read_embedding_binary(const std::filesystem::path& header_path) {
  const Json header = read_json(header_path);
  EmbeddingSet set;
  std::filesystem::path data;
  try {
    set.model_name = header.at("model").get<std::string>();
    set.dim = header.at("dim").get<std::size_t>();
    set.doc_ids = header.at("doc_ids").get<std::vector<std::string>>();
    if (header.at("rows").get<std::size_t>() != set.doc_ids.size()) {
      throw Error(ErrorKind::kCountMismatch, header_path.string() + ": rows differs from doc_ids length");
    }
    if (header.value("dtype", std::string("float32-le")) != "float32-le") {
      throw Error(ErrorKind::kSchema, header_path.string() + ": unsupported dtype");
    }
    data = header_path.parent_path() / header.at("data").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::kSchema, header_path.string() + ": " + e.what(), header_path.string());
  }
  const std::string bytes = read_file(data);
  const std::size_t expected = set.doc_ids.size() * set.dim * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorKind::kDimensionMismatch,
                data.string() + ": expected " + std::to_string(expected) + " bytes, found " + std::to_string(bytes.size()),
                data.string());
  }
  set.values.resize(set.doc_ids.size() * set.dim);
  for (std::size_t i = 0; i < set.values.size(); ++i) {
    std::uint32_t le;
    std::memcpy(&le, bytes.data() + 4 * i, 4);
    set.values[i] = std::bit_cast<float>(to_little_endian(le));
  }
  return set;
}

EmbeddingSet read_embedding_jsonl(const std::filesystem::path& path, std::string model_name, std::size_t dim) {
  const std::string text = read_file(path);
  EmbeddingSet set;
  set.model_name = std::move(model_name);
  set.dim = dim;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      const auto& vec = j.at("vector");
      if (!vec.is_array() || vec.size() != dim) {
        throw Error(ErrorKind::kDimensionMismatch,
                    path.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(vec.size()) +
                        " values, expected " + std::to_string(dim),
                    std::to_string(set.rows()));
      }
      set.doc_ids.push_back(j.at("doc_id").get<std::string>());
      for (const auto& v : vec) {
        if (!v.is_number()) {
          throw Error(ErrorKind::kNonFinite, path.string() + ": non-numeric value at row " + std::to_string(set.rows() - 1),
                      std::to_string(set.rows() - 1));
        }
        set.values.push_back(v.get<float>());
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::kSchema, path.string() + ": line " + std::to_string(line_no) + ": " + e.what(),
                  std::to_string(line_no));
    }
  }
  return set;
}

void write_embedding_jsonl(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t r = 0; r < set.rows(); ++r) {
    Json line = {{"doc_id", set.doc_ids[r]},
                 {"vector", std::vector<float>(set.values.begin() + static_cast<std::ptrdiff_t>(r * set.dim),
                                               set.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * set.dim))}};
    out += line.dump() + "\n";
  }
  write_file(path, out);
}

std::vector<EmbeddingManifestEntry> load_embedding_manifest(const std::filesystem::path& path) {
  const Json j = read_json(path);
  if (!j.is_object() || !j.contains("models") || !j["models"].is_array()) {
    throw Error(ErrorKind::kSchema, path.string() + ": expected an object with a 'models' array", path.string());
  }
  std::vector<EmbeddingManifestEntry> out;
  for (const auto& m : j["models"]) {
    try {
      EmbeddingManifestEntry e;
      e.model = m.at("model").get<std::string>();
      e.dim = m.at("dim").get<std::size_t>();
      e.format = m.value("format", std::string("f32"));
      if (e.format != "f32" && e.format != "jsonl") throw Error(ErrorKind::kSchema, "unknown embedding format '" + e.format + "'", e.model);
      e.path = path.parent_path() / m.at("path").get<std::string>();
      out.push_back(std::move(e));
    } catch (const Json::exception& ex) {
      throw Error(ErrorKind::kSchema, path.string() + ": " + ex.what(), path.string());
    }
  }
  return out;
}

void write_embedding_manifest(const std::filesystem::path& path, const std::vector<EmbeddingManifestEntry>& entries) {
  OrderedJson models = OrderedJson::array();
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  for (const auto& e : entries) {
    OrderedJson m = OrderedJson::object();
    m["model"] = e.model;
    m["dim"] = e.dim;
    m["format"] = e.format;
    m["path"] = std::filesystem::relative(e.path, base).generic_string();
    models.push_back(std::move(m));
  }
  write_json(path, OrderedJson{{"models", models}});
}

EmbeddingSet load_embeddings(const EmbeddingManifestEntry& entry, const std::vector<std::string>& corpus_ids) {
  EmbeddingSet raw = entry.format == "jsonl" ? read_embedding_jsonl(entry.path, entry.model, entry.dim)
                                             : read_embedding_binary(entry.path);
  if (raw.dim != entry.dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                entry.model + ": manifest dim " + std::to_string(entry.dim) + " but data dim " + std::to_string(raw.dim),
                entry.model);
  }
  raw.model_name = entry.model;
  check_finite(raw);
  if (raw.rows() != corpus_ids.size()) {
    throw Error(ErrorKind::kCountMismatch,
                entry.model + ": " + std::to_string(raw.rows()) + " rows but corpus has " + std::to_string(corpus_ids.size()) +
                    " documents",
                entry.model);
  }
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    if (!row_of.emplace(raw.doc_ids[r], r).second) {
      throw Error(ErrorKind::kDuplicateId, entry.model + ": duplicate doc_id " + raw.doc_ids[r], raw.doc_ids[r]);
    }
  }
  EmbeddingSet aligned;
  aligned.model_name = raw.model_name;
  aligned.dim = raw.dim;
  aligned.doc_ids = corpus_ids;
  aligned.values.reserve(raw.values.size());
  for (const auto& id : corpus_ids) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw Error(ErrorKind::kUnknownId, entry.model + ": no vector for document " + id, id);
    const auto begin = raw.values.begin() + static_cast<std::ptrdiff_t>(it->second * raw.dim);
    aligned.values.insert(aligned.values.end(), begin, begin + static_cast<std::ptrdiff_t>(raw.dim));
  }
  return aligned;
}

Clustering kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (k == 0) throw Error(ErrorKind::kInvalidArgument, "k must be positive");
  if (k > x.rows()) {
    throw Error(ErrorKind::kInsufficientData,
                "k = " + std::to_string(k) + " exceeds the number of rows (" + std::to_string(x.rows()) + ")");
  }
  Rng rng(seed);
  Clustering best;
  best.k = k;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t run = 0; run < std::max<std::size_t>(options.n_init, 1); ++run) {
    Matrix init = kmeans_plus_plus(x, k, rng);
    LloydResult r = lloyd(x, std::move(init), options);
    best.restart_inertia.push_back(r.inertia);
    if (r.inertia < best.inertia) {
      best.inertia = r.inertia;
      best.assignments = std::move(r.assignments);
      best.centroids = std::move(r.centroids);
    }
  }
  return best;
}

double purity(const std::vector<std::size_t>& assignments, const std::vector<std::size_t>& labels) {
  if (assignments.size() != labels.size()) throw Error(ErrorKind::kDimensionMismatch, "assignments and labels differ in length");
  if (assignments.empty()) throw Error(ErrorKind::kInsufficientData, "purity needs at least one point");
  std::map<std::size_t, std::map<std::size_t, std::size_t>> table;
  for (std::size_t i = 0; i < labels.size(); ++i) ++table[assignments[i]][labels[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, c] : counts) best = std::max(best, c);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(labels.size());
}

std::vector<std::size_t> encode_labels(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, std::size_t> code;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(code.emplace(l, code.size()).first->second);
  return out;
}

double trustworthiness(const Matrix& high, const Matrix& low, std::size_t k) {
  const std::size_t n = high.rows();
  if (low.rows() != n) throw Error(ErrorKind::kDimensionMismatch, "high and low embeddings differ in rows");
  if (2 * k >= n) throw Error(ErrorKind::kInvalidArgument, "trustworthiness needs k < n / 2");
  double penalty = 0.0;
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> rank(n);
  std::vector<double> dh(n);
  std::vector<double> dl(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dh[j] = squared_distance(high.row(i), high.row(j));
      dl[j] = squared_distance(low.row(i), low.row(j));
    }
    auto by = [&](const std::vector<double>& d) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (a == i || b == i) return a == i && b != i;
        return d[a] < d[b];
      });
    };
    by(dh);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;  // self has rank 0
    by(dl);
    for (std::size_t r = 1; r <= k; ++r) {
      const std::size_t j = order[r];
      if (rank[j] > k) penalty += static_cast<double>(rank[j] - k);
    }
  }
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  return 1.0 - penalty * 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0));
}

OrderedJson FidelityReport::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["fulld_purity"] = fulld_purity;
  OrderedJson dims_json = OrderedJson::array();
  for (const auto& d : dims) {
    OrderedJson e = OrderedJson::object();
    e["dim"] = d.dim;
    e["mae"] = d.mae;
    e["max_ae"] = d.max_ae;
    e["reduced_purity"] = d.reduced_purity;
    dims_json.push_back(std::move(e));
  }
  j["dims"] = std::move(dims_json);
  OrderedJson rank = OrderedJson::array();
  for (std::size_t idx : ranking) rank.push_back(dims[idx].dim);
  j["ranking"] = std::move(rank);
  if (!per_seed.empty()) {
    OrderedJson seeds = OrderedJson::object();
    for (const auto& [model, by_dim] : per_seed) {
      OrderedJson m = OrderedJson::object();
      for (const auto& [dim, values] : by_dim) m[std::to_string(dim)] = values;
      seeds[model] = std::move(m);
    }
    j["per_seed_purity"] = std::move(seeds);
  }
  return j;
}

CsvTable FidelityReport::to_csv() const {
  CsvTable t;
  t.header = {"model", "fulld_purity"};
  for (const auto& d : dims) t.header.push_back("purity_" + std::to_string(d.dim) + "d");
  for (const auto& [model, full] : fulld_purity) {
    std::vector<std::string> row = {model, format_double(full)};
    for (const auto& d : dims) {
      auto it = d.reduced_purity.find(model);
      row.push_back(it == d.reduced_purity.end() ? "" : format_double(it->second));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

FidelityReport summarize_fidelity(const std::map<std::string, double>& fulld,
                                  const std::map<std::size_t, std::map<std::string, double>>& reduced) {
  if (fulld.empty()) throw Error(ErrorKind::kInsufficientData, "no FullD purities");
  FidelityReport report;
  report.fulld_purity = fulld;
  for (const auto& [dim, per_model] : reduced) {
    DimFidelity d;
    d.dim = dim;
    d.reduced_purity = per_model;
    double sum = 0.0;
    for (const auto& [model, full] : fulld) {
      auto it = per_model.find(model);
      if (it == per_model.end()) throw Error(ErrorKind::kInsufficientData, "no reduced purity for " + model, model);
      const double err = std::abs(it->second - full);
      sum += err;
      d.max_ae = std::max(d.max_ae, err);
    }
    d.mae = sum / static_cast<double>(fulld.size());
    report.dims.push_back(std::move(d));
  }
  report.ranking.resize(report.dims.size());
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = report.dims[a];
    const auto& db = report.dims[b];
    if (da.mae != db.mae) return da.mae < db.mae;
    return da.max_ae < db.max_ae;
  });
  return report;
}

double Ellipse::mahalanobis(double x, double y) const {
  const double dx = x - center[0];
  const double dy = y - center[1];
  const auto& s = inverse_covariance;
  const double q = dx * (s[0] * dx + s[1] * dy) + dy * (s[2] * dx + s[3] * dy);
  return std::sqrt(std::max(q, 0.0));
}

bool Ellipse::contains(double x, double y) const { return mahalanobis(x, y) <= radius * (1.0 + 1e-12); }

Ellipse coverage_ellipse(const Matrix& points, double fraction) {
  if (points.cols() != 2) throw Error(ErrorKind::kDimensionMismatch, "coverage ellipse needs 2D points");
  const std::size_t n = points.rows();
  if (n < 3) throw Error(ErrorKind::kInsufficientData, "coverage ellipse needs at least 3 points");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "fraction must be in (0, 1]");
  Ellipse e;
  for (std::size_t i = 0; i < n; ++i) {
    e.center[0] += points(i, 0);
    e.center[1] += points(i, 1);
  }
  e.center[0] /= static_cast<double>(n);
  e.center[1] /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = points(i, 0) - e.center[0];
    const double dy = points(i, 1) - e.center[1];
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double denom = static_cast<double>(n - 1);
  sxx /= denom;
  sxy /= denom;
  syy /= denom;
  const double det = sxx * syy - sxy * sxy;
  if (!(det > 1e-12 * std::max(sxx * syy, 1e-300))) {
    throw Error(ErrorKind::kUndefined, "points are collinear; covariance is singular");
  }
  e.inverse_covariance = {syy / det, -sxy / det, -sxy / det, sxx / det};

  const double tr = sxx + syy;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy));
  const double l1 = 0.5 * tr + disc;
  const double l2 = 0.5 * tr - disc;
  e.angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);

  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = e.mahalanobis(points(i, 0), points(i, 1));
  std::sort(m.begin(), m.end());
  const auto inside = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  e.radius = m[std::max<std::size_t>(inside, 1) - 1];
  e.semi_major = e.radius * std::sqrt(l1);
  e.semi_minor = e.radius * std::sqrt(std::max(l2, 0.0));
  return e;
}

}  // namespace stylespace
