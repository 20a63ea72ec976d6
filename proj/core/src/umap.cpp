#include "stylespace/umap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "stylespace/error.hpp"
#include "stylespace/log.hpp"
#include "stylespace/rng.hpp"

namespace stylespace {
namespace {

constexpr double kMinKDistScale = 1e-3;
constexpr double kSmoothTolerance = 1e-5;
constexpr int kBisectionIterations = 64;
constexpr double kGradientClip = 4.0;

double clip(double v) { return std::clamp(v, -kGradientClip, kGradientClip); }

struct Knn {
  std::vector<std::vector<std::uint32_t>> index;  // includes self first
  std::vector<std::vector<double>> dist;
};

Knn exact_knn(const Matrix& x, std::size_t k) {
  const std::size_t n = x.rows();
  Knn knn;
  knn.index.resize(n);
  knn.dist.resize(n);
  std::vector<double> d(n);
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[j] = std::sqrt(squared_distance(x.row(i), x.row(j)));
    std::iota(order.begin(), order.end(), 0u);
    // Self first, then by distance, ties by index.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if ((a == i) != (b == i)) return a == i;
                        if (d[a] != d[b]) return d[a] < d[b];
                        return a < b;
                      });
    knn.index[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    knn.dist[i].resize(k);
    for (std::size_t j = 0; j < k; ++j) knn.dist[i][j] = d[knn.index[i][j]];
  }
  return knn;
}

void smooth_knn(const Knn& knn, std::vector<double>& sigma, std::vector<double>& rho) {
  const std::size_t n = knn.dist.size();
  const std::size_t k = knn.dist.front().size();
  const double target = std::log2(static_cast<double>(k));
  double global_mean = 0.0;
  for (const auto& row : knn.dist) global_mean += std::accumulate(row.begin(), row.end(), 0.0);
  global_mean /= static_cast<double>(n * k);
  sigma.assign(n, 1.0);
  rho.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = knn.dist[i];
    for (std::size_t j = 1; j < k; ++j) {
      if (row[j] > 0.0) {
        rho[i] = row[j];
        break;
      }
    }
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double mid = 1.0;
    for (int it = 0; it < kBisectionIterations; ++it) {
      double psum = 0.0;
      for (std::size_t j = 1; j < k; ++j) {
        const double d = row[j] - rho[i];
        psum += d > 0.0 ? std::exp(-d / mid) : 1.0;
      }
      if (std::abs(psum - target) < kSmoothTolerance) break;
      if (psum > target) {
        hi = mid;
        mid = 0.5 * (lo + hi);
      } else {
        lo = mid;
        mid = std::isinf(hi) ? mid * 2.0 : 0.5 * (lo + hi);
      }
    }
    const double mean_row = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(k);
    const double floor = kMinKDistScale * (rho[i] > 0.0 ? mean_row : global_mean);
    sigma[i] = std::max(mid, floor);
  }
}

}  // namespace

void UmapParams::validate() const {
  if (n_neighbors < 2) throw Error(ErrorKind::kInvalidArgument, "n_neighbors must be at least 2");
  if (!(min_dist >= 0.0) || !(spread > 0.0) || min_dist > spread) {
    throw Error(ErrorKind::kInvalidArgument, "need 0 <= min_dist <= spread");
  }
  if (n_epochs == 0) throw Error(ErrorKind::kInvalidArgument, "n_epochs must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::kInvalidArgument, "learning_rate must be positive");
}

OrderedJson UmapParams::to_json() const {
  OrderedJson j = OrderedJson::object();
  j["n_neighbors"] = n_neighbors;
  j["min_dist"] = min_dist;
  j["spread"] = spread;
  j["n_epochs"] = n_epochs;
  j["learning_rate"] = learning_rate;
  j["negative_sample_rate"] = negative_sample_rate;
  j["repulsion_strength"] = repulsion_strength;
  j["metric"] = "euclidean";
  j["init"] = "spectral";
  return j;
}

std::pair<double, double> find_ab_params(double spread, double min_dist) {
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints);
  std::vector<double> ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * spread * i / (kPoints - 1);
    ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }
  auto cost = [&](double a, double b) {
    double c = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      c += r * r;
    }
    return c;
  };
  // Levenberg-Marquardt on two parameters.
  double a = 1.0;
  double b = 1.0;
  double lambda = 1e-3;
  double current = cost(a, b);
  for (int it = 0; it < 500; ++it) {
    double jtj[2][2] = {{0, 0}, {0, 0}};
    double jtr[2] = {0, 0};
    for (int i = 0; i < kPoints; ++i) {
      if (xs[i] <= 0.0) continue;
      const double p = std::pow(xs[i], 2.0 * b);
      const double den = 1.0 + a * p;
      const double r = 1.0 / den - ys[i];
      const double da = -p / (den * den);
      const double db = -a * p * 2.0 * std::log(xs[i]) / (den * den);
      jtj[0][0] += da * da;
      jtj[0][1] += da * db;
      jtj[1][1] += db * db;
      jtr[0] += da * r;
      jtr[1] += db * r;
    }
    jtj[1][0] = jtj[0][1];
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      const double m00 = jtj[0][0] * (1.0 + lambda);
      const double m11 = jtj[1][1] * (1.0 + lambda);
      const double det = m00 * m11 - jtj[0][1] * jtj[1][0];
      if (det == 0.0) break;
      const double sa = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
      const double sb = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
      const double na = a + sa;
      const double nb = b + sb;
      const double next = (na > 0.0 && nb > 0.0) ? cost(na, nb) : std::numeric_limits<double>::infinity();
      if (next < current) {
        const double rel = (current - next) / std::max(current, 1e-300);
        a = na;
        b = nb;
        current = next;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (rel < 1e-14) return {a, b};
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return {a, b};
}

UmapGraph UmapGraph::build(const Matrix& x, const UmapParams& params) {
  params.validate();
  const std::size_t n = x.rows();
  if (n <= params.n_neighbors) {
    throw Error(ErrorKind::kInsufficientData,
                "UMAP needs more rows (" + std::to_string(n) + ") than n_neighbors (" +
                    std::to_string(params.n_neighbors) + ")");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNonFinite, "UMAP input contains non-finite values");
  }
  UmapGraph g;
  g.n_ = n;
  double spread = 0.0;
  for (std::size_t i = 1; i < n && spread == 0.0; ++i) spread = squared_distance(x.row(0), x.row(i));
  if (spread == 0.0) {
    g.degenerate_ = true;
    return g;
  }

  const Knn knn = exact_knn(x, params.n_neighbors);
  smooth_knn(knn, g.sigma_, g.rho_);

  // Directed memberships, then fuzzy union a + b - ab.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < params.n_neighbors; ++j) {
      const std::uint32_t t = knn.index[i][j];
      if (t == i) continue;
      const double d = knn.dist[i][j] - g.rho_[i];
      w(static_cast<Eigen::Index>(i), t) = d <= 0.0 ? 1.0 : std::exp(-d / g.sigma_[i]);
    }
  }
  const Eigen::MatrixXd wt = w.transpose();
  w = (w + wt - w.cwiseProduct(wt)).eval();

  double max_w = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) max_w = std::max(max_w, w(i, j));
  }
  const double cut = max_w / static_cast<double>(params.n_epochs);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (w(i, j) <= 0.0) continue;
      if (w(i, j) < cut) {
        w(i, j) = 0.0;
        continue;
      }
      g.head_.push_back(static_cast<std::uint32_t>(i));
      g.tail_.push_back(static_cast<std::uint32_t>(j));
      g.weight_.push_back(w(i, j));
    }
  }

  // Normalised Laplacian I - D^-1/2 W D^-1/2; its smallest eigenvectors
  // (skipping the trivial one) give the initial layout.
  Eigen::VectorXd deg = w.rowwise().sum();
  Eigen::VectorXd inv_sqrt = deg.unaryExpr([](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
  Eigen::MatrixXd lap = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() == Eigen::Success) {
    const std::size_t keep = std::min(n, kMaxUmapDim + 1);
    g.eigvecs_ = Matrix(n, keep);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < keep; ++c) {
        g.eigvecs_(i, c) = solver.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      }
    }
  }
  return g;
}

Matrix UmapGraph::spectral(std::size_t dim) const {
  if (eigvecs_.empty() || dim + 1 > eigvecs_.cols()) return {};
  Matrix out(n_, dim);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      double v = eigvecs_(i, c + 1);
      out(i, c) = v;
    }
  }
  // Eigenvector signs are arbitrary; fix them so the first nonzero entry is positive.
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < n_; ++i) {
      if (std::abs(out(i, c)) > 1e-12) {
        if (out(i, c) < 0.0) {
          for (std::size_t r = 0; r < n_; ++r) out(r, c) = -out(r, c);
        }
        break;
      }
    }
  }
  return out;
}

Matrix umap_embed(const UmapGraph& graph, std::size_t target_dim, std::uint64_t seed, const UmapParams& params) {
  if (target_dim == 0 || target_dim > kMaxUmapDim) {
    throw Error(ErrorKind::kInvalidArgument, "target_dim must be in [1, " + std::to_string(kMaxUmapDim) + "]");
  }
  const std::size_t n = graph.size();
  Rng rng(Rng::derive(seed, 0));
  if (graph.degenerate()) {
    log::warn("umap.degenerate_input", {{"rows", n}, {"seed", seed}});
    Matrix out(n, target_dim);
    for (auto& v : out.data()) v = rng.normal(0.0, 1e-4);
    return out;
  }

  Matrix emb = graph.spectral(target_dim);
  if (emb.empty()) {
    emb = Matrix(n, target_dim);
    for (auto& v : emb.data()) v = rng.uniform(-10.0, 10.0);
  } else {
    double max_abs = 0.0;
    for (double v : emb.data()) max_abs = std::max(max_abs, std::abs(v));
    const double expansion = max_abs > 0.0 ? 10.0 / max_abs : 1.0;
    for (auto& v : emb.data()) v = v * expansion + rng.normal(0.0, 1e-4);
  }
  for (std::size_t c = 0; c < target_dim; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, emb(i, c));
      hi = std::max(hi, emb(i, c));
    }
    const double range = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < n; ++i) emb(i, c) = 10.0 * (emb(i, c) - lo) / range;
  }

  const auto [a, b] = find_ab_params(params.spread, params.min_dist);
  const auto& head = graph.heads();
  const auto& tail = graph.tails();
  const auto& w = graph.weights();
  const std::size_t edges = w.size();
  const double max_w = edges ? *std::max_element(w.begin(), w.end()) : 1.0;
  std::vector<double> eps(edges);
  for (std::size_t e = 0; e < edges; ++e) eps[e] = max_w / w[e];
  const double neg_rate = static_cast<double>(std::max<std::size_t>(params.negative_sample_rate, 1));
  std::vector<double> eps_neg(edges);
  for (std::size_t e = 0; e < edges; ++e) eps_neg[e] = eps[e] / neg_rate;
  std::vector<double> next_sample = eps;
  std::vector<double> next_negative = eps_neg;
  const bool sample_negatives = params.negative_sample_rate > 0;

  Rng neg_rng(Rng::derive(seed, 1));
  const double gamma = params.repulsion_strength;
  double alpha = params.learning_rate;
  const std::size_t dim = target_dim;
  for (std::size_t epoch = 0; epoch < params.n_epochs; ++epoch) {
    const auto ep = static_cast<double>(epoch);
    for (std::size_t e = 0; e < edges; ++e) {
      if (next_sample[e] > ep) continue;
      auto current = emb.row(head[e]);
      auto other = emb.row(tail[e]);
      const double d2 = squared_distance(current, other);
      double coeff = 0.0;
      if (d2 > 0.0) {
        coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const double grad = clip(coeff * (current[d] - other[d]));
        current[d] += grad * alpha;
        other[d] -= grad * alpha;
      }
      next_sample[e] += eps[e];
      if (!sample_negatives) continue;
      const auto n_neg = static_cast<std::size_t>((ep - next_negative[e]) / eps_neg[e]);
      for (std::size_t p = 0; p < n_neg; ++p) {
        const auto k = static_cast<std::size_t>(neg_rng.below(n));
        if (k == head[e]) continue;
        auto neg = emb.row(k);
        const double nd2 = squared_distance(current, neg);
        double ncoeff = 0.0;
        if (nd2 > 0.0) {
          ncoeff = 2.0 * gamma * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0));
        }
        for (std::size_t d = 0; d < dim; ++d) {
          const double grad = ncoeff > 0.0 ? clip(ncoeff * (current[d] - neg[d])) : kGradientClip;
          current[d] += grad * alpha;
        }
      }
      next_negative[e] += static_cast<double>(n_neg) * eps_neg[e];
    }
    alpha = params.learning_rate * (1.0 - static_cast<double>(epoch + 1) / static_cast<double>(params.n_epochs));
  }
  return emb;
}

Matrix umap_reduce(const Matrix& x, std::size_t target_dim, std::uint64_t seed, const UmapParams& params) {
  return umap_embed(UmapGraph::build(x, params), target_dim, seed, params);
}

ReducedEmbedding umap_reduce(const EmbeddingSet& set, std::size_t target_dim, std::uint64_t seed,
                             const UmapParams& params) {
  return {set.model_name, target_dim, seed, set.doc_ids, umap_reduce(set.to_matrix(), target_dim, seed, params)};
}

std::vector<ReducedEmbedding> reduce_all(const EmbeddingSet& set, const std::vector<std::size_t>& dims,
                                         std::size_t seeds, const UmapParams& params, std::size_t threads) {
  const UmapGraph graph = UmapGraph::build(set.to_matrix(), params);
  std::vector<ReducedEmbedding> out(dims.size() * seeds);
  detail::parallel_for(out.size(), threads, [&](std::size_t t) {
    const std::size_t dim = dims[t / seeds];
    const std::size_t seed = t % seeds;
    out[t] = {set.model_name, dim, seed, set.doc_ids, umap_embed(graph, dim, seed, params)};
  });
  return out;
}

namespace {

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

void write_reductions(const std::filesystem::path& dir, const std::vector<ReducedEmbedding>& reductions,
                      const UmapParams& params) {
  std::filesystem::create_directories(dir);
  OrderedJson list = OrderedJson::array();
  for (const auto& r : reductions) {
    const std::string stem = safe_name(r.model_name) + "." + std::to_string(r.target_dim) + "d.seed" + std::to_string(r.seed);
    const auto set = EmbeddingSet::from_matrix(r.model_name, r.doc_ids, r.points);
    write_embedding_binary(set, dir / (stem + ".json"), dir / (stem + ".f32"));
    OrderedJson e = OrderedJson::object();
    e["model"] = r.model_name;
    e["dim"] = r.target_dim;
    e["seed"] = r.seed;
    e["path"] = stem + ".json";
    list.push_back(std::move(e));
  }
  OrderedJson manifest = OrderedJson::object();
  manifest["umap"] = params.to_json();
  manifest["reductions"] = std::move(list);
  write_json(dir / "reductions.json", manifest);
}

std::vector<ReducedEmbedding> read_reductions(const std::filesystem::path& manifest_path) {
  const Json j = read_json(manifest_path);
  std::vector<ReducedEmbedding> out;
  try {
    for (const auto& e : j.at("reductions")) {
      const auto set = read_embedding_binary(manifest_path.parent_path() / e.at("path").get<std::string>());
      ReducedEmbedding r;
      r.model_name = e.at("model").get<std::string>();
      r.target_dim = e.at("dim").get<std::size_t>();
      r.seed = e.at("seed").get<std::uint64_t>();
      if (set.dim != r.target_dim) throw Error(ErrorKind::kDimensionMismatch, "reduction dim differs from its header", r.model_name);
      r.doc_ids = set.doc_ids;
      r.points = set.to_matrix();
      out.push_back(std::move(r));
    }
  } catch (const Json::exception& ex) {
    throw Error(ErrorKind::kSchema, manifest_path.string() + ": " + ex.what(), manifest_path.string());
  }
  return out;
}

FidelityReport reduction_fidelity(const std::vector<EmbeddingSet>& sets, const std::vector<std::size_t>& labels,
                                  const FidelityOptions& options, const std::vector<ReducedEmbedding>& precomputed) {
  if (sets.empty()) throw Error(ErrorKind::kInsufficientData, "no embedding sets");
  if (options.seeds == 0) throw Error(ErrorKind::kInvalidArgument, "seeds must be positive");
  std::map<std::tuple<std::string, std::size_t, std::uint64_t>, const ReducedEmbedding*> given;
  for (const auto& r : precomputed) given[{r.model_name, r.target_dim, r.seed}] = &r;

  std::map<std::string, double> fulld;
  std::vector<double> full_values(sets.size());
  detail::parallel_for(sets.size(), options.threads, [&](std::size_t m) {
    if (sets[m].rows() != labels.size()) throw Error(ErrorKind::kCountMismatch, "labels do not match rows", sets[m].model_name);
    full_values[m] = purity(kmeans(sets[m].to_matrix(), options.k, 0).assignments, labels);
  });
  for (std::size_t m = 0; m < sets.size(); ++m) fulld[sets[m].model_name] = full_values[m];

  // Graphs are only built for models with at least one missing projection.
  std::vector<std::optional<UmapGraph>> graphs(sets.size());
  detail::parallel_for(sets.size(), options.threads, [&](std::size_t m) {
    for (std::size_t dim : options.dims) {
      for (std::size_t s = 0; s < options.seeds; ++s) {
        if (!given.count({sets[m].model_name, dim, s})) {
          graphs[m] = UmapGraph::build(sets[m].to_matrix(), options.umap);
          return;
        }
      }
    }
  });

  const std::size_t per_model = options.dims.size() * options.seeds;
  std::vector<double> purities(sets.size() * per_model);
  detail::parallel_for(purities.size(), options.threads, [&](std::size_t t) {
    const std::size_t m = t / per_model;
    const std::size_t dim = options.dims[(t % per_model) / options.seeds];
    const std::size_t seed = t % options.seeds;
    auto it = given.find({sets[m].model_name, dim, seed});
    Matrix points = it != given.end() ? it->second->points : umap_embed(*graphs[m], dim, seed, options.umap);
    if (points.rows() != labels.size()) throw Error(ErrorKind::kCountMismatch, "reduction rows differ from labels", sets[m].model_name);
    purities[t] = purity(kmeans(points, options.k, 0).assignments, labels);
  });

  std::map<std::size_t, std::map<std::string, double>> reduced;
  std::map<std::string, std::map<std::size_t, std::vector<double>>> per_seed;
  for (std::size_t m = 0; m < sets.size(); ++m) {
    for (std::size_t di = 0; di < options.dims.size(); ++di) {
      const auto begin = purities.begin() + static_cast<std::ptrdiff_t>(m * per_model + di * options.seeds);
      std::vector<double> values(begin, begin + static_cast<std::ptrdiff_t>(options.seeds));
      reduced[options.dims[di]][sets[m].model_name] =
          std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(options.seeds);
      per_seed[sets[m].model_name][options.dims[di]] = std::move(values);
    }
  }
  FidelityReport report = summarize_fidelity(fulld, reduced);
  report.per_seed = std::move(per_seed);
  return report;
}

}  // namespace stylespace
