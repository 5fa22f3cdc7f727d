#include "barn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace barn::data {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

double population_variance(const Vector& v) {
  if (v.size() == 0) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().mean();
}

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

Matrix uniform(Index rows, Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = u(rng);
  return M;
}

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

Synthetic finish(const SynthSpec& spec, Matrix X, Vector clean, Vector coefficients, Rng& rng) {
  Synthetic out;
  out.clean_y = clean;
  Vector y = spec.noiseless ? clean : add_noise(clean, spec.snr, rng);
  Matrix full = add_irrelevant(X, spec.pct_irrelevant, rng);
  if (coefficients.size() > 0) {
    out.coefficients = Vector::Zero(full.cols());
    out.coefficients.head(coefficients.size()) = coefficients;
  }
  out.data.name = spec.name.empty() ? to_string(spec.relationship) : spec.name;
  out.data.feature_names = default_names(full.cols());
  out.data.X = std::move(full);
  out.data.y = std::move(y);
  return out;
}

}  // namespace

MissingColumnError::MissingColumnError(const std::string& column,
                                       std::vector<std::string> available)
    : DataError("target column '" + column + "' not found; available columns: " +
                join(available)),
      available_(std::move(available)) {}

const std::vector<Index>& Split::indices(Part p) const {
  switch (p) {
    case Part::Train: return train;
    case Part::Validation: return validation;
    case Part::Test: return test;
  }
  return train;
}

Matrix select_rows(const Matrix& X, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = X.row(rows[i]);
  return out;
}

Vector select_rows(const Vector& y, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y(rows[i]);
  return out;
}

Matrix Dataset::features(Part p) const {
  if (!split) throw std::logic_error("dataset has no split");
  return select_rows(X, split->indices(p));
}

Vector Dataset::target(Part p) const {
  if (!split) throw std::logic_error("dataset has no split");
  return select_rows(y, split->indices(p));
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open data file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    for (auto f : split_fields(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw CsvParseError("empty CSV file: " + path.string(), line_no, 0);

  const auto it = std::find(header.begin(), header.end(), target_column);
  if (it == header.end()) throw MissingColumnError(target_column, header);
  const auto target_idx = static_cast<std::size_t>(it - header.begin());

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw CsvParseError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " +
                              std::to_string(fields.size()),
                          line_no, fields.size());
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = fields[c];
      const char* first = f.data();
      const char* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, row[c]);
      if (f.empty() || ec != std::errc() || ptr != last || !std::isfinite(row[c])) {
        throw CsvParseError("line " + std::to_string(line_no) + ", column '" + header[c] +
                                "': non-numeric value '" + std::string(f) + "'",
                            line_no, c + 1);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has a header but no data rows: " + path.string());

  Dataset ds;
  ds.name = path.stem().string();
  ds.target_name = target_column;
  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(header.size() - 1);
  ds.X.resize(n, d);
  ds.y.resize(n);
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_idx) ds.feature_names.push_back(header[c]);
  for (Index i = 0; i < n; ++i) {
    Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target_idx) {
        ds.y(i) = rows[static_cast<std::size_t>(i)][c];
      } else {
        ds.X(i, col++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write CSV: " + path.string());
  const auto names = ds.feature_names.size() == static_cast<std::size_t>(ds.features())
                         ? ds.feature_names
                         : default_names(ds.features());
  for (const auto& n : names) out << n << ',';
  out << ds.target_name << '\n';
  out.precision(17);
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index j = 0; j < ds.features(); ++j) out << ds.X(i, j) << ',';
    out << ds.y(i) << '\n';
  }
  if (!out) throw DataError("failed writing CSV: " + path.string());
}

Split make_split(Index n, const SplitFractions& f, Rng& rng) {
  if (f.train < 0 || f.validation < 0 || f.test < 0 ||
      std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be nonnegative and sum to 1");
  }
  if (n < 4) throw std::invalid_argument("need at least 4 rows to split");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  const double dn = static_cast<double>(n);
  const auto n_train = static_cast<std::size_t>(std::floor(dn * f.train + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(dn * f.validation + 1e-9));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                      perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Dataset split(Dataset ds, const SplitFractions& fractions, Rng& rng) {
  ds.split = make_split(ds.rows(), fractions, rng);
  return ds;
}

Dataset standardize_y(Dataset ds) {
  if (!ds.split) throw std::logic_error("standardize_y requires a split");
  const Vector y_train = ds.target(Part::Train);
  if (y_train.size() == 0) throw DataError("empty training split");
  const double mean = y_train.mean();
  const double sd = std::sqrt(population_variance(y_train));
  if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
    throw DataError("target has zero variance on the training rows");
  }
  ds.y = (ds.y.array() - mean) / sd;
  ds.y_stats = TargetStats{mean, sd};
  return ds;
}

PcaTransform fit_pca(const Matrix& X_train) {
  if (X_train.rows() < 1) throw DataError("cannot fit PCA on zero rows");
  PcaTransform pca;
  pca.mean = X_train.colwise().mean().transpose();
  const Matrix centered = X_train.rowwise() - pca.mean.transpose();
  const double denom = std::max<double>(1.0, static_cast<double>(X_train.rows() - 1));
  const Matrix cov = (centered.transpose() * centered) / denom;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Index d = cov.rows();
  pca.components.resize(d, d);
  pca.variances.resize(d);
  for (Index k = 0; k < d; ++k) {
    // Eigen returns ascending eigenvalues.
    Vector axis = eig.eigenvectors().col(d - 1 - k);
    Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0) axis = -axis;
    pca.components.col(k) = axis;
    pca.variances(k) = std::max(0.0, eig.eigenvalues()(d - 1 - k));
  }
  return pca;
}

Matrix apply_pca(const PcaTransform& pca, const Matrix& X, bool whiten) {
  require_size("pca: feature count", pca.mean.size(), X.cols());
  Matrix out = (X.rowwise() - pca.mean.transpose()) * pca.components;
  if (whiten) {
    for (Index k = 0; k < out.cols(); ++k) {
      const double v = pca.variances(k);
      if (v > 1e-12) out.col(k) /= std::sqrt(v);
    }
  }
  return out;
}

Dataset pca_fit_transform(Dataset ds, bool whiten) {
  if (!ds.split) throw std::logic_error("pca_fit_transform requires a split");
  PcaTransform pca = fit_pca(ds.features(Part::Train));
  ds.X = apply_pca(pca, ds.X, whiten);
  ds.feature_names = default_names(ds.X.cols());
  for (auto& n : ds.feature_names) n = "pc" + n.substr(1);
  ds.pca = std::move(pca);
  return ds;
}

// ---------------------------------------------------------------------------

std::string to_string(Relationship r) {
  switch (r) {
    case Relationship::Linear: return "linear";
    case Relationship::Cluster: return "cluster";
    case Relationship::Forest: return "forest";
    case Relationship::Friedman1: return "friedman1";
    case Relationship::Friedman2: return "friedman2";
    case Relationship::Friedman3: return "friedman3";
  }
  return "unknown";
}

Relationship parse_relationship(const std::string& name) {
  for (auto r : {Relationship::Linear, Relationship::Cluster, Relationship::Forest,
                 Relationship::Friedman1, Relationship::Friedman2, Relationship::Friedman3}) {
    if (to_string(r) == name) return r;
  }
  if (name == "f1") return Relationship::Friedman1;
  if (name == "f2") return Relationship::Friedman2;
  if (name == "f3") return Relationship::Friedman3;
  throw std::invalid_argument("unknown relationship '" + name + "'");
}

namespace {
int arity(Relationship r) {
  switch (r) {
    case Relationship::Friedman1: return 5;
    case Relationship::Friedman2:
    case Relationship::Friedman3: return 4;
    default: return 1;
  }
}
}  // namespace

void SynthSpec::validate() const {
  if (!noiseless && !(snr > 0.0)) throw std::invalid_argument("snr must be > 0");
  if (n_relevant < arity(relationship)) {
    throw std::invalid_argument(to_string(relationship) + " needs at least " +
                                std::to_string(arity(relationship)) + " relevant features, got " +
                                std::to_string(n_relevant));
  }
  if (!(pct_irrelevant >= 0.0)) throw std::invalid_argument("pct_irrelevant must be >= 0");
  if (n_points < 1) throw std::invalid_argument("n_points must be >= 1");
  if ((relationship == Relationship::Cluster || relationship == Relationship::Forest) &&
      (n_clusters < 1 || n_points < n_clusters)) {
    throw std::invalid_argument("cluster generators need 1 <= n_clusters <= n_points");
  }
  if (relationship == Relationship::Forest && (forest_trees < 1 || forest_depth < 0))
    throw std::invalid_argument("forest needs >= 1 tree and depth >= 0");
}

SynthSpec random_benchmark_spec(std::uint64_t seed) {
  SynthSpec s;
  s.name = "random";
  s.relationship = Relationship::Linear;
  s.n_relevant = 8;
  s.pct_irrelevant = 0.25;
  s.n_points = 1000;
  s.snr = 200.0;
  s.seed = seed;
  return s;
}

Vector add_noise(const Vector& y_clean, double snr, Rng& rng) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be > 0");
  const double var = population_variance(y_clean);
  if (var <= 0.0) return y_clean;
  std::normal_distribution<double> noise(0.0, std::sqrt(var / snr));
  Vector y = y_clean;
  for (Index i = 0; i < y.size(); ++i) y(i) += noise(rng);
  return y;
}

Matrix add_irrelevant(const Matrix& X, double pct, Rng& rng) {
  if (!(pct >= 0.0)) throw std::invalid_argument("pct_irrelevant must be >= 0");
  const auto extra = static_cast<Index>(std::lround(pct * static_cast<double>(X.cols())));
  if (extra == 0) return X;
  Matrix out(X.rows(), X.cols() + extra);
  out.leftCols(X.cols()) = X;
  out.rightCols(extra) = standard_normal(X.rows(), extra, rng);
  return out;
}

std::vector<Index> assign_clusters(const Matrix& X, const Matrix& centers) {
  require_size("assign_clusters: feature count", centers.cols(), X.cols());
  std::vector<Index> out(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) {
    Index best = 0;
    (centers.rowwise() - X.row(i)).rowwise().squaredNorm().minCoeff(&best);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double friedman1(const double* x) {
  constexpr double pi = 3.14159265358979323846;
  return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] +
         5.0 * x[4];
}

double friedman2(const double* x) {
  const double inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
  return std::sqrt(x[0] * x[0] + inner * inner);
}

double friedman3(const double* x) {
  const double inner = x[1] * x[2] - 1.0 / (x[1] * x[3]);
  return std::atan(inner / x[0]);
}

Synthetic gen_linear(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Matrix X = standard_normal(spec.n_points, spec.n_relevant, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector beta(spec.n_relevant);
  for (Index j = 0; j < beta.size(); ++j) beta(j) = normal(rng);
  Vector clean = X * beta;
  return finish(spec, std::move(X), std::move(clean), std::move(beta), rng);
}

namespace {

struct ClusterDraw {
  Matrix X;
  Vector level;
};

ClusterDraw draw_clusters(const SynthSpec& spec, Rng& rng) {
  ClusterDraw out;
  out.X = uniform(spec.n_points, spec.n_relevant, 0.0, 1.0, rng);
  const Matrix centers = uniform(spec.n_clusters, spec.n_relevant, 0.0, 1.0, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector levels(spec.n_clusters);
  for (Index k = 0; k < levels.size(); ++k) levels(k) = normal(rng);
  const auto idx = assign_clusters(out.X, centers);
  out.level.resize(spec.n_points);
  for (Index i = 0; i < out.level.size(); ++i) out.level(i) = levels(idx[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

Synthetic gen_cluster(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  auto draw = draw_clusters(spec, rng);
  return finish(spec, std::move(draw.X), std::move(draw.level), Vector(), rng);
}

Synthetic gen_forest(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  auto draw = draw_clusters(spec, rng);
  ForestConfig fc;
  fc.trees = spec.forest_trees;
  fc.max_depth = spec.forest_depth;
  fc.bootstrap = spec.forest_bootstrap;
  const auto forest = RandomForest::fit(draw.X, draw.level, fc, rng);
  Vector clean = forest.predict(draw.X);
  return finish(spec, std::move(draw.X), std::move(clean), Vector(), rng);
}

Synthetic gen_friedman(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Matrix X = uniform(spec.n_points, spec.n_relevant, 0.0, 1.0, rng);
  if (spec.relationship != Relationship::Friedman1) {
    const auto& r = spec.friedman_ranges;
    const std::array<std::array<double, 2>, 4> ranges{r.x1, r.x2, r.x3, r.x4};
    for (Index j = 0; j < 4; ++j) {
      X.col(j) = (ranges[j][0] + (ranges[j][1] - ranges[j][0]) * X.col(j).array()).matrix();
    }
  }
  double (*fn)(const double*) = nullptr;
  switch (spec.relationship) {
    case Relationship::Friedman1: fn = friedman1; break;
    case Relationship::Friedman2: fn = friedman2; break;
    case Relationship::Friedman3: fn = friedman3; break;
    default: throw std::invalid_argument("gen_friedman needs a Friedman relationship");
  }
  Vector clean(X.rows());
  std::array<double, 5> row{};
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < std::min<Index>(5, X.cols()); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
    clean(i) = fn(row.data());
  }
  return finish(spec, std::move(X), std::move(clean), Vector(), rng);
}

Synthetic generate(const SynthSpec& spec) {
  switch (spec.relationship) {
    case Relationship::Linear: return gen_linear(spec);
    case Relationship::Cluster: return gen_cluster(spec);
    case Relationship::Forest: return gen_forest(spec);
    default: return gen_friedman(spec);
  }
}

// ---------------------------------------------------------------------------
// CART

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const Vector& y, const ForestConfig& cfg, Rng& rng)
      : X_(X), y_(y), cfg_(cfg), rng_(rng) {
    const auto d = static_cast<int>(X.cols());
    per_split_ = cfg.features_per_split > 0
                     ? std::min(cfg.features_per_split, d)
                     : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d)))));
    features_.resize(static_cast<std::size_t>(d));
    std::iota(features_.begin(), features_.end(), 0);
  }

  RandomForest::Tree build(std::vector<Index> rows) {
    tree_.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<Index>& rows, int depth) {
    const int id = static_cast<int>(tree_.size());
    tree_.emplace_back();
    double sum = 0.0;
    for (auto r : rows) sum += y_(r);
    tree_[id].value = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
    if (depth >= cfg_.max_depth || rows.size() < 2 * static_cast<std::size_t>(cfg_.min_leaf))
      return id;

    // Partial Fisher-Yates picks the candidate features.
    for (int k = 0; k < per_split_; ++k) {
      std::uniform_int_distribution<int> pick(k, static_cast<int>(features_.size()) - 1);
      std::swap(features_[static_cast<std::size_t>(k)], features_[static_cast<std::size_t>(pick(rng_))]);
    }

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<Index> order = rows;
    const double n = static_cast<double>(rows.size());
    for (int k = 0; k < per_split_; ++k) {
      const int f = features_[static_cast<std::size_t>(k)];
      std::sort(order.begin(), order.end(), [&](Index a, Index b) {
        return X_(a, f) < X_(b, f);
      });
      double left_sum = 0.0;
      double left_n = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left_sum += y_(order[i]);
        left_n += 1.0;
        const double a = X_(order[i], f);
        const double b = X_(order[i + 1], f);
        if (!(a < b)) continue;
        if (left_n < cfg_.min_leaf || n - left_n < cfg_.min_leaf) continue;
        const double right_sum = sum - left_sum;
        // SSE reduction up to a constant.
        const double gain = left_sum * left_sum / left_n + right_sum * right_sum / (n - left_n) -
                            sum * sum / n;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (a + b);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<Index> left;
    std::vector<Index> right;
    for (auto r : rows) (X_(r, best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_[id].feature = best_feature;
    tree_[id].threshold = best_threshold;
    tree_[id].left = l;
    tree_[id].right = r;
    return id;
  }

  const Matrix& X_;
  const Vector& y_;
  const ForestConfig& cfg_;
  Rng& rng_;
  int per_split_ = 1;
  std::vector<int> features_;
  RandomForest::Tree tree_;
};

RandomForest RandomForest::fit(const Matrix& X, const Vector& y, const ForestConfig& cfg,
                               Rng& rng) {
  require_size("forest: target length", X.rows(), y.size());
  if (X.rows() < 1) throw std::invalid_argument("forest needs at least one row");
  if (cfg.trees < 1 || cfg.max_depth < 0 || cfg.min_leaf < 1)
    throw std::invalid_argument("invalid forest configuration");
  RandomForest forest;
  TreeBuilder builder(X, y, cfg, rng);
  const auto n = X.rows();
  std::uniform_int_distribution<Index> pick(0, n - 1);
  for (int t = 0; t < cfg.trees; ++t) {
    std::vector<Index> rows(static_cast<std::size_t>(n));
    if (cfg.bootstrap) {
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Index{0});
    }
    forest.trees_.push_back(builder.build(std::move(rows)));
  }
  return forest;
}

double RandomForest::predict_tree(const Tree& tree, const Matrix& X, Index row) {
  int node = 0;
  while (tree[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& nd = tree[static_cast<std::size_t>(node)];
    node = X(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return tree[static_cast<std::size_t>(node)].value;
}

Vector RandomForest::predict(const Matrix& X) const {
  Vector out = Vector::Zero(X.rows());
  for (const auto& tree : trees_)
    for (Index i = 0; i < X.rows(); ++i) out(i) += predict_tree(tree, X, i);
  return out / static_cast<double>(trees_.size());
}

}  // namespace barn::data
