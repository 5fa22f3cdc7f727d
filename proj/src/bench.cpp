#include "barn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace barn::bench {

using data::Part;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Barn: return "barn";
    case Method::BarnCv: return "barn-cv";
    case Method::Ols: return "ols";
    case Method::BigNN: return "bignn";
    case Method::BigNNCv: return "bignn-cv";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::Barn, Method::BarnCv, Method::Ols, Method::BigNN, Method::BigNNCv})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected barn, barn-cv, ols, bignn, bignn-cv)");
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    auto item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("no methods given");
  return out;
}

// ---------------------------------------------------------------------------

Metrics metrics(const Vector& y_true, const Vector& y_pred) {
  require_size("metrics: prediction length", y_true.size(), y_pred.size());
  if (y_true.size() == 0) throw std::invalid_argument("metrics: empty input");
  const double sse = (y_true - y_pred).squaredNorm();
  Metrics m;
  m.rmse = std::sqrt(sse / static_cast<double>(y_true.size()));
  const double sst = (y_true.array() - y_true.mean()).square().sum();
  if (sst > 0.0) m.r2 = 1.0 - sse / sst;
  return m;
}

std::vector<double> relative_rmse(const std::vector<double>& rmse) {
  double best = std::numeric_limits<double>::infinity();
  for (double r : rmse)
    if (std::isfinite(r)) best = std::min(best, r);
  std::vector<double> out;
  out.reserve(rmse.size());
  for (double r : rmse) {
    if (!std::isfinite(r) || !std::isfinite(best)) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (r == best) {
      out.push_back(1.0);  // also covers best == 0
    } else {
      out.push_back(r / best);
    }
  }
  return out;
}

double pooled_std(const std::vector<std::vector<double>>& groups) {
  double ss = 0.0;
  double dof = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("pooled_std: empty group");
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    for (double x : g) ss += (x - mean) * (x - mean);
    dof += static_cast<double>(g.size()) - 1.0;
  }
  if (dof <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(ss / dof);
}

// ---------------------------------------------------------------------------

namespace {
thread_local bool tl_in_parallel = false;
}

int thread_budget() {
  if (const char* env = std::getenv("BARN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (threads <= 1 || n == 1 || tl_in_parallel) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    tl_in_parallel = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto count = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------

std::vector<sampler::SamplerConfig> CvGrid::barn_grid(const sampler::SamplerConfig& base) {
  std::vector<sampler::SamplerConfig> grid;
  for (int n : {10, 20})
    for (double lambda : {1.0, 2.0})
      for (auto act : {nn::Activation::Sigmoid, nn::Activation::ReLU}) {
        auto c = base;
        c.n_networks = n;
        c.prior_mean = lambda;
        c.activation = act;
        grid.push_back(c);
      }
  return grid;
}

std::vector<baselines::BigNNConfig> CvGrid::bignn_grid(const baselines::BigNNConfig& base) {
  std::vector<baselines::BigNNConfig> grid;
  for (int mult : {1, 2, 10})
    for (double lr : {1e-5, 1e-4})
      for (int epochs : {2000, 4000})
        for (auto act : {nn::Activation::Sigmoid, nn::Activation::ReLU}) {
          auto c = base;
          c.neuron_multiplier = mult;
          c.learning_rate = lr;
          c.epochs = epochs;
          c.activation = act;
          grid.push_back(c);
        }
  return grid;
}

CvGrid CvGrid::standard(const sampler::SamplerConfig& barn_base,
                        const baselines::BigNNConfig& bignn_base) {
  return {barn_grid(barn_base), bignn_grid(bignn_base)};
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string describe(const sampler::SamplerConfig& c) {
  return "n_networks=" + std::to_string(c.n_networks) + ";prior_mean=" + num(c.prior_mean) +
         ";activation=" + std::string(nn::to_string(c.activation));
}

std::string describe(const baselines::BigNNConfig& c) {
  return "multiplier=" + std::to_string(c.neuron_multiplier) + ";lr=" + num(c.learning_rate) +
         ";epochs=" + std::to_string(c.epochs) + ";activation=" +
         std::string(nn::to_string(c.activation));
}

std::vector<std::vector<Index>> make_folds(Index n, int k, Rng& rng) {
  if (k < 2) throw std::invalid_argument("need at least 2 folds");
  if (n < k) throw std::invalid_argument("fewer rows than folds");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  const Index base = n / k;
  const Index extra = n % k;
  Index pos = 0;
  for (Index f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    auto& fold = folds[static_cast<std::size_t>(f)];
    fold.assign(perm.begin() + pos, perm.begin() + pos + size);
    std::sort(fold.begin(), fold.end());
    pos += size;
  }
  return folds;
}

CvOutcome cross_validate(std::size_t n_configs, const std::vector<Index>& train_rows, int k,
                         Rng& rng, const FoldScore& score, int threads) {
  if (n_configs == 0) throw std::invalid_argument("cross_validate: empty grid");
  const auto folds = make_folds(static_cast<Index>(train_rows.size()), k, rng);
  std::vector<std::vector<Index>> fit_rows(folds.size());
  std::vector<std::vector<Index>> holdout_rows(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> held(train_rows.size(), false);
    for (Index p : folds[f]) {
      held[static_cast<std::size_t>(p)] = true;
      holdout_rows[f].push_back(train_rows[static_cast<std::size_t>(p)]);
    }
    for (std::size_t p = 0; p < train_rows.size(); ++p)
      if (!held[p]) fit_rows[f].push_back(train_rows[p]);
  }

  const std::size_t cells = n_configs * folds.size();
  std::vector<double> cell_rmse(cells, std::numeric_limits<double>::infinity());
  parallel_for(cells, threads, [&](std::size_t cell) {
    const std::size_t c = cell / folds.size();
    const std::size_t f = cell % folds.size();
    double r = std::numeric_limits<double>::infinity();
    try {
      r = score(c, fit_rows[f], holdout_rows[f]);
    } catch (const std::exception&) {
      // A failing configuration simply loses.
    }
    cell_rmse[cell] = std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  });

  CvOutcome out;
  out.mean_fold_rmse.resize(n_configs);
  for (std::size_t c = 0; c < n_configs; ++c) {
    double s = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) s += cell_rmse[c * folds.size() + f];
    out.mean_fold_rmse[c] = s / static_cast<double>(folds.size());
  }
  out.best = 0;
  for (std::size_t c = 1; c < n_configs; ++c)
    if (out.mean_fold_rmse[c] < out.mean_fold_rmse[out.best]) out.best = c;
  return out;
}

namespace {

std::uint64_t cell_seed(std::uint64_t seed, std::size_t config, std::size_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (config + 1) + 0xBF58476D1CE4E5B9ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double holdout_rmse(const Vector& y, const Vector& pred) {
  return std::sqrt((y - pred).squaredNorm() / static_cast<double>(y.size()));
}

}  // namespace

BarnCvResult run_barn_cv(const data::Dataset& ds, const std::vector<sampler::SamplerConfig>& grid,
                         int k, std::uint64_t seed, int threads) {
  if (grid.empty()) throw std::invalid_argument("run_barn_cv: empty grid");
  if (!ds.split) throw std::invalid_argument("run_barn_cv: dataset has no split");
  const Matrix X_val = ds.features(Part::Validation);
  const Vector y_val = ds.target(Part::Validation);
  Rng rng(seed);
  auto score = [&](std::size_t c, const std::vector<Index>& fit, const std::vector<Index>& hold) {
    auto cfg = grid[c];
    cfg.seed = cell_seed(seed, c, hold.front());
    const auto res = sampler::run_barn(data::select_rows(ds.X, fit), data::select_rows(ds.y, fit),
                                       X_val, y_val, cfg);
    return holdout_rmse(data::select_rows(ds.y, hold),
                        res.ensemble.predict(data::select_rows(ds.X, hold)));
  };
  BarnCvResult out;
  out.cv = cross_validate(grid.size(), ds.split->train, k, rng, score, threads);
  out.config = grid[out.cv.best];
  out.config.seed = seed;
  out.fit = sampler::run_barn(ds, out.config);
  return out;
}

BigNNCvResult run_bignn_cv(const data::Dataset& ds,
                           const std::vector<baselines::BigNNConfig>& grid,
                           int total_barn_neurons, int k, std::uint64_t seed, int threads) {
  if (grid.empty()) throw std::invalid_argument("run_bignn_cv: empty grid");
  if (!ds.split) throw std::invalid_argument("run_bignn_cv: dataset has no split");
  Rng rng(seed);
  auto score = [&](std::size_t c, const std::vector<Index>& fit, const std::vector<Index>& hold) {
    auto cfg = grid[c];
    cfg.seed = cell_seed(seed, c, hold.front());
    const auto res = baselines::bignn_fit(data::select_rows(ds.X, fit),
                                          data::select_rows(ds.y, fit), total_barn_neurons, cfg);
    if (!res.finite) return std::numeric_limits<double>::infinity();
    return holdout_rmse(data::select_rows(ds.y, hold),
                        nn::forward(res.net, data::select_rows(ds.X, hold)));
  };
  auto cv = cross_validate(grid.size(), ds.split->train, k, rng, score, threads);
  auto config = grid[cv.best];
  config.seed = seed;
  auto fit = baselines::bignn_fit(ds.features(Part::Train), ds.target(Part::Train),
                                  total_barn_neurons, config);
  return {std::move(cv), config, std::move(fit)};
}

// ---------------------------------------------------------------------------

data::Dataset DatasetSource::load() const {
  data::Dataset ds;
  if (synth) {
    ds = data::generate(*synth).data;
  } else {
    ds = data::load_csv(csv, target);
  }
  if (!name.empty()) ds.name = name;
  return ds;
}

DatasetSource DatasetSource::from_synth(data::SynthSpec spec) {
  DatasetSource s;
  s.name = spec.name.empty() ? data::to_string(spec.relationship) : spec.name;
  s.synth = std::move(spec);
  return s;
}

DatasetSource DatasetSource::from_csv(std::filesystem::path path, std::string target,
                                      std::string name) {
  DatasetSource s;
  s.name = name.empty() ? path.stem().string() : std::move(name);
  s.csv = std::move(path);
  s.target = std::move(target);
  return s;
}

const MethodResult* TrialReport::find(Method m) const {
  for (const auto& r : results)
    if (r.method == m) return &r;
  return nullptr;
}

data::Dataset prepare_trial(const data::Dataset& raw, std::uint64_t trial_seed,
                            const RunOptions& opts) {
  Rng rng(trial_seed);
  auto ds = data::split(raw, opts.fractions, rng);
  ds = data::standardize_y(std::move(ds));
  return data::pca_fit_transform(std::move(ds), opts.whiten);
}

namespace {

template <class Predict>
void score_method(MethodResult& r, const data::Dataset& ds, Predict&& predict) {
  const Vector tr = predict(ds.features(Part::Train));
  const Vector va = predict(ds.features(Part::Validation));
  const Vector te = predict(ds.features(Part::Test));
  const auto m_tr = metrics(ds.target(Part::Train), tr);
  const auto m_va = metrics(ds.target(Part::Validation), va);
  const auto m_te = metrics(ds.target(Part::Test), te);
  r.train_rmse = m_tr.rmse;
  r.val_rmse = m_va.rmse;
  r.test_rmse = m_te.rmse;
  r.train_r2 = m_tr.r2;
  r.test_r2 = m_te.r2;
  if (!std::isfinite(r.test_rmse)) {
    r.ok = false;
    r.error = "non-finite predictions";
  }
}

void fill_barn(MethodResult& r, const sampler::BarnResult& fit, const sampler::SamplerConfig& cfg) {
  r.total_neurons = fit.ensemble.total_neurons();
  r.neuron_histogram =
      sampler::neuron_histogram(fit.trace, static_cast<std::size_t>(cfg.min_iter / 2));
  TraceSummary s;
  s.iterations = static_cast<int>(fit.trace.size());
  s.final_phi = fit.trace.phi.empty() ? 0.0 : fit.trace.phi.back();
  s.final_sigma = fit.ensemble.sigma;
  s.stopped_early = fit.stopped_early;
  r.trace = s;
}

}  // namespace

TrialReport run_trial(const data::Dataset& raw, int trial, const RunOptions& opts) {
  TrialReport report;
  report.dataset = raw.name;
  report.trial = trial;
  report.seed = opts.seed + static_cast<std::uint64_t>(trial);
  const auto ds = prepare_trial(raw, report.seed, opts);
  report.split = *ds.split;
  const int threads = opts.threads > 0 ? opts.threads : thread_budget();

  std::optional<int> barn_neurons;
  const std::set<Method> wanted(opts.methods.begin(), opts.methods.end());
  for (auto method : {Method::Barn, Method::BarnCv, Method::Ols, Method::BigNN, Method::BigNNCv}) {
    if (!wanted.count(method)) continue;
    MethodResult r;
    r.method = method;
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (method) {
        case Method::Barn: {
          auto cfg = opts.barn;
          cfg.seed = report.seed;
          const auto fit = sampler::run_barn(ds, cfg);
          score_method(r, ds, [&](const Matrix& X) { return fit.ensemble.predict(X); });
          fill_barn(r, fit, cfg);
          barn_neurons = r.total_neurons;
          break;
        }
        case Method::BarnCv: {
          const auto cv = run_barn_cv(ds, CvGrid::barn_grid(opts.barn), opts.cv_folds,
                                      report.seed, threads);
          score_method(r, ds, [&](const Matrix& X) { return cv.fit.ensemble.predict(X); });
          fill_barn(r, cv.fit, cv.config);
          r.selected_config = describe(cv.config);
          if (!barn_neurons) barn_neurons = r.total_neurons;
          break;
        }
        case Method::Ols: {
          const auto model = baselines::ols_fit(ds.features(Part::Train), ds.target(Part::Train));
          score_method(r, ds, [&](const Matrix& X) { return baselines::ols_predict(model, X); });
          break;
        }
        case Method::BigNN: {
          auto cfg = opts.bignn;
          cfg.seed = report.seed;
          const int neurons = barn_neurons.value_or(opts.barn.n_networks);
          const auto fit = baselines::bignn_fit(ds.features(Part::Train), ds.target(Part::Train),
                                                neurons, cfg);
          score_method(r, ds, [&](const Matrix& X) { return nn::forward(fit.net, X); });
          r.total_neurons = static_cast<int>(fit.net.neurons());
          if (!fit.finite) {
            r.ok = false;
            r.error = "training diverged";
          }
          break;
        }
        case Method::BigNNCv: {
          const int neurons = barn_neurons.value_or(opts.barn.n_networks);
          const auto cv = run_bignn_cv(ds, CvGrid::bignn_grid(opts.bignn), neurons, opts.cv_folds,
                                       report.seed, threads);
          score_method(r, ds, [&](const Matrix& X) { return nn::forward(cv.fit.net, X); });
          r.total_neurons = static_cast<int>(cv.fit.net.neurons());
          r.selected_config = describe(cv.config);
          if (!cv.fit.finite) {
            r.ok = false;
            r.error = "training diverged";
          }
          break;
        }
      }
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.results.push_back(std::move(r));
  }
  return report;
}

std::vector<TrialReport> run_trials(const data::Dataset& raw, const RunOptions& opts) {
  if (opts.n_trials < 0) throw std::invalid_argument("n_trials must be >= 0");
  if (opts.methods.empty()) throw std::invalid_argument("no methods requested");
  std::vector<TrialReport> reports(static_cast<std::size_t>(opts.n_trials));
  const int threads = opts.threads > 0 ? opts.threads : thread_budget();
  parallel_for(reports.size(), threads, [&](std::size_t t) {
    reports[t] = run_trial(raw, static_cast<int>(t), opts);
  });
  return reports;
}

std::vector<TrialReport> run_trials(const DatasetSource& source, const RunOptions& opts) {
  return run_trials(source.load(), opts);
}

std::map<Method, double> relative_test_rmse(const TrialReport& report) {
  std::vector<double> rmse;
  std::vector<Method> methods;
  for (const auto& r : report.results) {
    if (!r.ok) continue;
    rmse.push_back(r.test_rmse);
    methods.push_back(r.method);
  }
  const auto rel = relative_rmse(rmse);
  std::map<Method, double> out;
  for (std::size_t i = 0; i < methods.size(); ++i) out[methods[i]] = rel[i];
  return out;
}

// ---------------------------------------------------------------------------

const std::vector<ExternalReference>& external_bart_reference() {
  static const std::vector<ExternalReference> table{
      {"california", 0.524, 0.498}, {"concrete", 0.533, 0.462}, {"crimes", 0.708, 0.649},
      {"diabetes", 0.807, 0.791},   {"fires", 1.358, 1.221},    {"isotope", 0.327, 0.315},
      {"mpg", 0.480, 0.454},        {"random", 0.386, 0.179},   {"wisconsin", 1.104, 1.058},
  };
  return table;
}

namespace {

const char* kExternalLabel = "external published result, not computed";

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json finite_json(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

struct Aggregate {
  int n_ok = 0;
  int n_failed = 0;
  double sum_train = 0, sum_val = 0, sum_test = 0;
  std::vector<double> train_r2, test_r2, relative;
  std::map<int, long> neurons;
};

// dataset -> method -> aggregate, in first-seen dataset order.
std::vector<std::pair<std::string, std::map<Method, Aggregate>>> aggregate(
    const std::vector<TrialReport>& reports) {
  std::vector<std::pair<std::string, std::map<Method, Aggregate>>> out;
  auto slot = [&](const std::string& name) -> std::map<Method, Aggregate>& {
    for (auto& [n, m] : out)
      if (n == name) return m;
    out.emplace_back(name, std::map<Method, Aggregate>{});
    return out.back().second;
  };
  for (const auto& rep : reports) {
    auto& by_method = slot(rep.dataset);
    const auto rel = relative_test_rmse(rep);
    for (const auto& r : rep.results) {
      auto& a = by_method[r.method];
      if (!r.ok) {
        ++a.n_failed;
        continue;
      }
      ++a.n_ok;
      a.sum_train += r.train_rmse;
      a.sum_val += r.val_rmse;
      a.sum_test += r.test_rmse;
      if (r.train_r2) a.train_r2.push_back(*r.train_r2);
      if (r.test_r2) a.test_r2.push_back(*r.test_r2);
      if (auto it = rel.find(r.method); it != rel.end()) a.relative.push_back(it->second);
      for (auto [m, c] : r.neuron_histogram) a.neurons[m] += c;
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

nlohmann::ordered_json report_json(const std::vector<TrialReport>& reports,
                                   const RunOptions& opts) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  json cfg;
  json methods = json::array();
  for (auto m : opts.methods) methods.push_back(std::string(to_string(m)));
  cfg["methods"] = methods;
  cfg["n_trials"] = opts.n_trials;
  cfg["seed"] = opts.seed;
  cfg["cv_folds"] = opts.cv_folds;
  cfg["whiten"] = opts.whiten;
  cfg["split"] = {{"train", opts.fractions.train},
                  {"validation", opts.fractions.validation},
                  {"test", opts.fractions.test}};
  cfg["barn"] = to_json(opts.barn);
  cfg["bignn"] = to_json(opts.bignn);
  j["config"] = cfg;

  json trials = json::array();
  for (const auto& rep : reports) {
    json t;
    t["dataset"] = rep.dataset;
    t["trial"] = rep.trial;
    t["seed"] = rep.seed;
    t["split_sizes"] = {{"train", rep.split.train.size()},
                        {"validation", rep.split.validation.size()},
                        {"test", rep.split.test.size()}};
    const auto rel = relative_test_rmse(rep);
    json results = json::array();
    for (const auto& r : rep.results) {
      json x;
      x["method"] = std::string(to_string(r.method));
      x["ok"] = r.ok;
      if (!r.ok) x["error"] = r.error;
      x["train_rmse"] = finite_json(r.train_rmse);
      x["val_rmse"] = finite_json(r.val_rmse);
      x["test_rmse"] = finite_json(r.test_rmse);
      x["relative_test_rmse"] = rel.count(r.method) ? finite_json(rel.at(r.method)) : json(nullptr);
      x["train_r2"] = opt_json(r.train_r2);
      x["test_r2"] = opt_json(r.test_r2);
      x["total_neurons"] = r.total_neurons;
      if (!r.neuron_histogram.empty()) {
        json h = json::object();
        for (auto [m, c] : r.neuron_histogram) h[std::to_string(m)] = c;
        x["neuron_histogram"] = h;
      }
      if (r.trace) {
        x["trace"] = {{"iterations", r.trace->iterations},
                      {"final_phi", finite_json(r.trace->final_phi)},
                      {"final_sigma", finite_json(r.trace->final_sigma)},
                      {"stopped_early", r.trace->stopped_early}};
      }
      if (!r.selected_config.empty()) x["selected_config"] = r.selected_config;
      results.push_back(x);
    }
    t["results"] = results;
    trials.push_back(t);
  }
  j["trials"] = trials;

  json summary = json::array();
  for (const auto& [dataset, by_method] : aggregate(reports)) {
    for (const auto& [m, a] : by_method) {
      const double n = a.n_ok > 0 ? a.n_ok : std::numeric_limits<double>::quiet_NaN();
      summary.push_back({{"dataset", dataset},
                         {"method", std::string(to_string(m))},
                         {"n_ok", a.n_ok},
                         {"n_failed", a.n_failed},
                         {"mean_train_rmse", finite_json(a.sum_train / n)},
                         {"mean_val_rmse", finite_json(a.sum_val / n)},
                         {"mean_test_rmse", finite_json(a.sum_test / n)},
                         {"mean_relative_test_rmse", finite_json(mean(a.relative))},
                         {"max_relative_test_rmse",
                          a.relative.empty() ? json(nullptr)
                                             : json(*std::max_element(a.relative.begin(),
                                                                      a.relative.end()))},
                         {"mean_train_r2", finite_json(mean(a.train_r2))},
                         {"mean_test_r2", finite_json(mean(a.test_r2))}});
    }
  }
  j["summary"] = summary;

  json ext = json::array();
  std::set<std::string> names;
  for (const auto& rep : reports) names.insert(rep.dataset);
  for (const auto& ref : external_bart_reference()) {
    if (!names.count(ref.dataset)) continue;
    ext.push_back({{"dataset", ref.dataset},
                   {"bart_test_rmse", ref.bart},
                   {"bart_cv_test_rmse", ref.bart_cv},
                   {"provenance", kExternalLabel}});
  }
  j["external_reference"] = ext;
  return j;
}

void emit_report(const std::vector<TrialReport>& reports, const RunOptions& opts,
                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory " + out_dir.string());

  write_file(out_dir / "report.json", report_json(reports, opts).dump(2) + "\n");

  const auto agg = aggregate(reports);

  std::ostringstream summary;
  summary << "dataset,method,n_ok,n_failed,mean_train_rmse,mean_val_rmse,mean_test_rmse,"
             "mean_train_r2,mean_test_r2\n";
  std::ostringstream maxrel;
  maxrel << "dataset,method,max_relative_test_rmse\n";
  std::ostringstream neurons;
  neurons << "dataset,method,neurons,count,fraction\n";
  std::map<Method, std::vector<std::vector<double>>> train_groups;
  std::map<Method, std::vector<std::vector<double>>> test_groups;
  for (const auto& [dataset, by_method] : agg) {
    for (const auto& [m, a] : by_method) {
      const double n = a.n_ok > 0 ? a.n_ok : std::numeric_limits<double>::quiet_NaN();
      summary << dataset << ',' << to_string(m) << ',' << a.n_ok << ',' << a.n_failed << ','
              << num(a.sum_train / n) << ',' << num(a.sum_val / n) << ',' << num(a.sum_test / n)
              << ',' << num(mean(a.train_r2)) << ',' << num(mean(a.test_r2)) << '\n';
      if (!a.relative.empty()) {
        maxrel << dataset << ',' << to_string(m) << ','
               << num(*std::max_element(a.relative.begin(), a.relative.end())) << '\n';
      }
      long total = 0;
      for (auto [k, c] : a.neurons) total += c;
      for (auto [k, c] : a.neurons) {
        neurons << dataset << ',' << to_string(m) << ',' << k << ',' << c << ','
                << num(static_cast<double>(c) / static_cast<double>(total)) << '\n';
      }
      if (!a.train_r2.empty()) train_groups[m].push_back(a.train_r2);
      if (!a.test_r2.empty()) test_groups[m].push_back(a.test_r2);
    }
  }
  write_file(out_dir / "summary_rmse.csv", summary.str());
  write_file(out_dir / "max_relative.csv", maxrel.str());
  write_file(out_dir / "neuron_counts.csv", neurons.str());

  std::ostringstream rel;
  rel << "dataset,trial,method,test_rmse,relative_test_rmse\n";
  std::ostringstream timing;
  timing << "dataset,trial,method,wall_seconds\n";
  for (const auto& rep : reports) {
    const auto r = relative_test_rmse(rep);
    for (const auto& res : rep.results) {
      timing << rep.dataset << ',' << rep.trial << ',' << to_string(res.method) << ','
             << num(res.wall_seconds) << '\n';
      if (!res.ok) continue;
      rel << rep.dataset << ',' << rep.trial << ',' << to_string(res.method) << ','
          << num(res.test_rmse) << ',' << num(r.at(res.method)) << '\n';
    }
  }
  write_file(out_dir / "relative_rmse.csv", rel.str());
  write_file(out_dir / "timing.csv", timing.str());

  // R^2 averaged over datasets, error bars from the pooled within-dataset std.
  std::ostringstream r2;
  r2 << "method,mean_train_r2,pooled_std_train_r2,mean_test_r2,pooled_std_test_r2\n";
  std::set<Method> methods;
  for (const auto& [m, g] : train_groups) methods.insert(m);
  for (const auto& [m, g] : test_groups) methods.insert(m);
  for (auto m : methods) {
    auto dataset_means = [](const std::vector<std::vector<double>>& groups) {
      std::vector<double> means;
      for (const auto& g : groups) means.push_back(mean(g));
      return mean(means);
    };
    const auto& tr = train_groups[m];
    const auto& te = test_groups[m];
    r2 << to_string(m) << ',' << (tr.empty() ? "" : num(dataset_means(tr))) << ','
       << (tr.empty() ? "" : num(pooled_std(tr))) << ','
       << (te.empty() ? "" : num(dataset_means(te))) << ','
       << (te.empty() ? "" : num(pooled_std(te))) << '\n';
  }
  write_file(out_dir / "r2.csv", r2.str());

  std::ostringstream ext;
  ext << "dataset,bart_test_rmse,bart_cv_test_rmse,provenance\n";
  for (const auto& ref : external_bart_reference())
    ext << ref.dataset << ',' << num(ref.bart) << ',' << num(ref.bart_cv) << ',' << kExternalLabel
        << '\n';
  write_file(out_dir / "external_reference.csv", ext.str());
}

// ---------------------------------------------------------------------------

data::SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("synthetic spec must be a JSON object");
  data::SynthSpec s;
  if (j.contains("preset")) {
    const auto preset = j.at("preset").get<std::string>();
    if (preset != "random") throw std::invalid_argument("unknown preset '" + preset + "'");
    s = data::random_benchmark_spec();
  }
  static const std::set<std::string> known{
      "preset",         "name",         "relationship",     "snr",
      "noiseless",      "n_relevant",   "pct_irrelevant",   "n_points",
      "seed",           "n_clusters",   "forest_trees",     "forest_depth",
      "forest_bootstrap", "friedman_ranges"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown synthetic spec key '" + key + "'");
  }
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("relationship"))
    s.relationship = data::parse_relationship(j.at("relationship").get<std::string>());
  if (j.contains("snr")) s.snr = j.at("snr").get<double>();
  if (j.contains("noiseless")) s.noiseless = j.at("noiseless").get<bool>();
  if (j.contains("n_relevant")) s.n_relevant = j.at("n_relevant").get<int>();
  if (j.contains("pct_irrelevant")) s.pct_irrelevant = j.at("pct_irrelevant").get<double>();
  if (j.contains("n_points")) s.n_points = j.at("n_points").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("n_clusters")) s.n_clusters = j.at("n_clusters").get<int>();
  if (j.contains("forest_trees")) s.forest_trees = j.at("forest_trees").get<int>();
  if (j.contains("forest_depth")) s.forest_depth = j.at("forest_depth").get<int>();
  if (j.contains("forest_bootstrap")) s.forest_bootstrap = j.at("forest_bootstrap").get<bool>();
  if (j.contains("friedman_ranges")) {
    const auto& r = j.at("friedman_ranges");
    auto read = [&](const char* key, std::array<double, 2>& dst) {
      if (r.contains(key)) dst = r.at(key).get<std::array<double, 2>>();
    };
    read("x1", s.friedman_ranges.x1);
    read("x2", s.friedman_ranges.x2);
    read("x3", s.friedman_ranges.x3);
    read("x4", s.friedman_ranges.x4);
  }
  s.validate();
  return s;
}

nlohmann::ordered_json to_json(const data::SynthSpec& s) {
  return {{"name", s.name},
          {"relationship", data::to_string(s.relationship)},
          {"snr", s.snr},
          {"noiseless", s.noiseless},
          {"n_relevant", s.n_relevant},
          {"pct_irrelevant", s.pct_irrelevant},
          {"n_points", s.n_points},
          {"seed", s.seed},
          {"n_clusters", s.n_clusters},
          {"forest_trees", s.forest_trees},
          {"forest_depth", s.forest_depth},
          {"forest_bootstrap", s.forest_bootstrap},
          {"friedman_ranges",
           {{"x1", s.friedman_ranges.x1},
            {"x2", s.friedman_ranges.x2},
            {"x3", s.friedman_ranges.x3},
            {"x4", s.friedman_ranges.x4}}}};
}

nlohmann::ordered_json to_json(const sampler::SamplerConfig& c) {
  return {{"n_networks", c.n_networks},
          {"grow_prob", c.grow_prob},
          {"prior_mean", c.prior_mean},
          {"max_iter", c.max_iter},
          {"min_iter", c.min_iter},
          {"check_every", c.check_every},
          {"tol", c.tol},
          {"stop_rule", std::string(sampler::to_string(c.stop_rule))},
          {"sigma_prior_nu", c.sigma_prior.nu},
          {"sigma_prior_quantile", c.sigma_prior.quantile},
          {"activation", std::string(nn::to_string(c.activation))},
          {"l2_penalty", c.loss.l2_penalty},
          {"bfgs_max_iter", c.optim.max_iter},
          {"bfgs_grad_tol", c.optim.grad_tol}};
}

nlohmann::ordered_json to_json(const baselines::BigNNConfig& c) {
  return {{"neuron_multiplier", c.neuron_multiplier},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"activation", std::string(nn::to_string(c.activation))},
          {"l2_penalty", c.loss.l2_penalty}};
}

}  // namespace barn::bench
