#pragma once

#include "barn/baselines.hpp"
#include "barn/common.hpp"
#include "barn/data.hpp"
#include "barn/sampler.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace barn::bench {

enum class Method { Barn, BarnCv, Ols, BigNN, BigNNCv };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
/// Comma-separated list, e.g. "barn,ols,bignn".
std::vector<Method> parse_methods(std::string_view list);

// ---------------------------------------------------------------------------
// Metrics

struct Metrics {
  double rmse = 0.0;
  /// Empty when the target has zero variance.
  std::optional<double> r2;
};

Metrics metrics(const Vector& y_true, const Vector& y_pred);

/// Each value divided by the smallest. Non-finite inputs stay non-finite.
std::vector<double> relative_rmse(const std::vector<double>& rmse);

/// sqrt(sum_g sum_i (x_gi - mean_g)^2 / sum_g (n_g - 1)).
double pooled_std(const std::vector<std::vector<double>>& groups);

// ---------------------------------------------------------------------------
// Parallelism

/// BARN_THREADS if set and positive, else the hardware concurrency.
int thread_budget();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Calls nested
/// inside another parallel_for run serially.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

// ---------------------------------------------------------------------------
// Cross-validation

struct CvGrid {
  std::vector<sampler::SamplerConfig> barn;
  std::vector<baselines::BigNNConfig> bignn;

  /// N in {10, 20} x lambda in {1, 2} x activation in {sigmoid, relu}.
  static std::vector<sampler::SamplerConfig> barn_grid(const sampler::SamplerConfig& base);
  /// multiplier {1, 2, 10} x lr {1e-5, 1e-4} x epochs {2000, 4000} x activation.
  static std::vector<baselines::BigNNConfig> bignn_grid(const baselines::BigNNConfig& base);

  static CvGrid standard(const sampler::SamplerConfig& barn_base,
                         const baselines::BigNNConfig& bignn_base);
};

std::string describe(const sampler::SamplerConfig& cfg);
std::string describe(const baselines::BigNNConfig& cfg);

/// Partitions positions 0..n-1 into k shuffled folds whose sizes differ by
/// at most one.
std::vector<std::vector<Index>> make_folds(Index n, int k, Rng& rng);

struct CvOutcome {
  std::size_t best = 0;
  std::vector<double> mean_fold_rmse; ///< one per configuration
};

/// score(config, fit_rows, holdout_rows) returns holdout RMSE. Both row
/// lists index the training split only. The lowest mean wins; ties go to
/// the earliest configuration.
using FoldScore = std::function<double(std::size_t config, const std::vector<Index>& fit_rows,
                                       const std::vector<Index>& holdout_rows)>;
CvOutcome cross_validate(std::size_t n_configs, const std::vector<Index>& train_rows, int k,
                         Rng& rng, const FoldScore& score, int threads = 1);

struct BarnCvResult {
  CvOutcome cv;
  sampler::SamplerConfig config;
  sampler::BarnResult fit;
};

struct BigNNCvResult {
  CvOutcome cv;
  baselines::BigNNConfig config;
  baselines::BigNNResult fit;
};

/// Folds the training split; BARN keeps using the validation split for its
/// acceptance test and early stopping. The winner is refit on all training
/// rows.
BarnCvResult run_barn_cv(const data::Dataset& ds, const std::vector<sampler::SamplerConfig>& grid,
                         int k, std::uint64_t seed, int threads = 1);
BigNNCvResult run_bignn_cv(const data::Dataset& ds,
                           const std::vector<baselines::BigNNConfig>& grid,
                           int total_barn_neurons, int k, std::uint64_t seed, int threads = 1);

// ---------------------------------------------------------------------------
// Trials

struct DatasetSource {
  std::string name;
  std::optional<data::SynthSpec> synth;
  std::filesystem::path csv;
  std::string target;

  data::Dataset load() const;

  static DatasetSource from_synth(data::SynthSpec spec);
  static DatasetSource from_csv(std::filesystem::path path, std::string target,
                                std::string name = {});
};

struct RunOptions {
  std::vector<Method> methods{Method::Barn, Method::Ols};
  int n_trials = 40;
  std::uint64_t seed = 0;
  sampler::SamplerConfig barn;
  baselines::BigNNConfig bignn;
  int cv_folds = 5;
  bool whiten = false;
  data::SplitFractions fractions;
  int threads = 0; ///< 0 uses thread_budget()
};

struct TraceSummary {
  int iterations = 0;
  double final_phi = 0.0;
  double final_sigma = 0.0;
  bool stopped_early = false;
};

struct MethodResult {
  Method method = Method::Barn;
  bool ok = true;
  std::string error;
  double train_rmse = 0.0;
  double val_rmse = 0.0;
  double test_rmse = 0.0;
  std::optional<double> train_r2;
  std::optional<double> test_r2;
  int total_neurons = 0;
  std::map<int, long> neuron_histogram; ///< BARN methods only
  std::optional<TraceSummary> trace;
  std::string selected_config;          ///< CV methods only
  double wall_seconds = 0.0;            ///< not part of the deterministic report
};

struct TrialReport {
  std::string dataset;
  int trial = 0;
  std::uint64_t seed = 0;
  data::Split split;
  std::vector<MethodResult> results;

  const MethodResult* find(Method m) const;
};

/// Splits and preprocesses a raw dataset for one trial (seed + trial).
data::Dataset prepare_trial(const data::Dataset& raw, std::uint64_t trial_seed,
                            const RunOptions& opts);

TrialReport run_trial(const data::Dataset& raw, int trial, const RunOptions& opts);
std::vector<TrialReport> run_trials(const DatasetSource& source, const RunOptions& opts);
std::vector<TrialReport> run_trials(const data::Dataset& raw, const RunOptions& opts);

/// Per-trial relative test RMSE of every successful method.
std::map<Method, double> relative_test_rmse(const TrialReport& report);

// ---------------------------------------------------------------------------
// Reports

/// Test RMSE reported for BART / BART CV by the original benchmark study.
/// External reference values only; nothing here is computed.
struct ExternalReference {
  const char* dataset;
  double bart;
  double bart_cv;
};
const std::vector<ExternalReference>& external_bart_reference();

constexpr int kReportSchemaVersion = 1;

nlohmann::ordered_json report_json(const std::vector<TrialReport>& reports,
                                   const RunOptions& opts);

/// Writes report.json, summary_rmse.csv, relative_rmse.csv, max_relative.csv,
/// r2.csv, neuron_counts.csv and external_reference.csv into out_dir. These
/// are byte-identical for identical inputs. timing.csv (wall clock) is
/// written alongside and is not.
void emit_report(const std::vector<TrialReport>& reports, const RunOptions& opts,
                 const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Config I/O

data::SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const data::SynthSpec& spec);
nlohmann::ordered_json to_json(const sampler::SamplerConfig& cfg);
nlohmann::ordered_json to_json(const baselines::BigNNConfig& cfg);

}  // namespace barn::bench
