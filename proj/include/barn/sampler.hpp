#pragma once

#include "barn/common.hpp"
#include "barn/data.hpp"
#include "barn/nn.hpp"
#include "barn/optim.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string_view>
#include <vector>

namespace barn::sampler {

/// Conjugate prior on the noise variance, calibrated so that
/// P(sigma < sigma_hat) = quantile, where sigma_hat is the OLS residual std.
struct SigmaPrior {
  double nu = 3.0;
  double quantile = 0.90;
};

enum class StopRule {
  /// Stop when phi exceeds the best check-point value by more than tol.
  WorseThanBest,
  /// Stop when phi fails to improve on the best check-point value by more
  /// than tol.
  NoImprovement,
};

std::string_view to_string(StopRule r);
StopRule parse_stop_rule(std::string_view name);

struct SamplerConfig {
  int n_networks = 10;
  double grow_prob = 0.4;
  double prior_mean = 1.0; ///< Poisson mean on hidden neuron count
  int max_iter = 200;
  int min_iter = 20;
  int check_every = 5;
  double tol = 1e-4;
  StopRule stop_rule = StopRule::WorseThanBest;
  SigmaPrior sigma_prior;
  std::uint64_t seed = 0;

  nn::Activation activation = nn::Activation::Sigmoid;
  nn::LossConfig loss;
  optim::OptimConfig optim;

  /// Number of trailing ensembles to keep for posterior summaries. 0 keeps
  /// only the final ensemble.
  int keep_last = 0;

  void validate() const;
};

struct Ensemble {
  std::vector<nn::SingleLayerNet> nets;
  double sigma = 1.0;

  /// Sum of member outputs.
  Vector predict(const Matrix& X) const;
  int total_neurons() const;
  std::vector<int> neuron_counts() const;
};

struct Trace {
  std::vector<double> phi;        ///< validation RMSE after each iteration
  std::vector<double> sigma_path; ///< sigma after each iteration
  std::vector<std::vector<int>> neuron_counts;
  std::vector<std::vector<bool>> accept_flags;

  std::size_t size() const noexcept { return phi.size(); }

  /// iteration,phi,sigma,m_1..m_N,accept_1..accept_N
  void write_csv(std::ostream& out) const;
};

// ---------------------------------------------------------------------------
// MH building blocks

struct Proposal {
  int neurons = 1;
  /// log T(current | proposed) - log T(proposed | current)
  double log_transition_ratio = 0.0;
  bool grow = false;
};

/// Grow with probability p, otherwise shrink to max(1, m - 1).
Proposal propose(int m, double grow_prob, Rng& rng);

/// Transition log-ratio for a given move, without drawing.
double log_transition_ratio(int m_old, int m_new, double grow_prob);

/// log[Poisson(m_new; lambda) / Poisson(m_old; lambda)].
double log_prior_ratio(int m_new, int m_old, double lambda);

/// Gaussian log-likelihood of residual r given predictions, noise sigma.
double log_evidence(const Vector& r, const Vector& predicted, double sigma);
double log_evidence(const nn::SingleLayerNet& net, const Matrix& X_val, const Vector& r_val,
                    double sigma);

/// log of the MH acceptance probability, min(0, sum of log-ratios).
double log_acceptance(double log_T_ratio, double log_evidence_new, double log_evidence_old,
                      double log_prior_ratio);

bool accept(double log_T_ratio, double log_evidence_new, double log_evidence_old,
            double log_prior_ratio, Rng& rng);

// ---------------------------------------------------------------------------
// Gibbs sweep

/// Pluggable pieces of a sweep. Defaults train with BFGS and score with the
/// validation likelihood; tests replace them to isolate the chain.
struct SweepHooks {
  std::function<nn::SingleLayerNet(const nn::SingleLayerNet& init, const Matrix& X,
                                   const Vector& r)>
      train;
  std::function<double(const Vector& r_val, const Vector& predicted_val, double sigma)>
      evidence;

  static SweepHooks standard(const SamplerConfig& cfg);
};

struct SweepResult {
  std::vector<bool> accepted;
};

/// One pass over k = 0..N-1: residualize, propose, train, MH-test.
SweepResult gibbs_sweep(Ensemble& ensemble, const Matrix& X_train, const Vector& y_train,
                        const Matrix& X_val, const Vector& y_val, const SamplerConfig& cfg,
                        Rng& rng, const SweepHooks& hooks);
SweepResult gibbs_sweep(Ensemble& ensemble, const Matrix& X_train, const Vector& y_train,
                        const Matrix& X_val, const Vector& y_val, const SamplerConfig& cfg,
                        Rng& rng);

// ---------------------------------------------------------------------------
// Noise level

/// sigma^2 ~ InvGamma((nu + n)/2, (nu*scale + sum r^2)/2); returns sigma.
double sample_sigma(const Vector& residuals, double nu, double scale, Rng& rng);

/// OLS residual std of y on X, or std(y) if the fit is degenerate.
double residual_std_estimate(const Matrix& X, const Vector& y);

/// Scale such that the InvGamma(nu/2, nu*scale/2) prior puts mass q below
/// sigma_hat^2.
double calibrate_sigma_prior(double sigma_hat, double nu, double q);
double calibrate_sigma_prior(const Vector& y_train, const Matrix& X_train, double nu, double q);

// ---------------------------------------------------------------------------
// Full run

struct BarnResult {
  Ensemble ensemble;
  Trace trace;
  std::vector<Ensemble> posterior; ///< last keep_last ensembles, oldest first
  double sigma_scale = 0.0;        ///< calibrated prior scale
  bool stopped_early = false;
};

BarnResult run_barn(const Matrix& X_train, const Vector& y_train, const Matrix& X_val,
                    const Vector& y_val, const SamplerConfig& cfg);
BarnResult run_barn(const Matrix& X_train, const Vector& y_train, const Matrix& X_val,
                    const Vector& y_val, const SamplerConfig& cfg, const SweepHooks& hooks);
BarnResult run_barn(const data::Dataset& ds, const SamplerConfig& cfg);

/// Counts of hidden sizes over all networks in iterations >= burn_in.
std::map<int, long> neuron_histogram(const Trace& trace, std::size_t burn_in);

// ---------------------------------------------------------------------------
// Diagnostics

struct BatchMeans {
  double batch_variance = 0.0;
  bool ok = false;
};

/// Splits phi into n_batches contiguous batches (dropping the oldest
/// remainder) and returns the sample variance of the batch means. ok when
/// that is below 1% of reference_variance.
BatchMeans batch_means_check(const std::vector<double>& phi, int n_batches,
                             double reference_variance);

}  // namespace barn::sampler
