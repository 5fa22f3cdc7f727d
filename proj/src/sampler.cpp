#include "barn/sampler.hpp"

#include "barn/baselines.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <deque>
#include <limits>
#include <ostream>

namespace barn::sampler {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kMinSigma = 1e-10;

double rmse(const Vector& a, const Vector& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace

std::string_view to_string(StopRule r) {
  return r == StopRule::WorseThanBest ? "worse_than_best" : "no_improvement";
}

StopRule parse_stop_rule(std::string_view name) {
  if (name == "worse_than_best") return StopRule::WorseThanBest;
  if (name == "no_improvement") return StopRule::NoImprovement;
  throw std::invalid_argument("unknown stop rule '" + std::string(name) + "'");
}

void SamplerConfig::validate() const {
  if (n_networks < 1) throw std::invalid_argument("n_networks must be >= 1");
  if (!(grow_prob > 0.0 && grow_prob < 1.0)) throw std::invalid_argument("grow_prob must be in (0, 1)");
  if (!(prior_mean > 0.0)) throw std::invalid_argument("prior_mean must be > 0");
  if (max_iter < 1 || min_iter < 0 || min_iter > max_iter)
    throw std::invalid_argument("need 0 <= min_iter <= max_iter and max_iter >= 1");
  if (check_every < 1) throw std::invalid_argument("check_every must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
  if (!(sigma_prior.nu > 0.0)) throw std::invalid_argument("sigma prior nu must be > 0");
  if (!(sigma_prior.quantile > 0.0 && sigma_prior.quantile < 1.0))
    throw std::invalid_argument("sigma prior quantile must be in (0, 1)");
  if (keep_last < 0) throw std::invalid_argument("keep_last must be >= 0");
  loss.validate();
  optim.validate();
}

Vector Ensemble::predict(const Matrix& X) const {
  if (nets.empty()) throw std::logic_error("empty ensemble");
  Vector out = nn::forward(nets.front(), X);
  for (std::size_t k = 1; k < nets.size(); ++k) out += nn::forward(nets[k], X);
  return out;
}

int Ensemble::total_neurons() const {
  int total = 0;
  for (const auto& n : nets) total += static_cast<int>(n.neurons());
  return total;
}

std::vector<int> Ensemble::neuron_counts() const {
  std::vector<int> out;
  out.reserve(nets.size());
  for (const auto& n : nets) out.push_back(static_cast<int>(n.neurons()));
  return out;
}

void Trace::write_csv(std::ostream& out) const {
  const std::size_t n_nets = neuron_counts.empty() ? 0 : neuron_counts.front().size();
  out << "iteration,phi,sigma";
  for (std::size_t k = 1; k <= n_nets; ++k) out << ",m_" << k;
  for (std::size_t k = 1; k <= n_nets; ++k) out << ",accept_" << k;
  out << '\n';
  const auto old = out.precision(17);
  for (std::size_t t = 0; t < size(); ++t) {
    out << (t + 1) << ',' << phi[t] << ',' << sigma_path[t];
    for (int m : neuron_counts[t]) out << ',' << m;
    for (bool a : accept_flags[t]) out << ',' << (a ? 1 : 0);
    out << '\n';
  }
  out.precision(old);
}

// ---------------------------------------------------------------------------

double log_transition_ratio(int m_old, int m_new, double p) {
  auto move_prob = [p](int from, int to) {
    if (to == from + 1) return p;
    if (to == std::max(1, from - 1)) return 1.0 - p;
    throw std::invalid_argument("transition " + std::to_string(from) + " -> " +
                                std::to_string(to) + " is not a single grow/shrink move");
  };
  return std::log(move_prob(m_new, m_old)) - std::log(move_prob(m_old, m_new));
}

Proposal propose(int m, double grow_prob, Rng& rng) {
  if (m < 1) throw std::invalid_argument("propose: neuron count must be >= 1");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Proposal p;
  p.grow = u(rng) < grow_prob;
  p.neurons = p.grow ? m + 1 : std::max(1, m - 1);
  p.log_transition_ratio = log_transition_ratio(m, p.neurons, grow_prob);
  return p;
}

double log_prior_ratio(int m_new, int m_old, double lambda) {
  if (m_new < 1 || m_old < 1) throw std::invalid_argument("neuron counts must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("prior mean must be > 0");
  return static_cast<double>(m_new - m_old) * std::log(lambda) +
         std::lgamma(static_cast<double>(m_old) + 1.0) -
         std::lgamma(static_cast<double>(m_new) + 1.0);
}

double log_evidence(const Vector& r, const Vector& predicted, double sigma) {
  require_size("log_evidence: prediction length", r.size(), predicted.size());
  if (r.size() == 0) throw std::invalid_argument("log_evidence: empty validation set");
  if (!(sigma > 0.0)) throw std::invalid_argument("log_evidence: sigma must be > 0");
  const double n = static_cast<double>(r.size());
  const double sse = (r - predicted).squaredNorm();
  const double value = -0.5 * sse / (sigma * sigma) - n * (std::log(sigma) + kLogSqrt2Pi);
  return std::isnan(value) ? -std::numeric_limits<double>::infinity() : value;
}

double log_evidence(const nn::SingleLayerNet& net, const Matrix& X_val, const Vector& r_val,
                    double sigma) {
  return log_evidence(r_val, nn::forward(net, X_val), sigma);
}

double log_acceptance(double log_T_ratio, double log_evidence_new, double log_evidence_old,
                      double log_prior) {
  if (log_evidence_new == -std::numeric_limits<double>::infinity())
    return -std::numeric_limits<double>::infinity();
  if (log_evidence_old == -std::numeric_limits<double>::infinity()) return 0.0;
  const double s = log_T_ratio + (log_evidence_new - log_evidence_old) + log_prior;
  if (std::isnan(s)) return -std::numeric_limits<double>::infinity();
  return std::min(0.0, s);
}

bool accept(double log_T_ratio, double log_evidence_new, double log_evidence_old,
            double log_prior, Rng& rng) {
  const double la = log_acceptance(log_T_ratio, log_evidence_new, log_evidence_old, log_prior);
  if (la >= 0.0) return true;
  if (la == -std::numeric_limits<double>::infinity()) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::log(u(rng)) < la;
}

// ---------------------------------------------------------------------------

SweepHooks SweepHooks::standard(const SamplerConfig& cfg) {
  SweepHooks h;
  h.train = [optim = cfg.optim, loss = cfg.loss](const nn::SingleLayerNet& init, const Matrix& X,
                                                 const Vector& r) {
    return optim::train(init, X, r, optim, loss).net;
  };
  h.evidence = [](const Vector& r, const Vector& pred, double sigma) {
    return log_evidence(r, pred, sigma);
  };
  return h;
}

SweepResult gibbs_sweep(Ensemble& ens, const Matrix& X_train, const Vector& y_train,
                        const Matrix& X_val, const Vector& y_val, const SamplerConfig& cfg,
                        Rng& rng, const SweepHooks& hooks) {
  if (ens.nets.empty()) throw std::invalid_argument("gibbs_sweep: empty ensemble");
  require_size("gibbs_sweep: training targets", X_train.rows(), y_train.size());
  require_size("gibbs_sweep: validation targets", X_val.rows(), y_val.size());
  if (!(ens.sigma > 0.0)) throw std::invalid_argument("gibbs_sweep: sigma must be > 0");

  const std::size_t n_nets = ens.nets.size();
  std::vector<Vector> pred_train(n_nets);
  std::vector<Vector> pred_val(n_nets);
  Vector sum_train = Vector::Zero(X_train.rows());
  Vector sum_val = Vector::Zero(X_val.rows());
  for (std::size_t k = 0; k < n_nets; ++k) {
    pred_train[k] = nn::forward(ens.nets[k], X_train);
    pred_val[k] = nn::forward(ens.nets[k], X_val);
    sum_train += pred_train[k];
    sum_val += pred_val[k];
  }

  SweepResult result;
  result.accepted.assign(n_nets, false);
  for (std::size_t k = 0; k < n_nets; ++k) {
    const auto& current = ens.nets[k];
    const Vector r_train = y_train - (sum_train - pred_train[k]);
    const Vector r_val = y_val - (sum_val - pred_val[k]);

    const int m = static_cast<int>(current.neurons());
    const Proposal prop = propose(m, cfg.grow_prob, rng);
    const nn::SingleLayerNet init = prop.grow ? nn::grow(current, rng) : nn::shrink(current);
    nn::SingleLayerNet candidate = hooks.train(init, X_train, r_train);
    Vector cand_val = nn::forward(candidate, X_val);

    const double ev_new = hooks.evidence(r_val, cand_val, ens.sigma);
    const double ev_old = hooks.evidence(r_val, pred_val[k], ens.sigma);
    const double lp = log_prior_ratio(prop.neurons, m, cfg.prior_mean);

    if (accept(prop.log_transition_ratio, ev_new, ev_old, lp, rng)) {
      Vector cand_train = nn::forward(candidate, X_train);
      sum_train += cand_train - pred_train[k];
      sum_val += cand_val - pred_val[k];
      pred_train[k] = std::move(cand_train);
      pred_val[k] = std::move(cand_val);
      ens.nets[k] = std::move(candidate);
      result.accepted[k] = true;
    }
  }
  return result;
}

SweepResult gibbs_sweep(Ensemble& ens, const Matrix& X_train, const Vector& y_train,
                        const Matrix& X_val, const Vector& y_val, const SamplerConfig& cfg,
                        Rng& rng) {
  return gibbs_sweep(ens, X_train, y_train, X_val, y_val, cfg, rng, SweepHooks::standard(cfg));
}

// ---------------------------------------------------------------------------

double sample_sigma(const Vector& residuals, double nu, double scale, Rng& rng) {
  if (residuals.size() < 1) throw std::invalid_argument("sample_sigma: need at least one residual");
  if (!(nu > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("sample_sigma: nu and scale must be > 0");
  const double shape = 0.5 * (nu + static_cast<double>(residuals.size()));
  const double rate = 0.5 * (nu * scale + residuals.squaredNorm());
  // 1/sigma^2 ~ Gamma(shape, rate)
  std::gamma_distribution<double> precision(shape, 1.0 / rate);
  const double var = 1.0 / precision(rng);
  return std::max(kMinSigma, std::sqrt(var));
}

double residual_std_estimate(const Matrix& X, const Vector& y) {
  require_size("residual_std_estimate: target length", X.rows(), y.size());
  const Index n = X.rows();
  const Index d = X.cols();
  auto sample_std = [&] {
    if (n < 2) return 0.0;
    return std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(n - 1));
  };
  if (n <= d + 1) return sample_std();
  const Matrix centered = X.rowwise() - X.colwise().mean();
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(centered);
  if (cod.rank() < d) return sample_std();
  const auto model = baselines::ols_fit(X, y);
  const Vector res = y - baselines::ols_predict(model, X);
  return std::sqrt(res.squaredNorm() / static_cast<double>(n - d - 1));
}

double calibrate_sigma_prior(double sigma_hat, double nu, double q) {
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("sigma_hat must be > 0");
  if (!(nu > 0.0) || !(q > 0.0 && q < 1.0)) throw std::invalid_argument("need nu > 0, 0 < q < 1");
  // sigma^2 = nu*scale / chi2_nu, so P(sigma^2 < s^2) = P(chi2_nu > nu*scale/s^2) = q.
  const boost::math::chi_squared_distribution<double> chi2(nu);
  return sigma_hat * sigma_hat * boost::math::quantile(chi2, 1.0 - q) / nu;
}

double calibrate_sigma_prior(const Vector& y_train, const Matrix& X_train, double nu, double q) {
  return calibrate_sigma_prior(residual_std_estimate(X_train, y_train), nu, q);
}

// ---------------------------------------------------------------------------

BarnResult run_barn(const Matrix& X_train, const Vector& y_train, const Matrix& X_val,
                    const Vector& y_val, const SamplerConfig& cfg, const SweepHooks& hooks) {
  cfg.validate();
  if (X_train.rows() == 0 || X_val.rows() == 0)
    throw std::invalid_argument("run_barn: training and validation splits must be nonempty");
  require_size("run_barn: training targets", X_train.rows(), y_train.size());
  require_size("run_barn: validation targets", X_val.rows(), y_val.size());
  require_size("run_barn: validation features", X_train.cols(), X_val.cols());

  Rng rng(cfg.seed);
  BarnResult out;

  // Floor keeps the prior proper when y is (numerically) constant.
  const double sigma_hat = std::max(residual_std_estimate(X_train, y_train), 1e-6);
  out.sigma_scale = calibrate_sigma_prior(sigma_hat, cfg.sigma_prior.nu, cfg.sigma_prior.quantile);

  Ensemble& ens = out.ensemble;
  ens.sigma = sigma_hat;
  const Vector share = y_train / static_cast<double>(cfg.n_networks);
  for (int k = 0; k < cfg.n_networks; ++k) {
    auto init = nn::SingleLayerNet::random(X_train.cols(), 1, cfg.activation, rng);
    ens.nets.push_back(hooks.train(init, X_train, share));
  }

  std::deque<Ensemble> recent;
  double best_phi = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const auto sweep = gibbs_sweep(ens, X_train, y_train, X_val, y_val, cfg, rng, hooks);
    const Vector resid = y_train - ens.predict(X_train);
    ens.sigma = sample_sigma(resid, cfg.sigma_prior.nu, out.sigma_scale, rng);
    const double phi = rmse(y_val, ens.predict(X_val));

    out.trace.phi.push_back(phi);
    out.trace.sigma_path.push_back(ens.sigma);
    out.trace.neuron_counts.push_back(ens.neuron_counts());
    out.trace.accept_flags.push_back(sweep.accepted);
    if (cfg.keep_last > 0) {
      recent.push_back(ens);
      if (static_cast<int>(recent.size()) > cfg.keep_last) recent.pop_front();
    }

    if (t % cfg.check_every == 0) {
      if (t >= cfg.min_iter) {
        const bool stop = cfg.stop_rule == StopRule::WorseThanBest ? phi > best_phi + cfg.tol
                                                                   : phi > best_phi - cfg.tol;
        if (stop) {
          out.stopped_early = t < cfg.max_iter;
          break;
        }
      }
      best_phi = std::min(best_phi, phi);
    }
  }
  out.posterior.assign(recent.begin(), recent.end());
  return out;
}

BarnResult run_barn(const Matrix& X_train, const Vector& y_train, const Matrix& X_val,
                    const Vector& y_val, const SamplerConfig& cfg) {
  return run_barn(X_train, y_train, X_val, y_val, cfg, SweepHooks::standard(cfg));
}

BarnResult run_barn(const data::Dataset& ds, const SamplerConfig& cfg) {
  if (!ds.split) throw std::invalid_argument("run_barn: dataset has no split");
  using data::Part;
  return run_barn(ds.features(Part::Train), ds.target(Part::Train), ds.features(Part::Validation),
                  ds.target(Part::Validation), cfg);
}

std::map<int, long> neuron_histogram(const Trace& trace, std::size_t burn_in) {
  std::map<int, long> hist;
  if (trace.neuron_counts.empty()) return hist;
  const std::size_t start = std::min(burn_in, trace.neuron_counts.size() - 1);
  for (std::size_t t = start; t < trace.neuron_counts.size(); ++t)
    for (int m : trace.neuron_counts[t]) ++hist[m];
  return hist;
}

BatchMeans batch_means_check(const std::vector<double>& phi, int n_batches,
                             double reference_variance) {
  if (n_batches < 2) throw std::invalid_argument("batch_means_check: need at least 2 batches");
  const auto b = static_cast<std::size_t>(n_batches);
  if (phi.size() < 2 * b)
    throw std::invalid_argument("batch_means_check: trace has " + std::to_string(phi.size()) +
                                " values, need at least " + std::to_string(2 * b));
  const std::size_t size = phi.size() / b;
  const std::size_t start = phi.size() - size * b;
  Vector means(n_batches);
  for (std::size_t i = 0; i < b; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < size; ++j) s += phi[start + i * size + j];
    means(static_cast<Index>(i)) = s / static_cast<double>(size);
  }
  const double var = (means.array() - means.mean()).square().sum() / static_cast<double>(n_batches - 1);
  return {var, var < 0.01 * reference_variance};
}

}  // namespace barn::sampler
