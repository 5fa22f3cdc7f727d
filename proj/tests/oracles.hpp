#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the code paths it checks beyond constructing inputs.

#include "barn/nn.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

namespace oracle {

using barn::Matrix;
using barn::Vector;
using barn::Index;

inline double act(barn::nn::Activation a, double z) {
  if (a == barn::nn::Activation::Sigmoid) return 1.0 / (1.0 + std::exp(-z));
  return z > 0 ? z : 0.0;
}

/// Element-by-element network evaluation for one row.
inline double scalar_forward(const barn::nn::SingleLayerNet& net, const Matrix& X, Index row) {
  double out = net.b_out();
  for (Index j = 0; j < net.neurons(); ++j) {
    double z = net.b_in()(j);
    for (Index i = 0; i < net.inputs(); ++i) z += X(row, i) * net.w_in()(i, j);
    out += net.w_out()(j) * act(net.activation(), z);
  }
  return out;
}

inline double brute_loss(const barn::nn::SingleLayerNet& net, const Matrix& X, const Vector& r,
                         double l2) {
  double sse = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    const double e = scalar_forward(net, X, i) - r(i);
    sse += e * e;
  }
  double w = 0.0;
  for (Index j = 0; j < net.neurons(); ++j) {
    for (Index i = 0; i < net.inputs(); ++i) w += net.w_in()(i, j) * net.w_in()(i, j);
    w += net.w_out()(j) * net.w_out()(j);
  }
  return sse / static_cast<double>(X.rows()) + l2 * w;
}

/// Central differences of the brute-force loss over the flat layout
/// (w_in column-major, b_in, w_out, b_out), built without pack/unpack.
inline Vector fd_gradient(const barn::nn::SingleLayerNet& net, const Matrix& X, const Vector& r,
                          double l2, double h = 1e-6) {
  const Index d = net.inputs();
  const Index m = net.neurons();
  std::vector<double*> slots;
  Matrix w_in = net.w_in();
  Vector b_in = net.b_in();
  Vector w_out = net.w_out();
  double b_out = net.b_out();
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < d; ++i) slots.push_back(&w_in(i, j));
  for (Index j = 0; j < m; ++j) slots.push_back(&b_in(j));
  for (Index j = 0; j < m; ++j) slots.push_back(&w_out(j));
  slots.push_back(&b_out);

  Vector g(static_cast<Index>(slots.size()));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const double orig = *slots[k];
    *slots[k] = orig + h;
    const double fp = brute_loss(barn::nn::SingleLayerNet(w_in, b_in, w_out, b_out, net.activation()), X, r, l2);
    *slots[k] = orig - h;
    const double fm = brute_loss(barn::nn::SingleLayerNet(w_in, b_in, w_out, b_out, net.activation()), X, r, l2);
    *slots[k] = orig;
    g(static_cast<Index>(k)) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// max_k |a_k - b_k| / max(|a_k|, |b_k|, floor). The floor keeps components
/// that are zero up to finite-difference roundoff from dominating.
inline double max_relative_error(const Vector& a, const Vector& b, double floor = 1e-4) {
  double worst = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a(k)), std::abs(b(k)), floor});
    worst = std::max(worst, std::abs(a(k) - b(k)) / scale);
  }
  return worst;
}

/// Stationary distribution of the neuron-count chain when every proposal has
/// equal evidence: grow with prob p, shrink to max(1, m-1) otherwise,
/// Metropolis-Hastings against a Poisson(lambda) prior. States 1..max_state;
/// a grow from max_state is rejected. Computed by power iteration on the
/// explicit transition matrix.
inline std::vector<double> prior_chain_stationary(double p, double lambda, int max_state = 30) {
  const int S = max_state;
  Matrix P = Matrix::Zero(S, S);
  auto poisson = [&](int m) {
    return std::exp(m * std::log(lambda) - lambda - std::lgamma(m + 1.0));
  };
  for (int m = 1; m <= S; ++m) {
    const int i = m - 1;
    // grow
    if (m < S) {
      const double a = std::min(1.0, ((1.0 - p) * poisson(m + 1)) / (p * poisson(m)));
      P(i, i + 1) += p * a;
      P(i, i) += p * (1.0 - a);
    } else {
      P(i, i) += p;
    }
    // shrink
    if (m == 1) {
      P(i, i) += 1.0 - p;
    } else {
      const double a = std::min(1.0, (p * poisson(m - 1)) / ((1.0 - p) * poisson(m)));
      P(i, i - 1) += (1.0 - p) * a;
      P(i, i) += (1.0 - p) * (1.0 - a);
    }
  }
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(S, 1.0 / S);
  for (int it = 0; it < 100000; ++it) {
    Eigen::RowVectorXd next = pi * P;
    const double diff = (next - pi).cwiseAbs().sum();
    pi = next;
    if (diff < 1e-15) break;
  }
  return std::vector<double>(pi.data(), pi.data() + S);
}

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Pearson goodness of fit. Trailing bins with expected count < 5 are pooled.
inline ChiSquare chi_square_gof(const std::vector<long>& observed,
                                const std::vector<double>& probs) {
  double total = 0;
  for (long o : observed) total += static_cast<double>(o);
  std::vector<double> obs;
  std::vector<double> exp;
  double pool_o = 0;
  double pool_e = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double e = probs[k] * total;
    const double o = k < observed.size() ? static_cast<double>(observed[k]) : 0.0;
    if (e >= 5.0 && pool_e == 0.0) {
      obs.push_back(o);
      exp.push_back(e);
    } else {
      pool_o += o;
      pool_e += e;
    }
  }
  for (std::size_t k = probs.size(); k < observed.size(); ++k) pool_o += static_cast<double>(observed[k]);
  if (pool_e > 0.0) {
    obs.push_back(pool_o);
    exp.push_back(pool_e);
  }
  ChiSquare out;
  for (std::size_t k = 0; k < obs.size(); ++k) out.statistic += (obs[k] - exp[k]) * (obs[k] - exp[k]) / exp[k];
  out.dof = static_cast<int>(obs.size()) - 1;
  boost::math::chi_squared_distribution<double> chi(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(chi, out.statistic));
  return out;
}

/// Sum of N(r_i; pred_i, sigma^2) log-densities, evaluated pointwise.
inline double normal_log_density_sum(const Vector& r, const Vector& pred, double sigma) {
  const double pi = 3.14159265358979323846;
  double s = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double z = (r(i) - pred(i)) / sigma;
    s += std::log(std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * pi)));
  }
  return s;
}

// Friedman test functions written out independently.
inline double f1(double x1, double x2, double x3, double x4, double x5) {
  const double pi = std::acos(-1.0);
  return 10 * std::sin(pi * x1 * x2) + 20 * std::pow(x3 - 0.5, 2) + 10 * x4 + 5 * x5;
}
inline double f2(double x1, double x2, double x3, double x4) {
  return std::hypot(x1, x2 * x3 - 1 / (x2 * x4));
}
inline double f3(double x1, double x2, double x3, double x4) {
  return std::atan((x2 * x3 - 1 / (x2 * x4)) / x1);
}

}  // namespace oracle
