#pragma once

#include "barn/common.hpp"
#include "barn/nn.hpp"

namespace barn::baselines {

/// Least-squares linear model; coefficients hold d slopes then the intercept.
struct OlsModel {
  Vector coefficients;

  double intercept() const { return coefficients(coefficients.size() - 1); }
  auto slopes() const { return coefficients.head(coefficients.size() - 1); }
};

/// Solved on centered data with a complete orthogonal decomposition, so a
/// rank-deficient design yields the minimum-norm slope vector.
OlsModel ols_fit(const Matrix& X, const Vector& y);
Vector ols_predict(const OlsModel& model, const Matrix& X);

struct BigNNConfig {
  int neuron_multiplier = 1;
  double learning_rate = 1e-4;
  int epochs = 2000;
  nn::Activation activation = nn::Activation::Sigmoid;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  nn::LossConfig loss;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BigNNResult {
  nn::SingleLayerNet net;
  double final_loss = 0.0;
  bool finite = true; ///< false if training diverged; net holds the last finite weights
};

/// Glorot-uniform initialization, zero biases.
nn::SingleLayerNet glorot_init(Index inputs, Index neurons, nn::Activation activation, Rng& rng);

/// One wide hidden layer of multiplier * total_barn_neurons units trained by
/// full-batch Adam.
BigNNResult bignn_fit(const Matrix& X, const Vector& y, int total_barn_neurons,
                      const BigNNConfig& cfg);

}  // namespace barn::baselines
