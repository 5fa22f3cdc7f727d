#pragma once

#include "barn/common.hpp"

#include <string_view>

namespace barn::nn {

enum class Activation { Sigmoid, ReLU };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct LossConfig {
  /// Penalty on the squared norm of the connection weights (biases are not
  /// penalized).
  double l2_penalty = 0.001;

  void validate() const;
};

/// Dense network with one hidden layer and a scalar output:
///
///   out(x) = b_out + sum_j w_out[j] * act(x . w_in[:, j] + b_in[j])
///
/// Always holds at least one hidden neuron. Instances are immutable values;
/// architecture changes go through grow() and shrink().
class SingleLayerNet {
 public:
  SingleLayerNet(Matrix w_in, Vector b_in, Vector w_out, double b_out, Activation activation);

  static SingleLayerNet zeros(Index inputs, Index neurons, Activation activation);

  /// Hidden weights ~ N(0, 1/d), output weights ~ N(0, 1/m), biases zero.
  static SingleLayerNet random(Index inputs, Index neurons, Activation activation, Rng& rng);

  Index inputs() const noexcept { return w_in_.rows(); }
  Index neurons() const noexcept { return w_in_.cols(); }
  Activation activation() const noexcept { return activation_; }

  const Matrix& w_in() const noexcept { return w_in_; }
  const Vector& b_in() const noexcept { return b_in_; }
  const Vector& w_out() const noexcept { return w_out_; }
  double b_out() const noexcept { return b_out_; }

  /// d*m + m + m + 1.
  Index parameter_count() const noexcept { return parameter_count(inputs(), neurons()); }
  static Index parameter_count(Index inputs, Index neurons) noexcept {
    return inputs * neurons + 2 * neurons + 1;
  }

  bool operator==(const SingleLayerNet& other) const;

 private:
  Matrix w_in_;
  Vector b_in_;
  Vector w_out_;
  double b_out_;
  Activation activation_;
};

Vector forward(const SingleLayerNet& net, const Matrix& X);

/// Mean squared error against r plus l2_penalty * (|w_in|^2 + |w_out|^2).
double loss(const SingleLayerNet& net, const Matrix& X, const Vector& r, const LossConfig& cfg);

/// Gradient of loss() in pack() layout.
Vector gradient(const SingleLayerNet& net, const Matrix& X, const Vector& r, const LossConfig& cfg);

/// Flat layout: w_in column-major (d*m), then b_in (m), w_out (m), b_out (1).
Vector pack(const SingleLayerNet& net);
SingleLayerNet unpack(const Vector& flat, Index inputs, Index neurons, Activation activation);

/// Appends one neuron. Existing weights are copied; the new column of w_in is
/// N(0, 1/d) and its bias and output weight are zero, so predictions are
/// unchanged until the net is retrained.
SingleLayerNet grow(const SingleLayerNet& net, Rng& rng);

/// Drops the last neuron. A one-neuron net is returned as is.
SingleLayerNet shrink(const SingleLayerNet& net);

/// Loss and gradient evaluated directly on a flat parameter vector, reusing
/// scratch buffers. This is the training hot path.
class FlatObjective {
 public:
  FlatObjective(const Matrix& X, const Vector& r, Index neurons, Activation activation,
                LossConfig cfg);

  double value(const Vector& params);
  double value_and_gradient(const Vector& params, Vector& grad);

  Index dimension() const noexcept { return SingleLayerNet::parameter_count(X_.cols(), neurons_); }

 private:
  double evaluate(const Vector& params, Vector* grad);

  const Matrix& X_;
  const Vector& r_;
  Index neurons_;
  Activation activation_;
  LossConfig cfg_;
  Matrix hidden_;
  Matrix act_;
  Vector err_;
};

}  // namespace barn::nn
