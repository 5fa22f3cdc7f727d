#pragma once

#include "barn/common.hpp"
#include "barn/nn.hpp"

#include <functional>
#include <string_view>

namespace barn::optim {

struct OptimConfig {
  int max_iter = 100;
  double grad_tol = 1e-5;
  // Backtracking Armijo line search.
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 40;
  /// After an accepted step on a locally quadratic line, also try the secant
  /// minimizer of the directional derivative.
  bool secant_refine = true;
  /// Skip the inverse-Hessian update when s'y is at or below this.
  double curvature_eps = 1e-10;

  void validate() const;
};

enum class OptimStatus {
  Converged,        ///< gradient norm <= grad_tol
  MaxIterations,
  LineSearchFailed, ///< no Armijo step found even along steepest descent
  NonFinite,        ///< objective or gradient went non-finite; best iterate returned
};

std::string_view to_string(OptimStatus s);

struct OptimResult {
  Vector x;
  double f = 0.0;
  int iterations = 0;
  OptimStatus status = OptimStatus::MaxIterations;
};

/// A smooth objective. value_and_gradient fills the gradient and returns f.
struct Objective {
  std::function<double(const Vector&)> value;
  std::function<double(const Vector&, Vector&)> value_and_gradient;
};

/// BFGS on the inverse Hessian, starting from the identity, with an Armijo
/// backtracking line search. f(result.x) <= f(x0) always holds.
OptimResult minimize(const Objective& objective, const Vector& x0, const OptimConfig& cfg = {});

/// Separate value and gradient callbacks.
OptimResult minimize(const std::function<double(const Vector&)>& f,
                     const std::function<Vector(const Vector&)>& g, const Vector& x0,
                     const OptimConfig& cfg = {});

struct TrainResult {
  nn::SingleLayerNet net;
  double loss = 0.0;
  int iterations = 0;
  OptimStatus status = OptimStatus::MaxIterations;
};

/// Fits the weights of `net` to (X, r), keeping its architecture. If the
/// optimizer hits a non-finite value the input weights come back unchanged
/// with status NonFinite.
TrainResult train(const nn::SingleLayerNet& net, const Matrix& X, const Vector& r,
                  const OptimConfig& optim_cfg = {}, const nn::LossConfig& loss_cfg = {});

}  // namespace barn::optim
