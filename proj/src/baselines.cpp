#include "barn/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace barn::baselines {

OlsModel ols_fit(const Matrix& X, const Vector& y) {
  require_size("ols_fit: target length", X.rows(), y.size());
  if (X.rows() < 1) throw std::invalid_argument("ols_fit: need at least one row");
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Matrix Xc = X.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;

  OlsModel model;
  model.coefficients.resize(X.cols() + 1);
  if (X.cols() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Xc);
    // Treat columns that are constant up to rounding as exactly rank deficient.
    cod.setThreshold(1e-12);
    model.coefficients.head(X.cols()) = cod.solve(yc);
  }
  model.coefficients(X.cols()) = y_mean - x_mean.dot(model.coefficients.head(X.cols()));
  return model;
}

Vector ols_predict(const OlsModel& model, const Matrix& X) {
  require_size("ols_predict: feature count", model.coefficients.size() - 1, X.cols());
  Vector out = X * model.slopes();
  out.array() += model.intercept();
  return out;
}

void BigNNConfig::validate() const {
  if (neuron_multiplier < 1) throw std::invalid_argument("neuron_multiplier must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  loss.validate();
}

nn::SingleLayerNet glorot_init(Index inputs, Index neurons, nn::Activation activation, Rng& rng) {
  const double lim_in = std::sqrt(6.0 / static_cast<double>(inputs + neurons));
  const double lim_out = std::sqrt(6.0 / static_cast<double>(neurons + 1));
  std::uniform_real_distribution<double> u_in(-lim_in, lim_in);
  std::uniform_real_distribution<double> u_out(-lim_out, lim_out);
  Matrix w_in(inputs, neurons);
  for (Index j = 0; j < neurons; ++j)
    for (Index i = 0; i < inputs; ++i) w_in(i, j) = u_in(rng);
  Vector w_out(neurons);
  for (Index j = 0; j < neurons; ++j) w_out(j) = u_out(rng);
  return nn::SingleLayerNet(std::move(w_in), Vector::Zero(neurons), std::move(w_out), 0.0,
                            activation);
}

BigNNResult bignn_fit(const Matrix& X, const Vector& y, int total_barn_neurons,
                      const BigNNConfig& cfg) {
  cfg.validate();
  if (total_barn_neurons < 1) throw std::invalid_argument("total_barn_neurons must be >= 1");
  require_size("bignn_fit: target length", X.rows(), y.size());

  Rng rng(cfg.seed);
  const Index m = static_cast<Index>(cfg.neuron_multiplier) * total_barn_neurons;
  const auto init = glorot_init(X.cols(), m, cfg.activation, rng);

  nn::FlatObjective obj(X, y, m, cfg.activation, cfg.loss);
  Vector params = nn::pack(init);
  Vector grad;
  Vector m1 = Vector::Zero(params.size());
  Vector m2 = Vector::Zero(params.size());
  double b1t = 1.0;
  double b2t = 1.0;
  Vector last_good = params;
  bool finite = true;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double f = obj.value_and_gradient(params, grad);
    if (!std::isfinite(f) || !grad.allFinite()) {
      finite = false;
      params = last_good;
      break;
    }
    last_good = params;
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
    m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    const double step = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    params.array() -= step * m1.array() / (m2.array().sqrt() + cfg.epsilon);
  }
  double f = obj.value(params);
  if (!std::isfinite(f)) {
    finite = false;
    params = last_good;
    f = obj.value(params);
  }
  return {nn::unpack(params, X.cols(), m, cfg.activation), f, finite};
}

}  // namespace barn::baselines
