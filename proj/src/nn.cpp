#include "barn/nn.hpp"

#include <cmath>
#include <string>

namespace barn::nn {

namespace {

double sigmoid(double z) {
  // Split on sign so exp never overflows.
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void apply_activation(Activation a, const Matrix& pre, Matrix& out) {
  out.resize(pre.rows(), pre.cols());
  if (a == Activation::Sigmoid) {
    out = pre.unaryExpr([](double z) { return sigmoid(z); });
  } else {
    out = pre.cwiseMax(0.0);
  }
}

// Derivative expressed through the activated value where possible.
void activation_derivative(Activation a, const Matrix& pre, const Matrix& act, Matrix& out) {
  if (a == Activation::Sigmoid) {
    out = act.array() * (1.0 - act.array());
  } else {
    out = (pre.array() > 0.0).cast<double>();
  }
}

}  // namespace

std::string_view to_string(Activation a) {
  return a == Activation::Sigmoid ? "sigmoid" : "relu";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid" || name == "logistic") return Activation::Sigmoid;
  if (name == "relu") return Activation::ReLU;
  throw std::invalid_argument("unknown activation '" + std::string(name) +
                              "' (expected sigmoid or relu)");
}

void LossConfig::validate() const {
  if (!(l2_penalty >= 0.0)) throw std::invalid_argument("l2_penalty must be >= 0");
}

SingleLayerNet::SingleLayerNet(Matrix w_in, Vector b_in, Vector w_out, double b_out,
                               Activation activation)
    : w_in_(std::move(w_in)),
      b_in_(std::move(b_in)),
      w_out_(std::move(w_out)),
      b_out_(b_out),
      activation_(activation) {
  if (w_in_.cols() < 1) throw std::invalid_argument("network needs at least one hidden neuron");
  if (w_in_.rows() < 1) throw std::invalid_argument("network needs at least one input");
  require_size("b_in length", w_in_.cols(), b_in_.size());
  require_size("w_out length", w_in_.cols(), w_out_.size());
}

SingleLayerNet SingleLayerNet::zeros(Index inputs, Index neurons, Activation activation) {
  return SingleLayerNet(Matrix::Zero(inputs, neurons), Vector::Zero(neurons),
                        Vector::Zero(neurons), 0.0, activation);
}

SingleLayerNet SingleLayerNet::random(Index inputs, Index neurons, Activation activation,
                                      Rng& rng) {
  std::normal_distribution<double> hidden(0.0, 1.0 / std::sqrt(static_cast<double>(inputs)));
  std::normal_distribution<double> output(0.0, 1.0 / std::sqrt(static_cast<double>(neurons)));
  Matrix w_in(inputs, neurons);
  for (Index j = 0; j < neurons; ++j)
    for (Index i = 0; i < inputs; ++i) w_in(i, j) = hidden(rng);
  Vector w_out(neurons);
  for (Index j = 0; j < neurons; ++j) w_out(j) = output(rng);
  return SingleLayerNet(std::move(w_in), Vector::Zero(neurons), std::move(w_out), 0.0,
                        activation);
}

bool SingleLayerNet::operator==(const SingleLayerNet& other) const {
  return activation_ == other.activation_ && w_in_.rows() == other.w_in_.rows() &&
         w_in_.cols() == other.w_in_.cols() && w_in_ == other.w_in_ && b_in_ == other.b_in_ &&
         w_out_ == other.w_out_ && b_out_ == other.b_out_;
}

Vector forward(const SingleLayerNet& net, const Matrix& X) {
  require_size("forward: input columns", net.inputs(), X.cols());
  Matrix pre = X * net.w_in();
  pre.rowwise() += net.b_in().transpose();
  Matrix act;
  apply_activation(net.activation(), pre, act);
  Vector out = act * net.w_out();
  out.array() += net.b_out();
  return out;
}

double loss(const SingleLayerNet& net, const Matrix& X, const Vector& r, const LossConfig& cfg) {
  require_size("loss: target length", X.rows(), r.size());
  FlatObjective obj(X, r, net.neurons(), net.activation(), cfg);
  return obj.value(pack(net));
}

Vector gradient(const SingleLayerNet& net, const Matrix& X, const Vector& r,
                const LossConfig& cfg) {
  require_size("gradient: target length", X.rows(), r.size());
  FlatObjective obj(X, r, net.neurons(), net.activation(), cfg);
  Vector g;
  obj.value_and_gradient(pack(net), g);
  return g;
}

Vector pack(const SingleLayerNet& net) {
  const Index d = net.inputs();
  const Index m = net.neurons();
  Vector flat(SingleLayerNet::parameter_count(d, m));
  flat.head(d * m) = Eigen::Map<const Vector>(net.w_in().data(), d * m);
  flat.segment(d * m, m) = net.b_in();
  flat.segment(d * m + m, m) = net.w_out();
  flat(flat.size() - 1) = net.b_out();
  return flat;
}

SingleLayerNet unpack(const Vector& flat, Index inputs, Index neurons, Activation activation) {
  require_size("unpack: flat length", SingleLayerNet::parameter_count(inputs, neurons),
               flat.size());
  const Index d = inputs;
  const Index m = neurons;
  Matrix w_in = Eigen::Map<const Matrix>(flat.data(), d, m);
  return SingleLayerNet(std::move(w_in), flat.segment(d * m, m), flat.segment(d * m + m, m),
                        flat(flat.size() - 1), activation);
}

SingleLayerNet grow(const SingleLayerNet& net, Rng& rng) {
  const Index d = net.inputs();
  const Index m = net.neurons();
  std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  Matrix w_in(d, m + 1);
  w_in.leftCols(m) = net.w_in();
  for (Index i = 0; i < d; ++i) w_in(i, m) = init(rng);
  Vector b_in(m + 1);
  b_in << net.b_in(), 0.0;
  Vector w_out(m + 1);
  w_out << net.w_out(), 0.0;
  return SingleLayerNet(std::move(w_in), std::move(b_in), std::move(w_out), net.b_out(),
                        net.activation());
}

SingleLayerNet shrink(const SingleLayerNet& net) {
  const Index m = net.neurons();
  if (m <= 1) return net;
  return SingleLayerNet(net.w_in().leftCols(m - 1), net.b_in().head(m - 1),
                        net.w_out().head(m - 1), net.b_out(), net.activation());
}

FlatObjective::FlatObjective(const Matrix& X, const Vector& r, Index neurons,
                             Activation activation, LossConfig cfg)
    : X_(X), r_(r), neurons_(neurons), activation_(activation), cfg_(cfg) {
  require_size("objective: target length", X.rows(), r.size());
  if (neurons < 1) throw std::invalid_argument("objective needs at least one neuron");
  if (X.rows() < 1) throw std::invalid_argument("objective needs at least one row");
}

double FlatObjective::value(const Vector& params) { return evaluate(params, nullptr); }

double FlatObjective::value_and_gradient(const Vector& params, Vector& grad) {
  return evaluate(params, &grad);
}

double FlatObjective::evaluate(const Vector& params, Vector* grad) {
  const Index d = X_.cols();
  const Index m = neurons_;
  const Index n = X_.rows();
  require_size("objective: parameter length", dimension(), params.size());

  const Eigen::Map<const Matrix> w_in(params.data(), d, m);
  const auto b_in = params.segment(d * m, m);
  const auto w_out = params.segment(d * m + m, m);
  const double b_out = params(params.size() - 1);

  hidden_.noalias() = X_ * w_in;
  hidden_.rowwise() += b_in.transpose();
  apply_activation(activation_, hidden_, act_);
  err_.noalias() = act_ * w_out;
  err_.array() += b_out - r_.array();

  const double inv_n = 1.0 / static_cast<double>(n);
  const double penalty = w_in.squaredNorm() + w_out.squaredNorm();
  const double value = err_.squaredNorm() * inv_n + cfg_.l2_penalty * penalty;

  if (grad != nullptr) {
    grad->resize(params.size());
    const Vector delta = (2.0 * inv_n) * err_;
    Matrix dact;
    activation_derivative(activation_, hidden_, act_, dact);
    // dL/d(pre-activation), n x m
    dact.array().rowwise() *= w_out.transpose().array();
    dact.array().colwise() *= delta.array();

    Eigen::Map<Matrix> g_w_in(grad->data(), d, m);
    g_w_in.noalias() = X_.transpose() * dact;
    g_w_in += (2.0 * cfg_.l2_penalty) * w_in;
    grad->segment(d * m, m) = dact.colwise().sum().transpose();
    grad->segment(d * m + m, m).noalias() = act_.transpose() * delta;
    grad->segment(d * m + m, m) += (2.0 * cfg_.l2_penalty) * w_out;
    (*grad)(params.size() - 1) = delta.sum();
  }
  return value;
}

}  // namespace barn::nn
