#include "barn/nn.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace barn;
using nn::Activation;
using nn::SingleLayerNet;

namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = n(rng);
  return M;
}

SingleLayerNet random_net(Index d, Index m, Activation a, Rng& rng) {
  return SingleLayerNet(random_matrix(d, m, rng), random_matrix(m, 1, rng), random_matrix(m, 1, rng),
                        std::normal_distribution<double>(0, 1)(rng), a);
}

}  // namespace

TEST_CASE("forward: zero weights give the output bias") {
  const auto net = SingleLayerNet::zeros(3, 1, Activation::Sigmoid);
  const Matrix X = Matrix::Random(5, 3);
  const Vector out = nn::forward(net, X);
  for (Index i = 0; i < out.size(); ++i) CHECK(out(i) == 0.0);
}

TEST_CASE("forward: relu clamps negative pre-activations") {
  Matrix w_in(1, 1);
  w_in << 1.0;
  const SingleLayerNet net(w_in, Vector::Zero(1), Vector::Ones(1), 0.0, Activation::ReLU);
  Matrix X(1, 1);
  X << -3.0;
  CHECK(nn::forward(net, X)(0) == 0.0);
  X << 2.5;
  CHECK(nn::forward(net, X)(0) == 2.5);
}

TEST_CASE("forward: hand-set two-neuron sigmoid net matches scalar evaluation") {
  Matrix w_in(2, 2);
  w_in << 0.5, -1.0, 2.0, 0.25;
  Vector b_in(2);
  b_in << 0.1, -0.3;
  Vector w_out(2);
  w_out << 1.5, -0.7;
  const SingleLayerNet net(w_in, b_in, w_out, 0.2, Activation::Sigmoid);
  Matrix X(3, 2);
  X << 1.0, 2.0, -0.5, 0.0, 3.0, -1.0;
  const Vector out = nn::forward(net, X);
  for (Index i = 0; i < 3; ++i) CHECK(out(i) == doctest::Approx(oracle::scalar_forward(net, X, i)).epsilon(1e-14));
}

TEST_CASE("forward: dimension mismatch names expected and actual input width") {
  const auto net = SingleLayerNet::zeros(3, 2, Activation::Sigmoid);
  try {
    nn::forward(net, Matrix::Zero(4, 2));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.expected() == 3);
    CHECK(e.actual() == 2);
  }
}

TEST_CASE("forward is pure and deterministic") {
  Rng rng(7);
  const auto net = random_net(4, 3, Activation::Sigmoid, rng);
  const Matrix X = random_matrix(20, 4, rng);
  const Vector a = nn::forward(net, X);
  const Vector b = nn::forward(net, X);
  CHECK(a == b);
}

TEST_CASE("loss examples") {
  nn::LossConfig no_l2{0.0};
  const auto zero = SingleLayerNet::zeros(2, 1, Activation::Sigmoid);
  const Matrix X = Matrix::Random(4, 2);
  CHECK(nn::loss(zero, X, Vector::Zero(4), nn::LossConfig{}) == 0.0);
  CHECK(nn::loss(zero, X, Vector::Ones(4), no_l2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(nn::loss(zero, X, Vector::Ones(3), no_l2), DimensionError);

  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto net = random_net(3, 2, t % 2 ? Activation::ReLU : Activation::Sigmoid, rng);
    const Matrix Xr = random_matrix(15, 3, rng);
    const Vector r = random_matrix(15, 1, rng);
    const double expected = oracle::brute_loss(net, Xr, r, 0.01);
    CHECK(nn::loss(net, Xr, r, nn::LossConfig{0.01}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(nn::loss(net, Xr, r, nn::LossConfig{0.01}) >= 0.0);
  }
}

TEST_CASE("gradient: zero residual and zero weights is stationary") {
  const auto zero = SingleLayerNet::zeros(3, 2, Activation::Sigmoid);
  const Vector g = nn::gradient(zero, Matrix::Random(6, 3), Vector::Zero(6), nn::LossConfig{0.0});
  CHECK(g.size() == zero.parameter_count());
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient matches central differences on random instances") {
  Rng rng(2024);
  std::uniform_int_distribution<int> dim(1, 5);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index d = dim(rng);
    const Index m = dim(rng);
    const auto a = t % 2 ? Activation::ReLU : Activation::Sigmoid;
    const auto net = random_net(d, m, a, rng);
    const Matrix X = random_matrix(12, d, rng);
    const Vector r = random_matrix(12, 1, rng);
    const Vector g = nn::gradient(net, X, r, nn::LossConfig{0.001});
    const Vector fd = oracle::fd_gradient(net, X, r, 0.001);
    worst = std::max(worst, oracle::max_relative_error(g, fd));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("gradient: with the data term removed only the weight penalty remains") {
  Rng rng(5);
  const auto net = random_net(3, 2, Activation::Sigmoid, rng);
  const Matrix X = random_matrix(10, 3, rng);
  const Vector r = nn::forward(net, X);
  const double l2 = 0.05;
  const Vector g = nn::gradient(net, X, r, nn::LossConfig{l2});
  const Vector p = nn::pack(net);
  // w_in block then w_out block; biases have zero gradient.
  for (Index k = 0; k < 6; ++k) CHECK(g(k) == doctest::Approx(2 * l2 * p(k)).epsilon(1e-12));
  for (Index k = 6; k < 8; ++k) CHECK(g(k) == doctest::Approx(0.0));
  for (Index k = 8; k < 10; ++k) CHECK(g(k) == doctest::Approx(2 * l2 * p(k)).epsilon(1e-12));
  CHECK(g(10) == doctest::Approx(0.0));
}

TEST_CASE("pack/unpack") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Index d = 1 + t % 4;
    const Index m = 1 + t % 3;
    const auto net = random_net(d, m, t % 2 ? Activation::ReLU : Activation::Sigmoid, rng);
    const Vector flat = nn::pack(net);
    CHECK(flat.size() == d * m + m + m + 1);
    CHECK(nn::unpack(flat, d, m, net.activation()) == net);
  }
  CHECK(nn::pack(SingleLayerNet::zeros(4, 3, Activation::Sigmoid)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(nn::unpack(Vector::Zero(5), 2, 2, Activation::Sigmoid), DimensionError);

  // documented layout
  Matrix w_in(2, 2);
  w_in << 1, 2, 3, 4;
  const SingleLayerNet net(w_in, Vector::Constant(2, 5), Vector::Constant(2, 6), 7, Activation::Sigmoid);
  Vector expected(9);
  expected << 1, 3, 2, 4, 5, 5, 6, 6, 7;
  CHECK(nn::pack(net) == expected);
}

TEST_CASE("constructor rejects zero neurons and inconsistent shapes") {
  CHECK_THROWS(SingleLayerNet(Matrix::Zero(2, 0), Vector(), Vector(), 0, Activation::Sigmoid));
  CHECK_THROWS_AS(SingleLayerNet(Matrix::Zero(2, 2), Vector::Zero(3), Vector::Zero(2), 0, Activation::Sigmoid),
                  DimensionError);
}

TEST_CASE("grow keeps existing neurons and appends a neutral one") {
  Rng rng(9);
  const auto net = random_net(3, 1, Activation::Sigmoid, rng);
  Rng g(42);
  const auto grown = nn::grow(net, g);
  CHECK(grown.neurons() == 2);
  CHECK(grown.w_in().col(0) == net.w_in().col(0));
  CHECK(grown.b_in()(0) == net.b_in()(0));
  CHECK(grown.w_out()(0) == net.w_out()(0));
  CHECK(grown.b_out() == net.b_out());
  CHECK(grown.b_in()(1) == 0.0);
  CHECK(grown.w_out()(1) == 0.0);
  CHECK(grown.w_in().allFinite());

  Rng g2(42);
  CHECK(nn::grow(net, g2) == grown);
}

TEST_CASE("grow: new hidden weights follow N(0, 1/d)") {
  const Index d = 4;
  const auto net = SingleLayerNet::zeros(d, 1, Activation::Sigmoid);
  Rng rng(123);
  const int draws = 10000;
  double sum = 0.0;
  double sumsq = 0.0;
  long count = 0;
  for (int t = 0; t < draws; ++t) {
    const auto grown = nn::grow(net, rng);
    for (Index i = 0; i < d; ++i) {
      const double w = grown.w_in()(i, 1);
      sum += w;
      sumsq += w * w;
      ++count;
    }
  }
  const double mean = sum / count;
  const double var = sumsq / count - mean * mean;
  const double expected_var = 1.0 / d;
  // 4 standard errors
  CHECK(std::abs(mean) < 4.0 * std::sqrt(expected_var / count));
  CHECK(std::abs(var - expected_var) < 4.0 * expected_var * std::sqrt(2.0 / count));
}

TEST_CASE("shrink drops the last neuron and floors at one") {
  Rng rng(4);
  const auto net = random_net(2, 3, Activation::ReLU, rng);
  const auto s = nn::shrink(net);
  CHECK(s.neurons() == 2);
  CHECK(s.w_in() == net.w_in().leftCols(2));
  CHECK(s.w_out() == net.w_out().head(2));
  CHECK(s.b_out() == net.b_out());

  const auto one = random_net(2, 1, Activation::ReLU, rng);
  CHECK(nn::shrink(one) == one);
}

TEST_CASE("shrink(grow(net)) reproduces the original predictions exactly") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto net = random_net(3, 1 + t % 4, Activation::Sigmoid, rng);
    const Matrix X = random_matrix(10, 3, rng);
    const auto round_trip = nn::shrink(nn::grow(net, rng));
    CHECK(round_trip == net);
    CHECK(nn::forward(round_trip, X) == nn::forward(net, X));
    // The freshly grown net also predicts identically since its new output weight is zero.
    const auto grown = nn::grow(net, rng);
    CHECK((nn::forward(grown, X) - nn::forward(net, X)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("grow/shrink neuron-count invariants") {
  Rng rng(10);
  auto net = SingleLayerNet::zeros(2, 1, Activation::Sigmoid);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 200; ++t) {
    const Index m = net.neurons();
    if (coin(rng)) {
      net = nn::grow(net, rng);
      CHECK(net.neurons() == m + 1);
    } else {
      net = nn::shrink(net);
      CHECK(net.neurons() == std::max<Index>(1, m - 1));
    }
    CHECK(net.neurons() >= 1);
  }
}

TEST_CASE("activation names round-trip") {
  CHECK(nn::parse_activation("sigmoid") == Activation::Sigmoid);
  CHECK(nn::parse_activation("relu") == Activation::ReLU);
  CHECK(nn::to_string(Activation::ReLU) == "relu");
  CHECK_THROWS(nn::parse_activation("tanh"));
}
