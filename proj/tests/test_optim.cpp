#include "barn/optim.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace barn;
using optim::OptimConfig;
using optim::OptimStatus;

namespace {

double rosenbrock(const Vector& x) {
  return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
}

Vector rosenbrock_grad(const Vector& x) {
  Vector g(2);
  g(0) = -400.0 * x(0) * (x(1) - x(0) * x(0)) - 2.0 * (1.0 - x(0));
  g(1) = 200.0 * (x(1) - x(0) * x(0));
  return g;
}

}  // namespace

TEST_CASE("minimize: convex quadratic") {
  const auto res = optim::minimize([](const Vector& x) { return x.squaredNorm(); },
                                   [](const Vector& x) -> Vector { return 2.0 * x; },
                                   Vector{{3.0, 4.0}});
  CHECK(res.x.norm() < 1e-6);
  CHECK(res.f < 1e-12);
  CHECK(res.status == OptimStatus::Converged);
}

TEST_CASE("minimize: Rosenbrock from (-1.2, 1)") {
  const auto res = optim::minimize(rosenbrock, rosenbrock_grad, Vector{{-1.2, 1.0}});
  CHECK(res.f < 1e-8);
  CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.iterations <= 100);
}

TEST_CASE("minimize: stationary start returns immediately") {
  const Vector x0{{1.0, -2.0}};
  const auto res = optim::minimize([](const Vector& x) { return (x - Vector{{1.0, -2.0}}).squaredNorm(); },
                                   [](const Vector& x) -> Vector { return 2.0 * (x - Vector{{1.0, -2.0}}); },
                                   x0);
  CHECK(res.iterations == 0);
  CHECK(res.x == x0);
  CHECK(res.status == OptimStatus::Converged);
}

TEST_CASE("minimize: strictly convex quadratics converge within 3d iterations") {
  Rng rng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> eig(1.0, 20.0);
  for (int d = 1; d <= 10; ++d) {
    for (int rep = 0; rep < 5; ++rep) {
      Matrix Q(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) Q(i, j) = n(rng);
      const Matrix U = Eigen::HouseholderQR<Matrix>(Q).householderQ();
      Vector lam(d);
      for (int i = 0; i < d; ++i) lam(i) = eig(rng);
      const Matrix A = U * lam.asDiagonal() * U.transpose();
      Vector b(d);
      for (int i = 0; i < d; ++i) b(i) = n(rng);
      const Vector x_star = A.ldlt().solve(b);

      OptimConfig cfg;
      cfg.max_iter = 3 * d;
      cfg.grad_tol = 1e-13;
      Vector x0(d);
      for (int i = 0; i < d; ++i) x0(i) = 3.0 * n(rng);
      const auto res = optim::minimize([&](const Vector& x) { return 0.5 * x.dot(A * x) - b.dot(x); },
                                       [&](const Vector& x) -> Vector { return A * x - b; }, x0, cfg);
      CHECK(res.iterations <= 3 * d);
      CHECK((res.x - x_star).norm() < 1e-8);
    }
  }
}

TEST_CASE("minimize never increases the objective and is deterministic") {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  auto f = [](const Vector& x) { return std::sin(3 * x(0)) * std::cos(2 * x(1)) + 0.1 * x.squaredNorm(); };
  auto g = [](const Vector& x) -> Vector {
    return Vector{{3 * std::cos(3 * x(0)) * std::cos(2 * x(1)) + 0.2 * x(0),
                   -2 * std::sin(3 * x(0)) * std::sin(2 * x(1)) + 0.2 * x(1)}};
  };
  for (int t = 0; t < 100; ++t) {
    const Vector x0{{n(rng), n(rng)}};
    const auto a = optim::minimize(f, g, x0);
    const auto b = optim::minimize(f, g, x0);
    CHECK(a.f <= f(x0));
    CHECK(a.x == b.x);
    CHECK(a.f == b.f);
  }
}

TEST_CASE("minimize: non-finite gradient returns the best finite iterate, flagged") {
  auto f = [](const Vector& x) { return (x(0) - 3.0) * (x(0) - 3.0); };
  auto g = [](const Vector& x) -> Vector {
    if (x(0) > 1.0) return Vector{{std::numeric_limits<double>::quiet_NaN()}};
    return Vector{{2.0 * (x(0) - 3.0)}};
  };
  const Vector x0{{0.0}};
  const auto res = optim::minimize(f, g, x0);
  CHECK(res.status == OptimStatus::NonFinite);
  CHECK(std::isfinite(res.f));
  CHECK(res.f <= f(x0));
}

TEST_CASE("minimize: non-finite start is flagged, not thrown") {
  auto f = [](const Vector&) { return std::numeric_limits<double>::infinity(); };
  auto g = [](const Vector& x) -> Vector { return x; };
  const auto res = optim::minimize(f, g, Vector{{1.0}});
  CHECK(res.status == OptimStatus::NonFinite);
  CHECK(res.x(0) == 1.0);
}

TEST_CASE("config validation") {
  OptimConfig c;
  c.max_iter = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.grad_tol = -1;
  CHECK_THROWS(c.validate());
}

// ---------------------------------------------------------------------------

namespace {

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = n(rng);
  return M;
}

}  // namespace

TEST_CASE("train: zero residual on a zero net stays at zero") {
  const auto zero = nn::SingleLayerNet::zeros(3, 2, nn::Activation::Sigmoid);
  Rng rng(1);
  const Matrix X = gaussian(30, 3, rng);
  const auto res = optim::train(zero, X, Vector::Zero(30));
  CHECK(res.net == zero);
  CHECK(res.iterations == 0);
}

TEST_CASE("train: teacher-student reaches the teacher's regularized loss") {
  Rng rng(17);
  const Matrix X = gaussian(200, 3, rng);
  Matrix w_in(3, 2);
  w_in << 0.8, -0.5, 0.3, 0.9, -0.6, 0.2;
  Vector b_in{{0.1, -0.2}};
  Vector w_out{{1.2, -0.8}};
  const nn::SingleLayerNet teacher(w_in, b_in, w_out, 0.3, nn::Activation::Sigmoid);
  const Vector r = nn::forward(teacher, X);
  const nn::LossConfig loss_cfg;
  const double teacher_loss = nn::loss(teacher, X, r, loss_cfg);  // the l2 term alone

  std::normal_distribution<double> jitter(0.0, 0.3);
  Vector p = nn::pack(teacher);
  for (Index k = 0; k < p.size(); ++k) p(k) += jitter(rng);
  const auto student = nn::unpack(p, 3, 2, nn::Activation::Sigmoid);
  CHECK(nn::loss(student, X, r, loss_cfg) > teacher_loss + 1e-3);

  OptimConfig cfg;
  cfg.max_iter = 500;
  const auto res = optim::train(student, X, r, cfg, loss_cfg);
  CHECK(res.loss <= teacher_loss + 1e-6);
  CHECK(res.net.neurons() == 2);
}

TEST_CASE("train: never worsens the loss and keeps the architecture") {
  Rng rng(99);
  std::uniform_int_distribution<int> dim(1, 4);
  for (int t = 0; t < 100; ++t) {
    const Index d = dim(rng);
    const Index m = dim(rng);
    const auto a = t % 2 ? nn::Activation::ReLU : nn::Activation::Sigmoid;
    const auto net = nn::SingleLayerNet::random(d, m, a, rng);
    const Matrix X = gaussian(25, d, rng);
    const Vector r = gaussian(25, 1, rng);
    const auto res = optim::train(net, X, r);
    CHECK(nn::loss(res.net, X, r, {}) <= nn::loss(net, X, r, {}));
    CHECK(res.net.inputs() == d);
    CHECK(res.net.neurons() == m);
    CHECK(res.net.activation() == a);
    CHECK(nn::pack(res.net).allFinite());
  }
}

TEST_CASE("train: non-finite objective comes back as the untouched input net") {
  const auto net = nn::SingleLayerNet::zeros(2, 1, nn::Activation::Sigmoid);
  Matrix X = Matrix::Ones(4, 2);
  Vector r = Vector::Ones(4);
  r(0) = std::numeric_limits<double>::infinity();
  const auto res = optim::train(net, X, r);
  CHECK(res.status == OptimStatus::NonFinite);
  CHECK(res.net == net);
}

TEST_CASE("train is bit-for-bit deterministic") {
  Rng rng(3);
  const auto net = nn::SingleLayerNet::random(3, 2, nn::Activation::Sigmoid, rng);
  const Matrix X = gaussian(40, 3, rng);
  const Vector r = gaussian(40, 1, rng);
  CHECK(optim::train(net, X, r).net == optim::train(net, X, r).net);
}
