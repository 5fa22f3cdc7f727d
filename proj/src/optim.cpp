#include "barn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace barn::optim {

void OptimConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(grad_tol >= 0.0)) throw std::invalid_argument("grad_tol must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw std::invalid_argument("armijo_c must be in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw std::invalid_argument("backtrack_factor must be in (0, 1)");
  if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be >= 1");
}

std::string_view to_string(OptimStatus s) {
  switch (s) {
    case OptimStatus::Converged: return "converged";
    case OptimStatus::MaxIterations: return "max_iterations";
    case OptimStatus::LineSearchFailed: return "line_search_failed";
    case OptimStatus::NonFinite: return "non_finite";
  }
  return "unknown";
}

namespace {

bool finite(const Vector& v) { return v.allFinite(); }

struct Step {
  bool ok = false;
  Vector x;
  Vector g;
  double f = 0.0;
};

// Secant step on the directional derivative between 0 and t, taken only when
// the line restriction looks quadratic (the trapezoid rule reproduces the
// observed decrease). Kept only if it lowers f and still satisfies Armijo.
void refine(const Objective& obj, const Vector& x, double f, double slope, const Vector& dir,
            double t, Step& s, const OptimConfig& cfg) {
  const double slope_t = s.g.dot(dir);
  if (!(slope_t != slope)) return;
  const double decrease = f - s.f;
  const double trapezoid = -0.5 * t * (slope + slope_t);
  if (!(std::abs(decrease - trapezoid) <= 1e-6 * std::abs(decrease))) return;
  const double t_star = t * slope / (slope - slope_t);
  if (!(t_star > 0.0) || t_star > 4.0 * t || std::abs(t_star - t) <= 1e-6 * t) return;
  Step c;
  c.x = x + t_star * dir;
  c.f = obj.value_and_gradient(c.x, c.g);
  if (std::isfinite(c.f) && finite(c.g) && c.f < s.f && c.f <= f + cfg.armijo_c * t_star * slope) {
    c.ok = true;
    s = std::move(c);
  }
}

Step armijo(const Objective& obj, const Vector& x, double f, const Vector& g, const Vector& dir,
            const OptimConfig& cfg) {
  const double slope = g.dot(dir);
  double t = 1.0;
  Step s;
  for (int k = 0; k < cfg.max_backtracks; ++k, t *= cfg.backtrack_factor) {
    s.x = x + t * dir;
    s.f = obj.value_and_gradient(s.x, s.g);
    if (std::isfinite(s.f) && s.f <= f + cfg.armijo_c * t * slope) {
      s.ok = true;
      if (cfg.secant_refine && finite(s.g)) refine(obj, x, f, slope, dir, t, s, cfg);
      return s;
    }
  }
  s.ok = false;
  return s;
}

}  // namespace

OptimResult minimize(const Objective& obj, const Vector& x0, const OptimConfig& cfg) {
  cfg.validate();
  OptimResult res;
  res.x = x0;
  Vector g;
  res.f = obj.value_and_gradient(res.x, g);
  if (!std::isfinite(res.f) || !finite(g)) {
    res.status = OptimStatus::NonFinite;
    return res;
  }

  const Index n = x0.size();
  Matrix H = Matrix::Identity(n, n);
  bool identity = true;
  res.status = OptimStatus::MaxIterations;

  while (true) {
    if (g.norm() <= cfg.grad_tol) {
      res.status = OptimStatus::Converged;
      break;
    }
    if (res.iterations >= cfg.max_iter) break;

    Vector dir = -(H * g);
    if (!(g.dot(dir) < 0.0)) {
      H.setIdentity();
      identity = true;
      dir = -g;
    }
    Step step = armijo(obj, res.x, res.f, g, dir, cfg);
    if (!step.ok && !identity) {
      // Stale curvature; retry along steepest descent.
      H.setIdentity();
      identity = true;
      dir = -g;
      step = armijo(obj, res.x, res.f, g, dir, cfg);
    }
    if (!step.ok) {
      res.status = OptimStatus::LineSearchFailed;
      break;
    }
    ++res.iterations;
    if (!finite(step.g)) {
      // Value is finite and lower, gradient is not: keep the point, stop.
      res.x = std::move(step.x);
      res.f = step.f;
      res.status = OptimStatus::NonFinite;
      break;
    }

    const Vector s = step.x - res.x;
    const Vector y = step.g - g;
    const double sy = s.dot(y);
    if (sy > cfg.curvature_eps) {
      if (identity) {
        // Rescale the identity before the first update so the initial step
        // length matches the observed curvature.
        H *= sy / y.squaredNorm();
      }
      const Vector Hy = H * y;
      const double yHy = y.dot(Hy);
      H.noalias() += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
      H.noalias() -= (Hy * s.transpose() + s * Hy.transpose()) / sy;
      identity = false;
    }
    res.x = std::move(step.x);
    res.f = step.f;
    g = std::move(step.g);
  }
  return res;
}

OptimResult minimize(const std::function<double(const Vector&)>& f,
                     const std::function<Vector(const Vector&)>& g, const Vector& x0,
                     const OptimConfig& cfg) {
  Objective obj;
  obj.value = f;
  obj.value_and_gradient = [&](const Vector& x, Vector& grad) {
    grad = g(x);
    return f(x);
  };
  return minimize(obj, x0, cfg);
}

TrainResult train(const nn::SingleLayerNet& net, const Matrix& X, const Vector& r,
                  const OptimConfig& optim_cfg, const nn::LossConfig& loss_cfg) {
  require_size("train: input columns", net.inputs(), X.cols());
  require_size("train: target length", X.rows(), r.size());
  loss_cfg.validate();

  nn::FlatObjective flat(X, r, net.neurons(), net.activation(), loss_cfg);
  Objective obj;
  obj.value = [&](const Vector& p) { return flat.value(p); };
  obj.value_and_gradient = [&](const Vector& p, Vector& grad) {
    return flat.value_and_gradient(p, grad);
  };

  const Vector x0 = nn::pack(net);
  OptimResult opt = minimize(obj, x0, optim_cfg);
  if (opt.status == OptimStatus::NonFinite) {
    return {net, flat.value(x0), opt.iterations, opt.status};
  }
  return {nn::unpack(opt.x, net.inputs(), net.neurons(), net.activation()), opt.f,
          opt.iterations, opt.status};
}

}  // namespace barn::optim
