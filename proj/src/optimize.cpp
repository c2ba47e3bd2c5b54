#include "asymflow/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace asymflow {

Vec fd_gradient(const Objective& f, const Vec& x, const DomainFn& in_domain, double h) {
  const std::size_t n = x.size();
  Vec g(n, 0.0);
  Vec xp = x, xm = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = h * std::max(1.0, std::fabs(x[i]));
    xp[i] = x[i] + hi;
    xm[i] = x[i] - hi;
    const bool ok_p = !in_domain || in_domain(xp);
    const bool ok_m = !in_domain || in_domain(xm);
    if (ok_p && ok_m) {
      g[i] = (f(xp) - f(xm)) / (2.0 * hi);
    } else if (ok_p) {
      g[i] = (f(xp) - f(x)) / hi;
    } else if (ok_m) {
      g[i] = (f(x) - f(xm)) / hi;
    }
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

namespace {

Vec mat_vec(const std::vector<double>& H, const Vec& v) {
  const std::size_t n = v.size();
  Vec r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i] += H[i * n + j] * v[j];
  return r;
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, const GradientFn& grad, const Vec& x0,
                             const DomainFn& in_domain, const MinimizeOptions& options) {
  const std::size_t n = x0.size();
  MinimizeResult res;
  res.x = x0;
  res.f = f(x0);
  if (!std::isfinite(res.f)) return res;  // a start outside the domain cannot converge

  Vec g = grad(res.x);
  std::vector<double> H(n * n, 0.0);  // inverse-Hessian approximation
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    res.iterations = iter;
    res.grad_norm = norm(g);
    if (res.grad_norm <= options.grad_tol) {
      res.converged = true;
      return res;
    }

    Vec p = negated(mat_vec(H, g));
    double slope = dot(g, p);
    if (slope >= 0.0) {  // reset a corrupted curvature model
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) H[i * n + j] = (i == j) ? 1.0 : 0.0;
      p = negated(g);
      slope = dot(g, p);
    }

    // Backtracking Armijo; out-of-domain trial points count as +inf.
    double alpha = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Vec x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = axpy(res.x, alpha, p);
      if (!in_domain || in_domain(x_new)) {
        f_new = f(x_new);
        if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No admissible decrease along p: declare convergence at resolution limit.
      res.converged = res.grad_norm < 1e-5;
      return res;
    }

    if (f_new < options.unbounded_floor || max_abs_diff(x_new, x0) > options.max_radius) {
      res.x = x_new;
      res.f = f_new;
      res.unbounded = true;
      return res;
    }

    Vec g_new = grad(x_new);
    Vec s = sub(x_new, res.x);
    Vec y = sub(g_new, g);
    const double sy = dot(s, y);
    if (sy > 1e-14 * norm(s) * norm(y)) {
      // BFGS inverse update: H <- (I - s y^T/sy) H (I - y s^T/sy) + s s^T/sy
      const double rho = 1.0 / sy;
      Vec Hy = mat_vec(H, y);
      const double yHy = dot(y, Hy);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += (1.0 + rho * yHy) * rho * s[i] * s[j] - rho * (s[i] * Hy[j] + Hy[i] * s[j]);
        }
    }

    const double obj_decrease = res.f - f_new;
    const double step_len = norm(s);
    res.x = std::move(x_new);
    res.f = f_new;
    g = std::move(g_new);

    if (step_len < options.step_tol && obj_decrease < options.obj_tol) {
      res.grad_norm = norm(g);
      res.converged = true;
      return res;
    }
  }
  res.grad_norm = norm(g);
  res.converged = res.grad_norm <= std::max(options.grad_tol, 1e-7);
  return res;
}

}  // namespace asymflow
