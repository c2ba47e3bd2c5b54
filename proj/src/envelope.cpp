#include "asymflow/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asymflow/errors.hpp"
#include "asymflow/optimize.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

namespace asymflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Vec differential(const Potential& phi, const Vec& x) {
  if (phi.grad) return phi.grad(x);
  if (!phi.smooth) throw unsupported_operation("differential: potential is not smooth");
  return fd_gradient(phi.value, x, nullptr);
}

double phi_functional(const Potential& phi, const SpaceHandle& space, double tau, const Vec& x,
                      const Vec& y) {
  if (tau <= 0.0) throw parameter_error("phi_functional requires tau > 0");
  if (!space.in_domain(x) || !space.in_domain(y))
    throw domain_error("phi_functional: point outside domain");
  const double fy = phi.value(y);
  if (!std::isfinite(fy)) return kInf;
  const double p = phi.p;
  return fy + std::pow(space.distance(x, y), p) / (p * std::pow(tau, p - 1.0));
}

namespace {

// Gradient of y -> d(x,y)^p / (p tau^{p-1}); vanishes continuously at y = x
// for p > 1.
Vec distance_power_grad(const SpaceHandle& space, double p, double tau, const Vec& x,
                        const Vec& y) {
  const double d = space.distance(x, y);
  if (d < 1e-14) return zeros(y.size());
  const double w = std::pow(d / tau, p - 1.0);
  if (space.distance_grad_y) return scaled(space.distance_grad_y(x, y), w);
  auto dist_y = [&](const Vec& yy) { return space.distance(x, yy); };
  return scaled(fd_gradient(dist_y, y, space.in_domain), w);
}

struct InnerObjective {
  const Potential* phi;
  const SpaceHandle* space;
  double tau;
  const Vec* x;
  double barrier = 0.0;  // weight of -log(1 - ||y||^2) for ball domains

  double operator()(const Vec& y) const {
    if (!space->in_domain(y)) return kInf;
    double f = phi_functional(*phi, *space, tau, *x, y);
    if (barrier > 0.0) f -= barrier * std::log1p(-norm_sq(y));
    return f;
  }

  Vec grad(const Vec& y) const {
    Vec g = phi->grad ? phi->grad(y) : fd_gradient(phi->value, y, space->in_domain);
    g = add(g, distance_power_grad(*space, phi->p, tau, *x, y));
    if (barrier > 0.0) {
      const double m = 1.0 - norm_sq(y);
      g = axpy(g, 2.0 * barrier / m, y);
    }
    return g;
  }
};

}  // namespace

ResolventResult resolvent(const Potential& phi, const SpaceHandle& space, double tau, const Vec& x,
                          const SolverConfig& config) {
  if (tau <= 0.0) throw parameter_error("resolvent requires tau > 0");
  if (!space.in_domain(x)) throw domain_error("resolvent: base point outside domain");

  InnerObjective obj{&phi, &space, tau, &x, 0.0};
  MinimizeOptions mo;
  mo.max_iter = config.max_iter;
  mo.grad_tol = config.grad_tol;
  mo.step_tol = config.arg_tol * 1e-4;
  mo.obj_tol = config.tol * 1e-4;

  Rng rng(config.seed);
  struct Candidate {
    Vec y;
    double f;
    double grad_norm;
    int iters;
  };
  std::vector<Candidate> converged;
  Candidate best_any{x, kInf, kInf, 0};
  int total_iters = 0;

  const int n_starts = std::max(1, config.n_restarts);
  for (int k = 0; k < n_starts; ++k) {
    Vec y0 = x;
    if (k > 0) {
      // Seeded perturbations around x, shrunk until in-domain.
      Vec step = rng.unit_vector(space.dim);
      double radius = config.restart_radius * (1.0 + 0.5 * (k - 1));
      y0 = axpy(x, radius, step);
      for (int shrink = 0; shrink < 60 && !space.in_domain(y0); ++shrink) {
        radius *= 0.5;
        y0 = axpy(x, radius, step);
      }
      if (!space.in_domain(y0)) y0 = x;
    }

    Vec y_start = y0;
    if (config.barrier_strength > 0.0) {
      InnerObjective barrier_obj = obj;
      barrier_obj.barrier = config.barrier_strength;
      auto f1 = [&](const Vec& y) { return barrier_obj(y); };
      auto g1 = [&](const Vec& y) { return barrier_obj.grad(y); };
      MinimizeOptions warm = mo;
      warm.grad_tol = 1e-6;
      warm.max_iter = config.max_iter / 2;
      MinimizeResult pre = minimize_bfgs(f1, g1, y_start, space.in_domain, warm);
      if (pre.unbounded) throw coercivity_error("resolvent: inner objective unbounded below");
      if (space.in_domain(pre.x)) y_start = pre.x;
    }

    auto f = [&](const Vec& y) { return obj(y); };
    auto g = [&](const Vec& y) { return obj.grad(y); };
    MinimizeResult r = minimize_bfgs(f, g, y_start, space.in_domain, mo);
    total_iters += r.iterations;
    if (r.unbounded) throw coercivity_error("resolvent: inner objective unbounded below");
    if (r.f < best_any.f) best_any = {r.x, r.f, r.grad_norm, r.iterations};
    if (r.converged) converged.push_back({r.x, r.f, r.grad_norm, r.iterations});
  }

  if (converged.empty())
    throw convergence_error("resolvent: no restart converged", best_any.y, best_any.f);

  // Best objective wins; among ties (< 1e-12) the lexicographically smallest
  // iterate. d+/d- bracket d(x, J_tau[x]) over all tied restarts.
  double f_best = kInf;
  for (const auto& c : converged) f_best = std::min(f_best, c.f);
  const Candidate* winner = nullptr;
  double d_plus = 0.0, d_minus = kInf;
  double gap = kInf;
  for (const auto& c : converged) {
    if (c.f > f_best + 1e-12) continue;
    const double d = space.distance(x, c.y);
    d_plus = std::max(d_plus, d);
    d_minus = std::min(d_minus, d);
    gap = std::min(gap, c.grad_norm);
    if (winner == nullptr || lex_less(c.y, winner->y)) winner = &c;
  }

  ResolventResult out;
  out.y_tau = winner->y;
  out.phi_tau = f_best;
  out.d_plus = d_plus;
  out.d_minus = d_minus;
  out.report.iterations = total_iters;
  out.report.restarts_converged = static_cast<int>(converged.size());
  out.report.gap = gap;
  return out;
}

CheckReport envelope_monotonicity_check(const Potential& phi, const SpaceHandle& space,
                                        const Vec& x, const std::vector<double>& tau_list,
                                        const SolverConfig& config) {
  CheckReport rep;
  rep.check_name = "envelope_monotonicity";
  rep.n_samples = static_cast<int>(tau_list.size());
  const double phix = phi.value(x);
  double prev_env = phix, prev_d = 0.0, prev_phiy = phix;
  double worst = 0.0;
  for (double tau : tau_list) {
    ResolventResult r = resolvent(phi, space, tau, x, config);
    const double phiy = phi.value(r.y_tau);
    const double d = space.distance(x, r.y_tau);
    worst = std::max(worst, r.phi_tau - prev_env);  // Phi_tau non-increasing in tau
    worst = std::max(worst, prev_d - d);            // d(x, y_tau) non-decreasing
    worst = std::max(worst, phiy - prev_phiy);      // phi(y_tau) non-increasing
    worst = std::max(worst, r.phi_tau - phix);      // Phi_tau <= phi(x)
    prev_env = r.phi_tau;
    prev_d = d;
    prev_phiy = phiy;
  }
  rep.max_violation = worst;
  rep.pass = worst <= 1e-7;
  return rep;
}

CheckReport envelope_derivative_check(const Potential& phi, const SpaceHandle& space, const Vec& x,
                                      double tau, const SolverConfig& config) {
  CheckReport rep;
  rep.check_name = "envelope_derivative";
  const double h = std::max(1e-4 * tau, 1e-6);
  ResolventResult r0 = resolvent(phi, space, tau - h, x, config);
  ResolventResult r1 = resolvent(phi, space, tau + h, x, config);
  ResolventResult rc = resolvent(phi, space, tau, x, config);
  const double fd = (r1.phi_tau - r0.phi_tau) / (2.0 * h);
  const double p = phi.p;
  const double d = space.distance(x, rc.y_tau);
  const double closed = -((p - 1.0) / p) * std::pow(d / tau, p);
  rep.max_violation = std::fabs(fd - closed);
  rep.details["finite_difference"] = fd;
  rep.details["closed_form"] = closed;
  rep.n_samples = 3;
  rep.pass = rep.max_violation <= std::max(1e-4, 10.0 * h);
  return rep;
}

namespace {

// Quasi-uniform unit directions: signs in dim 1, the uniform circle grid in
// dim 2, a Fibonacci sphere in dim 3, seeded Gaussian directions above.
std::vector<Vec> direction_grid(int dim, int n, std::uint64_t seed) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
    return dirs;
  }
  if (dim == 2) {
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * M_PI * k / n;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
    return dirs;
  }
  if (dim == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / n;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden * k;
      dirs.push_back({r * std::cos(th), r * std::sin(th), z});
    }
    return dirs;
  }
  Rng rng(seed);
  for (int k = 0; k < n; ++k) dirs.push_back(rng.unit_vector(dim));
  return dirs;
}

// Difference quotient [phi(x) - phi(x + r u)]_+ / d(x, x + r u); -inf when the
// probe leaves the domain.
double slope_quotient(const Potential& phi, const SpaceHandle& space, const Vec& x, double phix,
                      const Vec& u, double r) {
  Vec y = axpy(x, r, u);
  if (!space.in_domain(y)) return -kInf;
  const double d = space.distance(x, y);
  if (d <= 0.0) return -kInf;
  const double num = phix - phi.value(y);
  return std::max(num, 0.0) / d;
}

// Maximize the quotient over directions at fixed radius: grid scan plus a
// tangent-space pattern-search polish around the best grid direction.
double max_quotient_at_radius(const Potential& phi, const SpaceHandle& space, const Vec& x,
                              double phix, double r, const SlopeConfig& cfg) {
  const auto dirs = direction_grid(space.dim, cfg.n_directions, cfg.seed);
  double best = -kInf;
  Vec best_u = dirs.front();
  for (const auto& u : dirs) {
    const double v = slope_quotient(phi, space, x, phix, u, r);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  // Pattern search on the sphere.
  double step = 2.0 * M_PI / cfg.n_directions;
  std::vector<Vec> tangent_basis;
  for (int i = 0; i < space.dim; ++i) {
    Vec e = zeros(static_cast<std::size_t>(space.dim));
    e[static_cast<std::size_t>(i)] = 1.0;
    tangent_basis.push_back(e);
  }
  for (int round = 0; round < cfg.polish_rounds; ++round) {
    bool improved = false;
    for (const auto& t : tangent_basis) {
      for (double sgn : {1.0, -1.0}) {
        Vec u = axpy(best_u, sgn * step, t);
        const double n = norm(u);
        if (n < 1e-12) continue;
        u = scaled(u, 1.0 / n);
        const double v = slope_quotient(phi, space, x, phix, u, r);
        if (v > best) {
          best = v;
          best_u = u;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
    if (step < 1e-9) break;
  }
  return best;
}

}  // namespace

double local_slope(const Potential& phi, const SpaceHandle& space, const Vec& x,
                   const SlopeConfig& config) {
  const double phix = phi.value(x);
  if (!std::isfinite(phix)) return kInf;
  std::vector<double> vals;
  for (double r : config.radii)
    vals.push_back(max_quotient_at_radius(phi, space, x, phix, r, config));
  if (vals.size() == 1) return std::max(vals[0], 0.0);
  // Two-point Richardson on the finest pair (the quotient is C^1 in r).
  const double r1 = config.radii[config.radii.size() - 2];
  const double r2 = config.radii.back();
  const double s1 = vals[vals.size() - 2], s2 = vals.back();
  return std::max(s2 + (s2 - s1) * (r2 / (r1 - r2)), 0.0);
}

double local_slope_smooth(const Potential& phi, const SpaceHandle& space, const Vec& x) {
  if (!space.has_tangent())
    throw unsupported_operation("local_slope_smooth: no tangent structure");
  return space.tangent->dual_norm(x, negated(differential(phi, x)));
}

double global_slope_formula(const Potential& phi, const SpaceHandle& space, const Vec& x,
                            const GlobalSlopeConfig& config) {
  if (!phi.convexity)
    throw unsupported_operation("global_slope_formula requires a (p,lambda) certificate");
  const double p = phi.convexity->p;
  const double lambda = phi.convexity->lambda;
  const double phix = phi.value(x);
  Rng rng(config.seed);
  double best = 0.0;
  auto consider = [&](const Vec& y) {
    const double d = space.distance(x, y);
    if (d <= 0.0) return;
    const double fy = phi.value(y);
    if (!std::isfinite(fy)) return;
    const double v = (phix - fy) / d + (lambda / p) * std::pow(d, p - 1.0);
    best = std::max(best, v);
  };
  for (int i = 0; i < config.n_samples; ++i) consider(sample_point(space, rng));
  // The supremum is attained in the y -> x limit whenever it equals the local
  // slope; fold in the local estimator.
  SlopeConfig local = config.local;
  local.seed = config.seed;
  best = std::max(best, local_slope(phi, space, x, local));
  return best;
}

CheckReport slope_resolvent_bound_check(const Potential& phi, const SpaceHandle& space,
                                        const Vec& x, double tau, const SolverConfig& config) {
  CheckReport rep;
  rep.check_name = "slope_resolvent_bound";
  const double p = phi.p;
  const double q = p / (p - 1.0);

  auto slope_at = [&](const Vec& pt) {
    return (phi.smooth && space.has_tangent()) ? local_slope_smooth(phi, space, pt)
                                               : local_slope(phi, space, pt);
  };

  ResolventResult r = resolvent(phi, space, tau, x, config);
  const double lhs = std::pow(slope_at(r.y_tau), q);
  const double rhs = std::pow(space.distance(x, r.y_tau) / tau, p);
  double worst = lhs - rhs - 1e-6;
  rep.details["slope_bound_gap"] = rhs - lhs;

  // tau -> 0: (phi(x) - Phi_tau(x)) / tau -> |d phi|^q(x) / q.
  const double target = std::pow(slope_at(x), q) / q;
  const double phix = phi.value(x);
  double extrapolated = 0.0;
  {
    const double t1 = std::min(tau, 1e-3), t2 = t1 / 2.0;
    ResolventResult r1 = resolvent(phi, space, t1, x, config);
    ResolventResult r2 = resolvent(phi, space, t2, x, config);
    const double v1 = (phix - r1.phi_tau) / t1;
    const double v2 = (phix - r2.phi_tau) / t2;
    extrapolated = 2.0 * v2 - v1;
  }
  rep.details["limit_estimate"] = extrapolated;
  rep.details["limit_target"] = target;
  worst = std::max(worst, std::fabs(extrapolated - target) - std::max(1e-3, 1e-3 * target));
  rep.max_violation = std::max(worst, 0.0);
  rep.n_samples = 3;
  rep.pass = worst <= 0.0;
  return rep;
}

double tau_star_lower_bound(const Potential& phi) {
  if (!phi.convexity)
    throw unsupported_operation("tau_star_lower_bound requires a (p,lambda) certificate");
  const double lambda = phi.convexity->lambda;
  if (lambda >= 0.0) return kInf;
  return std::pow(-lambda, -1.0 / (phi.convexity->p - 1.0));
}

}  // namespace asymflow
