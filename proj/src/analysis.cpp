#include "asymflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asymflow/errors.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

namespace asymflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ConvexityCertificate certify_convexity(const Potential& phi, const SpaceHandle& space, double p,
                                       double lambda, int n_pairs, int n_times,
                                       std::uint64_t seed) {
  if (!space.geodesic) throw unsupported_operation("certify_convexity: space ships no curves");
  ConvexityCertificate cert;
  cert.p = p;
  cert.lambda = lambda;
  cert.n_pairs = n_pairs;
  cert.n_times = n_times;
  cert.seed = seed;

  const double lambda_minus = std::max(-lambda, 0.0);
  std::vector<double> tau_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  if (lambda_minus > 0.0) {
    const double horizon = std::pow(lambda_minus, -1.0 / (p - 1.0));
    tau_grid.clear();
    for (double f : {0.05, 0.2, 0.5, 0.9}) tau_grid.push_back(f * horizon);
  }

  Rng rng(seed);
  double worst = 0.0;
  for (int pair = 0; pair < n_pairs; ++pair) {
    const Vec x0 = sample_point(space, rng);
    const Vec x1 = sample_point(space, rng);
    const double d = space.distance(x0, x1);
    if (d < 1e-9) continue;
    const double f0 = phi.value(x0), f1 = phi.value(x1);
    if (!std::isfinite(f0) || !std::isfinite(f1)) continue;
    const double dp = std::pow(d, p);
    for (int j = 1; j <= n_times; ++j) {
      const double t = static_cast<double>(j) / (n_times + 1);
      const Vec gt = space.geodesic(x0, x1, t);
      const double fg = phi.value(gt);
      const double modulus = t * (1.0 - std::pow(t, p - 1.0)) * dp / p;

      // (p, lambda) convexity
      worst = std::max(worst, fg - ((1.0 - t) * f0 + t * f1 - lambda * modulus));
      // distance control d(x0, gamma(t)) <= t d(x0, x1)
      worst = std::max(worst, space.distance(x0, gt) - t * d);
      // per-tau inequality on Phi(tau, x0; .)
      for (double tau : tau_grid) {
        const double tp = std::pow(tau, p - 1.0);
        const double lhs = fg + std::pow(space.distance(x0, gt), p) / (p * tp);
        const double rhs =
            (1.0 - t) * f0 + t * (f1 + dp / (p * tp)) - (lambda + 1.0 / tp) * modulus;
        worst = std::max(worst, lhs - rhs);
      }
      // secant consequence for lambda >= 0
      if (lambda >= 0.0) {
        const double lhs = (fg - f0) / t;
        const double rhs = f1 - f0 - (lambda / p) * (1.0 - std::pow(t, p - 1.0)) * dp;
        worst = std::max(worst, lhs - rhs - 1e-8);
      }
    }
  }
  cert.max_violation = std::max(worst, 0.0);
  cert.verified = worst <= 1e-8;
  return cert;
}

std::optional<double> largest_verified_lambda(const Potential& phi, const SpaceHandle& space,
                                              double p, const std::vector<double>& lambda_grid,
                                              int n_pairs, int n_times, std::uint64_t seed) {
  std::vector<double> grid = lambda_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (double lam : grid) {
    if (certify_convexity(phi, space, p, lam, n_pairs, n_times, seed).verified) return lam;
  }
  return std::nullopt;
}

namespace {

struct FlowField {
  const Potential* phi;
  const SpaceHandle* space;
  double p;
  double critical_norm;

  // xi' = F^{(2-p)/(p-1)}(G) G with G = grad(-phi); zero past the critical
  // threshold.
  Vec operator()(const Vec& x, double* grad_norm_out = nullptr) const {
    Vec g = descending_gradient(*space, *phi, x);
    const double fg = space->tangent->norm(x, g);
    if (grad_norm_out) *grad_norm_out = fg;
    if (fg < critical_norm) return zeros(x.size());
    if (p == 2.0) return g;
    return scaled(g, std::pow(fg, (2.0 - p) / (p - 1.0)));
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
constexpr double kE1 = 5179.0 / 57600, kE3 = 7571.0 / 16695, kE4 = 393.0 / 640,
                 kE5 = -92097.0 / 339200, kE6 = 187.0 / 2100, kE7 = 1.0 / 40;

struct StepResult {
  Vec y;
  double error = 0.0;
  bool in_domain = true;
};

StepResult dopri_step(const FlowField& field, const SpaceHandle& space, const Vec& y, const Vec& k1,
                      double h) {
  StepResult out;
  auto stage = [&](const Vec& pt, Vec& k) {
    if (!space.in_domain(pt)) return false;
    k = field(pt);
    return true;
  };
  Vec k2, k3, k4, k5, k6;
  Vec t = axpy(y, h * kA21, k1);
  if (!stage(t, k2)) return {{}, 0.0, false};
  t = y;
  t = axpy(t, h * kA31, k1);
  t = axpy(t, h * kA32, k2);
  if (!stage(t, k3)) return {{}, 0.0, false};
  t = y;
  t = axpy(t, h * kA41, k1);
  t = axpy(t, h * kA42, k2);
  t = axpy(t, h * kA43, k3);
  if (!stage(t, k4)) return {{}, 0.0, false};
  t = y;
  t = axpy(t, h * kA51, k1);
  t = axpy(t, h * kA52, k2);
  t = axpy(t, h * kA53, k3);
  t = axpy(t, h * kA54, k4);
  if (!stage(t, k5)) return {{}, 0.0, false};
  t = y;
  t = axpy(t, h * kA61, k1);
  t = axpy(t, h * kA62, k2);
  t = axpy(t, h * kA63, k3);
  t = axpy(t, h * kA64, k4);
  t = axpy(t, h * kA65, k5);
  if (!stage(t, k6)) return {{}, 0.0, false};

  Vec y5 = y;
  y5 = axpy(y5, h * kB1, k1);
  y5 = axpy(y5, h * kB3, k3);
  y5 = axpy(y5, h * kB4, k4);
  y5 = axpy(y5, h * kB5, k5);
  y5 = axpy(y5, h * kB6, k6);
  if (!space.in_domain(y5)) return {{}, 0.0, false};

  Vec k7 = field(y5);
  Vec y4 = y;
  y4 = axpy(y4, h * kE1, k1);
  y4 = axpy(y4, h * kE3, k3);
  y4 = axpy(y4, h * kE4, k4);
  y4 = axpy(y4, h * kE5, k5);
  y4 = axpy(y4, h * kE6, k6);
  y4 = axpy(y4, h * kE7, k7);

  out.y = std::move(y5);
  out.error = max_abs_diff(out.y, y4);
  return out;
}

}  // namespace

Trajectory ode_oracle(const Potential& phi, const SpaceHandle& space, const Vec& x0, double horizon,
                      const RkConfig& config) {
  if (!space.has_tangent()) throw unsupported_operation("ode_oracle: no tangent structure");
  if (!phi.smooth) throw unsupported_operation("ode_oracle: potential is not smooth");
  if (!space.in_domain(x0)) throw domain_error("ode_oracle: x0 outside domain");

  const double p = phi.p;
  const double q = p / (p - 1.0);
  FlowField field{&phi, &space, p, config.critical_norm};

  Trajectory traj;
  traj.provenance = Trajectory::Provenance::ode_oracle;
  const int n_out = std::max(2, config.n_samples);
  auto record = [&](double t, const Vec& x) {
    double gn = 0.0;
    Vec v = field(x, &gn);
    traj.times.push_back(t);
    traj.points.push_back(x);
    traj.phi_values.push_back(phi.value(x));
    traj.slope_values.push_back(gn);  // F(grad(-phi)) = F*(-d phi)
    traj.speed_values.push_back(space.tangent->norm(x, v));
    if (gn >= config.critical_norm) {
      const double chain = dot(differential(phi, x), v) + std::pow(gn, q);
      traj.max_chain_residual = std::max(traj.max_chain_residual, std::fabs(chain));
    }
  };

  Vec x = x0;
  double t = 0.0;
  double h = config.initial_step;
  bool frozen = false;
  record(0.0, x);

  for (int i = 1; i < n_out; ++i) {
    const double t_target = horizon * static_cast<double>(i) / (n_out - 1);
    while (t < t_target - 1e-15 && !frozen) {
      double gn = 0.0;
      Vec k1 = field(x, &gn);
      if (gn < config.critical_norm) {
        frozen = true;
        break;
      }
      h = std::min(h, t_target - t);
      StepResult step = dopri_step(field, space, x, k1, h);
      const double scale =
          config.abs_tol + config.rel_tol * std::max(1.0, std::sqrt(norm_sq(x)));
      if (!step.in_domain) {
        h *= 0.5;
        if (h < config.min_step) {
          traj.domain_exit = true;
          return traj;
        }
        continue;
      }
      double err = step.error / scale;
      if (!std::isfinite(err)) err = 1e6;
      if (err <= 1.0) {
        t += h;
        x = std::move(step.y);
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      } else {
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
        if (h < config.min_step) {
          traj.domain_exit = true;
          return traj;
        }
      }
    }
    record(t_target, x);
  }
  return traj;
}

double verify_energy_identity(const Trajectory& traj, const Potential& phi,
                              const SpaceHandle& space, std::uint64_t seed) {
  (void)space;
  const double p = phi.p;
  const double q = p / (p - 1.0);
  const std::size_t n = traj.size();
  if (n < 2) return 0.0;

  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i)
    integrand[i] =
        std::pow(traj.speed_values[i], p) / p + std::pow(traj.slope_values[i], q) / q;
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cumulative[i] = cumulative[i - 1] +
                    0.5 * (traj.times[i] - traj.times[i - 1]) * (integrand[i] + integrand[i - 1]);

  auto window = [&](std::size_t i, std::size_t j) {
    return std::fabs((cumulative[j] - cumulative[i]) -
                     (traj.phi_values[i] - traj.phi_values[j]));
  };
  double worst = window(0, n - 1);
  Rng rng(seed);
  for (int k = 0; k < 10; ++k) {
    std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(n) - 2));
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i) + 1,
                                                             static_cast<int>(n) - 1));
    worst = std::max(worst, window(i, j));
  }
  return worst;
}

CheckReport verify_exponential_decay(const Trajectory& traj, const Potential& phi,
                                     const SpaceHandle& space, double known_inf) {
  if (!phi.convexity)
    throw unsupported_operation("verify_exponential_decay requires a certificate");
  CheckReport rep;
  rep.check_name = "exponential_decay";
  const double p = phi.convexity->p;
  const double q = p / (p - 1.0);
  const double lambda = phi.convexity->lambda;
  const double rate =
      lambda == 0.0 ? 0.0 : q * (lambda > 0 ? 1.0 : -1.0) * std::pow(std::fabs(lambda), q / p);

  const std::size_t n = traj.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (traj.times[i] <= 0.0) continue;
    const double gap_i = traj.phi_values[i] - known_inf;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double bound = gap_i * std::exp(-rate * (traj.times[j] - traj.times[i]));
      worst = std::max(worst, (traj.phi_values[j] - known_inf) - bound - 1e-8);
    }
  }
  rep.details["energy_bound_violation"] = std::max(worst, 0.0);

  if (lambda > 0.0 && phi.known_minimizer) {
    const Vec& xbar = *phi.known_minimizer;
    const double phibar = phi.value(xbar);
    double worst_dist = 0.0, worst_static = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (traj.times[i] <= 0.0) continue;
      const double gap_i = traj.phi_values[i] - known_inf;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double bound =
            (p / lambda) * gap_i * std::exp(-rate * (traj.times[j] - traj.times[i]));
        worst_dist = std::max(
            worst_dist, std::pow(space.distance(xbar, traj.points[j]), p) - bound - 1e-8);
      }
      // static bounds
      worst_static =
          std::max(worst_static, gap_i - std::pow(traj.slope_values[i], q) /
                                               (q * std::pow(lambda, q / p)) -
                                     1e-6);
      worst_static = std::max(
          worst_static, (lambda / p) * std::pow(space.distance(xbar, traj.points[i]), p) -
                            (traj.phi_values[i] - phibar) - 1e-6);
    }
    rep.details["distance_bound_violation"] = std::max(worst_dist, 0.0);
    rep.details["static_bound_violation"] = std::max(worst_static, 0.0);
    worst = std::max({worst, worst_dist, worst_static});
  }
  rep.max_violation = std::max(worst, 0.0);
  rep.n_samples = static_cast<int>(n);
  rep.pass = worst <= 0.0;
  return rep;
}

double fitted_decay_exponent(const Trajectory& traj, double known_inf, double t_lo, double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (t < t_lo || t > t_hi) continue;
    const double gap = traj.phi_values[i] - known_inf;
    if (gap <= 0.0) continue;
    const double y = std::log(gap);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++count;
  }
  if (count < 2) throw parameter_error("fitted_decay_exponent: not enough samples in window");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -slope;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fb, double fm, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, fm, flm, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_simpson(f, a, b, fa, fb, fm, tol, 48);
}

}  // namespace

double regularization_constant(double p, double lambda, double t, double tol) {
  if (t <= 0.0) return 0.0;
  const double q = p / (p - 1.0);
  const double decay =
      lambda == 0.0 ? 0.0 : q * (lambda > 0 ? 1.0 : -1.0) * std::pow(std::fabs(lambda), q / p);
  if (p >= 2.0) {
    auto f = [&](double s) {
      return std::pow(s, p - 2.0) * std::exp(q * lambda * std::pow(s, p - 1.0)) *
             std::exp(-decay * s);
    };
    return integrate(f, 0.0, t, tol);
  }
  // For p < 2 substitute u = s^{p-1}: the integrand becomes bounded,
  // C = 1/(p-1) int_0^{t^{p-1}} e^{q lambda u} e^{-decay u^{1/(p-1)}} du.
  auto f = [&](double u) {
    return std::exp(q * lambda * u) * std::exp(-decay * std::pow(u, 1.0 / (p - 1.0)));
  };
  return integrate(f, 0.0, std::pow(t, p - 1.0), tol) / (p - 1.0);
}

namespace {

void require_regularization_regime(double p, double lambda) {
  const bool ok = (p > 1.0 && p < 2.0 && lambda >= 0.0) || (p == 2.0) ||
                  (p > 2.0 && lambda == 0.0);
  if (!ok)
    throw unsupported_operation(
        "slope regularization regime requires (1<p<2, lambda>=0), (p=2) or (p>2, lambda=0)");
}

}  // namespace

CheckReport verify_slope_regularization(const Trajectory& traj, const Potential& phi,
                                        const SpaceHandle& space, double known_inf,
                                        const SolverConfig& solver) {
  if (!phi.convexity)
    throw unsupported_operation("verify_slope_regularization requires a certificate");
  const double p = phi.convexity->p;
  const double q = p / (p - 1.0);
  const double lambda = phi.convexity->lambda;
  require_regularization_regime(p, lambda);

  CheckReport rep;
  rep.check_name = "slope_regularization";
  const Vec& x0 = traj.points.front();
  const double phi0 = traj.phi_values.front();
  const double lambda_plus = std::max(lambda, 0.0);
  const double lambda_minus = std::max(-lambda, 0.0);

  double worst = 0.0;
  const std::size_t n = traj.size();
  const std::size_t envelope_stride = std::max<std::size_t>(1, n / 32);
  int checked = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const double t = traj.times[i];
    if (t <= 0.0) continue;
    const double sq = std::pow(traj.slope_values[i], q);
    // whole-run bound via the envelope at tau = t (subsampled; each point is
    // one resolvent solve)
    if (i % envelope_stride == 0 || i + 1 == n) {
      const double env = resolvent(phi, space, t, x0, solver).phi_tau;
      const double rhs =
          std::exp(q * lambda_minus * std::pow(t, p - 1.0)) * (phi0 - env);
      worst = std::max(worst, (t / q) * sq - rhs - 1e-6);
      ++checked;
    }
    const double rhs2 = (1.0 + p * lambda_plus * regularization_constant(p, lambda, t)) *
                        std::exp(-q * lambda * std::pow(t, p - 1.0)) * (phi0 - known_inf);
    worst = std::max(worst, t * sq - rhs2 - 1e-6);
  }
  rep.max_violation = std::max(worst, 0.0);
  rep.n_samples = static_cast<int>(n) + checked;
  rep.pass = worst <= 0.0;
  return rep;
}

CheckReport monotone_slope_check(const Trajectory& traj, double p, double lambda) {
  require_regularization_regime(p, lambda);
  CheckReport rep;
  rep.check_name = "monotone_slope";
  const std::size_t n = traj.size();
  rep.n_samples = static_cast<int>(n);
  double worst = 0.0;
  double prev = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    if (traj.times[i] <= 0.0) continue;
    const double w =
        std::exp(lambda * std::pow(traj.times[i], p - 1.0)) * traj.slope_values[i];
    if (prev < kInf) worst = std::max(worst, (w - prev) / std::max(1.0, prev) - 1e-5);
    prev = w;
  }
  rep.details["weighted_slope_violation"] = std::max(worst, 0.0);

  if (lambda >= 0.0) {
    double conv_worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double second =
          traj.phi_values[i - 1] - 2.0 * traj.phi_values[i] + traj.phi_values[i + 1];
      conv_worst = std::max(conv_worst, -second - 1e-6);
    }
    rep.details["convexity_violation"] = std::max(conv_worst, 0.0);
    worst = std::max(worst, conv_worst);
  }
  rep.max_violation = std::max(worst, 0.0);
  rep.pass = worst <= 0.0;
  return rep;
}

Vec minimal_subdifferential(const SplitPotential& split, const SpaceHandle& space, const Vec& x) {
  if (!space.has_tangent())
    throw unsupported_operation("minimal_subdifferential: no tangent structure");
  const Vec g2 = split.grad_phi2 ? split.grad_phi2(x) : zeros(x.size());
  std::vector<Vec> extremes = split.subdiff_phi1 ? split.subdiff_phi1(x) : std::vector<Vec>{};
  if (extremes.empty()) return g2;
  if (extremes.size() == 1) return add(g2, extremes[0]);

  // Minimize F*(x, -(g2 + (1-s) e0 + s e1)) over the segment by golden section.
  const Vec& e0 = extremes[0];
  const Vec& e1 = extremes[1];
  auto value = [&](double s) {
    Vec zeta = add(g2, add(scaled(e0, 1.0 - s), scaled(e1, s)));
    return space.tangent->dual_norm(x, negated(zeta));
  };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = value(c), fd = value(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = value(d);
    }
  }
  const double s = 0.5 * (a + b);
  return add(g2, add(scaled(e0, 1.0 - s), scaled(e1, s)));
}

DneResult dne_residual(const Trajectory& traj, const SplitPotential& split,
                       const SpaceHandle& space, double p) {
  DneResult out;
  const std::size_t n = traj.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec& x = traj.points[i];
    if (split.near_kink && split.near_kink(x)) {
      ++out.n_skipped;
      continue;
    }
    const double dt = traj.times[i + 1] - traj.times[i - 1];
    Vec velocity = scaled(sub(traj.points[i + 1], traj.points[i - 1]), 1.0 / dt);
    Vec zeta = duality_set_Jp(space, x, velocity, p);
    Vec eta = minimal_subdifferential(split, space, x);
    out.max_residual =
        std::max(out.max_residual, space.tangent->dual_norm(x, add(zeta, eta)));
    ++out.n_checked;
  }
  return out;
}

}  // namespace asymflow
