#include "asymflow/mms.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "asymflow/curves.hpp"
#include "asymflow/errors.hpp"

namespace asymflow {

Partition Partition::uniform(double horizon, double tau) {
  if (horizon <= 0.0 || tau <= 0.0) throw parameter_error("Partition::uniform requires T, tau > 0");
  const auto n = static_cast<std::size_t>(std::ceil(horizon / tau - 1e-12));
  std::vector<double> steps(n, tau);
  steps.back() = horizon - tau * static_cast<double>(n - 1);  // land exactly on T
  return from_steps(steps);
}

Partition Partition::from_steps(const std::vector<double>& steps) {
  Partition p;
  p.steps = steps;
  p.times.resize(steps.size() + 1);
  p.times[0] = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k] <= 0.0) throw parameter_error("Partition: steps must be positive");
    p.times[k + 1] = p.times[k] + steps[k];
    p.norm = std::max(p.norm, steps[k]);
  }
  return p;
}

const Vec& DiscreteSolution::piecewise_constant(double t) const {
  if (t <= 0.0) return points.front();
  const auto& times = partition.times;
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  if (k >= points.size()) k = points.size() - 1;
  return points[k];
}

DiscreteSolution run_scheme(const Potential& phi, const SpaceHandle& space, const Vec& x0,
                            const Partition& partition, const SolverConfig& config) {
  if (!std::isfinite(phi.value(x0))) throw domain_error("run_scheme: x0 outside proper domain");
  if (phi.convexity) {
    const double horizon = tau_star_lower_bound(phi);
    if (partition.norm >= horizon)
      throw parameter_error("run_scheme: step size above the coercivity horizon");
  }
  DiscreteSolution sol;
  sol.partition = partition;
  sol.points.push_back(x0);
  sol.phis.push_back(phi.value(x0));
  for (std::size_t k = 0; k < partition.n_steps(); ++k) {
    try {
      ResolventResult r = resolvent(phi, space, partition.steps[k], sol.points.back(), config);
      const double tau = partition.steps[k];
      sol.speeds.push_back(space.distance(sol.points.back(), r.y_tau) / tau);
      sol.g_tau_end.push_back(r.d_plus / tau);
      sol.points.push_back(r.y_tau);
      sol.phis.push_back(phi.value(r.y_tau));
    } catch (const convergence_error& e) {
      throw scheme_error("run_scheme: resolvent failed at step " + std::to_string(k + 1) + ": " +
                             e.what(),
                         sol);
    }
  }
  return sol;
}

namespace {

// Locates t inside the partition: returns (k, delta) with t = t^{k-1} + delta,
// k being the 1-based step index and delta in (0, tau_k]; node times map to
// delta = tau_k.
std::pair<std::size_t, double> locate(const Partition& p, double t) {
  if (t < 0.0 || t > p.times.back() + 1e-12) throw parameter_error("time outside the partition");
  if (t <= 0.0) return {0, 0.0};
  auto it = std::lower_bound(p.times.begin() + 1, p.times.end(), t - 1e-15);
  const std::size_t k = static_cast<std::size_t>(it - p.times.begin());  // >= 1
  return {k, t - p.times[k - 1]};
}

}  // namespace

Vec de_giorgi_interpolant(const Potential& phi, const SpaceHandle& space,
                          const DiscreteSolution& sol, double t, const SolverConfig& config) {
  const auto [k, delta] = locate(sol.partition, t);
  if (k == 0) return sol.points.front();
  if (std::fabs(delta - sol.partition.steps[k - 1]) < 1e-14) return sol.points[k];
  return resolvent(phi, space, delta, sol.points[k - 1], config).y_tau;
}

double g_tau(const Potential& phi, const SpaceHandle& space, const DiscreteSolution& sol, double t,
             const SolverConfig& config) {
  const auto [k, delta] = locate(sol.partition, t);
  if (k == 0) throw parameter_error("g_tau requires t > 0");
  ResolventResult r = resolvent(phi, space, delta, sol.points[k - 1], config);
  return r.d_plus / delta;
}

double GTauTable::d_plus(std::size_t k, double delta) {
  const auto key = std::make_pair(k, delta);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const double v = resolvent(phi_, space_, delta, sol_.points[k - 1], config_).d_plus;
  cache_.emplace(key, v);
  return v;
}

namespace {

// Nodes/weights of n-point Gauss-Legendre on [-1, 1], computed by Newton on
// the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(static_cast<std::size_t>(n));
  weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace

double discrete_energy_identity(const Potential& phi, const SpaceHandle& space,
                                const DiscreteSolution& sol, std::size_t k, std::size_t l,
                                int quad_order, const SolverConfig& config, GTauTable* table) {
  if (!(k < l) || l >= sol.points.size())
    throw parameter_error("discrete_energy_identity requires 0 <= k < l <= N");
  const double p = phi.p;
  const double q = p / (p - 1.0);

  GTauTable local_table(phi, space, sol, config);
  GTauTable& tab = table ? *table : local_table;

  std::vector<double> nodes, weights;
  gauss_legendre(quad_order, nodes, weights);

  double speed_integral = 0.0, g_integral = 0.0;
  for (std::size_t i = k + 1; i <= l; ++i) {
    const double tau = sol.partition.steps[i - 1];
    speed_integral += std::pow(sol.speeds[i - 1], p) * tau;
    // int_0^tau (d+_delta(X^{i-1}) / delta)^p d delta
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const double delta = 0.5 * tau * (nodes[j] + 1.0);
      const double g = tab.d_plus(i, delta) / delta;
      acc += weights[j] * std::pow(g, p);
    }
    g_integral += 0.5 * tau * acc;
  }
  const double lhs = speed_integral / p + g_integral / q + sol.phis[l];
  return std::fabs(lhs - sol.phis[k]);
}

CheckReport a_priori_check(const Potential& phi, const SpaceHandle& space,
                           const DiscreteSolution& sol, const Vec& x_star, double S_bound,
                           double horizon, const SolverConfig& config) {
  CheckReport rep;
  rep.check_name = "a_priori_estimates";
  const double p = phi.p;
  const std::size_t N = sol.partition.n_steps();
  rep.n_samples = static_cast<int>(N);

  double worst = 0.0;
  double partial = 0.0;
  double max_dist_p = 0.0;
  for (std::size_t kk = 1; kk <= N; ++kk) {
    const double tau = sol.partition.steps[kk - 1];
    const double d = space.distance(sol.points[kk - 1], sol.points[kk]);
    partial += std::pow(d, p) / (p * std::pow(tau, p - 1.0));
    worst = std::max(worst, partial - (sol.phis[0] - sol.phis[kk]) - 1e-6);
    max_dist_p = std::max(max_dist_p, std::pow(space.distance(x_star, sol.points[kk]), p));
  }
  rep.details["telescoping_sum"] = partial;
  rep.details["max_dist_p_from_xstar"] = max_dist_p;
  rep.details["S_bound"] = S_bound;
  rep.details["horizon"] = horizon;

  // Interpolant gap of the variational interpolation at step midpoints,
  // reported as the measured constant of the ||tau||^{p-1} scaling.
  double gap_const = 0.0;
  for (std::size_t kk = 1; kk <= N; ++kk) {
    const double t_mid = sol.partition.times[kk - 1] + 0.5 * sol.partition.steps[kk - 1];
    const Vec mid = de_giorgi_interpolant(phi, space, sol, t_mid, config);
    const Vec& bar = sol.points[kk];
    const double gap =
        std::max(std::pow(space.distance(bar, mid), p), std::pow(space.distance(mid, bar), p));
    gap_const = std::max(gap_const, gap / std::pow(sol.partition.norm, p - 1.0));
  }
  rep.details["interpolant_gap_constant"] = gap_const;

  rep.max_violation = std::max(worst, 0.0);
  rep.pass = worst <= 0.0;
  return rep;
}

namespace {

double symmetric_sup_distance(const SpaceHandle& space, const Vec& a, const Vec& b) {
  return std::max(space.distance(a, b), space.distance(b, a));
}

double slope_for_trajectory(const Potential& phi, const SpaceHandle& space, const Vec& x) {
  if (phi.smooth && space.has_tangent()) return local_slope_smooth(phi, space, x);
  return local_slope(phi, space, x);
}

double trajectory_energy_residual(const Trajectory& traj, double p) {
  const double q = p / (p - 1.0);
  double integral = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double dt = traj.times[i] - traj.times[i - 1];
    auto f = [&](std::size_t j) {
      return std::pow(traj.speed_values[j], p) / p + std::pow(traj.slope_values[j], q) / q;
    };
    integral += 0.5 * dt * (f(i - 1) + f(i));
  }
  return std::fabs(integral + traj.phi_values.back() - traj.phi_values.front());
}

}  // namespace

LimitResult limit_trajectory(const Potential& phi, const SpaceHandle& space, const Vec& x0,
                             double horizon, const std::vector<double>& tau_sweep,
                             const SolverConfig& config, int jobs) {
  if (tau_sweep.empty()) throw parameter_error("limit_trajectory: empty sweep");
  for (std::size_t i = 1; i < tau_sweep.size(); ++i)
    if (!(tau_sweep[i] < tau_sweep[i - 1]))
      throw parameter_error("limit_trajectory: sweep must be decreasing");

  LimitResult out;
  out.report.taus = tau_sweep;
  out.runs.resize(tau_sweep.size());

  const int n_jobs = std::max(1, jobs);
  std::size_t next = 0;
  while (next < tau_sweep.size()) {
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(n_jobs),
                                                    tau_sweep.size() - next);
    std::vector<std::future<DiscreteSolution>> futures;
    for (std::size_t j = 0; j < batch; ++j) {
      const double tau = tau_sweep[next + j];
      futures.push_back(std::async(std::launch::async, [&, tau] {
        return run_scheme(phi, space, x0, Partition::uniform(horizon, tau), config);
      }));
    }
    for (std::size_t j = 0; j < batch; ++j) out.runs[next + j] = futures[j].get();
    next += batch;
  }

  // Empirical Cauchy check: resample consecutive piecewise-constant
  // interpolants on the finest grid and take the sup of the symmetrized
  // distance.
  const Partition finest = out.runs.back().partition;
  for (std::size_t m = 1; m < out.runs.size(); ++m) {
    double sup = 0.0;
    for (double t : finest.times) {
      sup = std::max(sup, symmetric_sup_distance(space, out.runs[m - 1].piecewise_constant(t),
                                                 out.runs[m].piecewise_constant(t)));
    }
    out.report.cauchy_distances.push_back(sup);
  }
  for (std::size_t m = 1; m < out.report.cauchy_distances.size(); ++m)
    if (out.report.cauchy_distances[m] > out.report.cauchy_distances[m - 1])
      out.report.monotone = false;
  out.report.divergence_warning = !out.report.monotone;

  out.trajectory = solution_to_trajectory(phi, space, out.runs.back());
  out.report.energy_residual = trajectory_energy_residual(out.trajectory, phi.p);
  return out;
}

Trajectory solution_to_trajectory(const Potential& phi, const SpaceHandle& space,
                                  const DiscreteSolution& sol) {
  Trajectory traj;
  traj.provenance = Trajectory::Provenance::mms;
  traj.times = sol.partition.times;
  traj.points = sol.points;
  traj.phi_values = sol.phis;
  SampledCurve curve(traj.times, traj.points, space);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    traj.speed_values.push_back(forward_metric_derivative(curve, i));
    traj.slope_values.push_back(slope_for_trajectory(phi, space, traj.points[i]));
  }
  return traj;
}

CheckReport weighted_slope_monotonicity(const Potential& phi, const SpaceHandle& space,
                                        const DiscreteSolution& sol, double lambda) {
  CheckReport rep;
  rep.check_name = "weighted_slope_monotonicity";
  const double p = phi.p;
  const double inf = std::numeric_limits<double>::infinity();
  const double tn = std::pow(sol.partition.norm, p - 1.0);
  if (1.0 + lambda * tn <= 0.0) {
    rep.pass = false;
    rep.max_violation = inf;
    return rep;
  }
  const double lambda_tau = std::log1p(lambda * tn) / tn;
  rep.n_samples = static_cast<int>(sol.points.size());
  double prev = inf;
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.points.size(); ++k) {
    const double s = slope_for_trajectory(phi, space, sol.points[k]);
    const double w = std::exp(lambda_tau * std::pow(sol.partition.times[k], p - 1.0)) * s;
    if (k > 0) worst = std::max(worst, (w - prev) / std::max(1.0, prev));
    prev = w;
  }
  rep.max_violation = worst;
  rep.pass = worst <= 1e-5;
  return rep;
}

}  // namespace asymflow
