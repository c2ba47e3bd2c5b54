#pragma once

#include <map>
#include <vector>

#include "asymflow/envelope.hpp"
#include "asymflow/metric_core.hpp"
#include "asymflow/trajectory.hpp"
#include "asymflow/vec.hpp"

namespace asymflow {

/// Time steps tau_k > 0 with cumulative times t^0 = 0, t^k = t^{k-1} + tau_k.
struct Partition {
  std::vector<double> steps;
  std::vector<double> times;  // size steps.size() + 1, times[0] = 0
  double norm = 0.0;          // max step

  static Partition uniform(double horizon, double tau);
  static Partition from_steps(const std::vector<double>& steps);
  std::size_t n_steps() const { return steps.size(); }
};

/// Output of the minimizing-movement recursion: iterates, per-step potential
/// values, discrete speeds d(X^{k-1},X^k)/tau_k, and the end-of-step De Giorgi
/// diagnostic d+_{tau_k}(X^{k-1})/tau_k.
struct DiscreteSolution {
  Partition partition;
  std::vector<Vec> points;       // X^0 .. X^N
  std::vector<double> phis;      // phi(X^k), k = 0..N
  std::vector<double> speeds;    // k = 1..N
  std::vector<double> g_tau_end; // k = 1..N

  // Piecewise-constant interpolant: X^k on (t^{k-1}, t^k].
  const Vec& piecewise_constant(double t) const;
};

/// Carries a scheme failure together with the steps completed so far.
struct scheme_error : std::runtime_error {
  scheme_error(const std::string& what, DiscreteSolution partial)
      : std::runtime_error(what), partial_solution(std::move(partial)) {}
  DiscreteSolution partial_solution;
};

/// Runs the proximal recursion X^k in J_{tau_k}[X^{k-1}] from x0.
DiscreteSolution run_scheme(const Potential& phi, const SpaceHandle& space, const Vec& x0,
                            const Partition& partition, const SolverConfig& config);

/// De Giorgi variational interpolation: at t = t^{k-1} + delta returns an
/// element of J_delta[X^{k-1}]; node times return the stored iterate.
Vec de_giorgi_interpolant(const Potential& phi, const SpaceHandle& space,
                          const DiscreteSolution& sol, double t, const SolverConfig& config);

/// G(t^{k-1} + delta) = d+_delta(X^{k-1}) / delta from the interpolation
/// resolvent.
double g_tau(const Potential& phi, const SpaceHandle& space, const DiscreteSolution& sol, double t,
             const SolverConfig& config);

/// Resolvent-solve cache for the De Giorgi quadrature: keyed by
/// (step index, quadrature offset).
class GTauTable {
 public:
  GTauTable(const Potential& phi, const SpaceHandle& space, const DiscreteSolution& sol,
            const SolverConfig& config)
      : phi_(phi), space_(space), sol_(sol), config_(config) {}

  // d+_delta(X^{k-1}) for step k (1-based), delta in (0, tau_k].
  double d_plus(std::size_t k, double delta);

 private:
  const Potential& phi_;
  const SpaceHandle& space_;
  const DiscreteSolution& sol_;
  SolverConfig config_;
  std::map<std::pair<std::size_t, double>, double> cache_;
};

/// Residual |(1/p) int |X'|^p + (1/q) int G^p + phi(X^l) - phi(X^k)| with the
/// G-integral evaluated per step by Gauss-Legendre of the given order.
double discrete_energy_identity(const Potential& phi, const SpaceHandle& space,
                                const DiscreteSolution& sol, std::size_t k, std::size_t l,
                                int quad_order, const SolverConfig& config,
                                GTauTable* table = nullptr);

/// Telescoping a priori bounds: sum_i d^p(X^{i-1},X^i)/(p tau_i^{p-1})
/// <= phi(X^0) - phi(X^k), boundedness of d^p(x*, X^k), and the measured
/// interpolant-gap constant sup_t d^p(Xbar, Xtilde) / ||tau||^{p-1}.
CheckReport a_priori_check(const Potential& phi, const SpaceHandle& space,
                           const DiscreteSolution& sol, const Vec& x_star, double S_bound,
                           double horizon, const SolverConfig& config);

struct ConvergenceReport {
  std::vector<double> taus;
  std::vector<double> cauchy_distances;  // sup-distance between consecutive refinements
  bool monotone = true;
  bool divergence_warning = false;
  double energy_residual = 0.0;
};

struct LimitResult {
  Trajectory trajectory;  // finest sweep member
  ConvergenceReport report;
  std::vector<DiscreteSolution> runs;
};

/// Runs the scheme for each step size of the sweep, reports the empirical
/// Cauchy distances between successive piecewise-constant interpolants on a
/// common grid, and returns the finest run as a trajectory with per-sample
/// phi, slope and speed together with its continuous energy-identity residual.
LimitResult limit_trajectory(const Potential& phi, const SpaceHandle& space, const Vec& x0,
                             double horizon, const std::vector<double>& tau_sweep,
                             const SolverConfig& config, int jobs = 1);

/// Node-sampled trajectory of a discrete solution: phi at the iterates, speed
/// as the forward metric derivative of the polyline, slope by the smooth
/// estimator when available (direction sampling otherwise).
Trajectory solution_to_trajectory(const Potential& phi, const SpaceHandle& space,
                                  const DiscreteSolution& sol);

/// Weighted slope monotonicity for discrete solutions:
/// e^{lambda_tau (t^k)^{p-1}} |d phi|(X^k) non-increasing, with
/// lambda_tau = log(1 + lambda ||tau||^{p-1}) / ||tau||^{p-1}.
CheckReport weighted_slope_monotonicity(const Potential& phi, const SpaceHandle& space,
                                        const DiscreteSolution& sol, double lambda);

}  // namespace asymflow
