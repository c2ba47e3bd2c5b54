#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "asymflow/envelope.hpp"
#include "asymflow/metric_core.hpp"
#include "asymflow/trajectory.hpp"
#include "asymflow/vec.hpp"

namespace asymflow {

/// Sampling-based convexity certificate. Never a proof: carries the measured
/// worst violation and the sample counts that produced it.
struct ConvexityCertificate {
  double p = 2.0;
  double lambda = 0.0;
  bool verified = false;
  double max_violation = 0.0;
  int n_pairs = 0;
  int n_times = 0;
  std::uint64_t seed = 0;
};

/// Samples point pairs and a t-grid along the space's connecting curves and
/// checks (over a tau-grid below the coercivity horizon)
///   - the (p,lambda) convexity inequality,
///   - the stronger per-tau inequality on Phi(tau, x0; .),
///   - the derived distance control d(x0, gamma(t)) <= t d(x0, x1), and
///   - for lambda >= 0 the secant consequence
///     (phi(gamma(t)) - phi(x0))/t <= phi(x1) - phi(x0) - (lambda/p)(1-t^{p-1}) d^p.
ConvexityCertificate certify_convexity(const Potential& phi, const SpaceHandle& space, double p,
                                       double lambda, int n_pairs, int n_times,
                                       std::uint64_t seed);

/// Scans a lambda grid (descending) and returns the largest value whose
/// certificate verifies.
std::optional<double> largest_verified_lambda(const Potential& phi, const SpaceHandle& space,
                                              double p, const std::vector<double>& lambda_grid,
                                              int n_pairs, int n_times, std::uint64_t seed);

struct RkConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  int n_samples = 1001;  // output grid size on [0, T]
  double critical_norm = 1e-10;  // stop once F(grad(-phi)) falls below this
};

/// Integrates the flow  xi' = F^{(2-p)/(p-1)}(grad(-phi)(xi)) grad(-phi)(xi)
/// with an embedded Dormand-Prince 5(4) pair and records per-sample phi,
/// slope F*(-d phi) and speed F(xi'). A run that would leave the domain is
/// truncated at the last admissible sample with domain_exit set; reaching a
/// critical point freezes the state for the remaining samples.
Trajectory ode_oracle(const Potential& phi, const SpaceHandle& space, const Vec& x0, double horizon,
                      const RkConfig& config = {});

/// Max over (0,T) and random subintervals of
/// |(1/p) int speed^p + (1/q) int slope^q - (phi(xi(s)) - phi(xi(t)))|
/// by trapezoid quadrature on the sample grid.
double verify_energy_identity(const Trajectory& traj, const Potential& phi,
                              const SpaceHandle& space, std::uint64_t seed = 17);

/// Decay estimates along a trajectory for a certified potential with known
/// infimum: the exponential bound between all ordered sample pairs with
/// t0 > 0, and for lambda > 0 with a known minimizer the distance decay plus
/// the static bounds phi - inf <= |d phi|^q/(q lambda^{q/p}) and
/// (lambda/p) d^p(xbar, x) <= phi(x) - phi(xbar).
CheckReport verify_exponential_decay(const Trajectory& traj, const Potential& phi,
                                     const SpaceHandle& space, double known_inf);

/// Least-squares decay exponent of log(phi(xi(t)) - inf) over [t_lo, t_hi].
double fitted_decay_exponent(const Trajectory& traj, double known_inf, double t_lo, double t_hi);

/// C(p, lambda, t) = int_0^t s^{p-2} e^{q lambda s^{p-1}} e^{-q sgn(lambda)
/// |lambda|^{q/p} s} ds by adaptive Simpson quadrature. Closed forms:
/// C(2, lambda, t) = t and C(p, 0, t) = t^{p-1}/(p-1).
double regularization_constant(double p, double lambda, double t, double tol = 1e-12);

/// Slope regularization along a run started at x0:
///   (t/q) |d phi|^q(xi(t)) <= e^{q lambda_- t^{p-1}} (phi(x0) - Phi_t(x0))
///   t |d phi|^q(xi(t)) <= (1 + p lambda_+ C(p,lambda,t)) e^{-q lambda t^{p-1}}
///                         (phi(x0) - inf).
/// Valid regimes: (1<p<2, lambda>=0), (p=2, any lambda), (p>2, lambda=0);
/// outside them the call refuses to run.
CheckReport verify_slope_regularization(const Trajectory& traj, const Potential& phi,
                                        const SpaceHandle& space, double known_inf,
                                        const SolverConfig& solver);

/// e^{lambda t^{p-1}} slope(t) non-increasing within relative slack, and for
/// lambda >= 0 convexity of phi(xi(t)) in t (discrete second differences).
CheckReport monotone_slope_check(const Trajectory& traj, double p, double lambda);

/// phi = phi1 + phi2 with convex phi1 (subdifferential supplied as the extreme
/// points of its polytope at each point) and smooth phi2.
struct SplitPotential {
  Potential total;
  std::function<double(const Vec&)> value_phi1;
  // Extreme points of the subdifferential of phi1; a singleton at smooth
  // points, a segment (two generators) across a kink.
  std::function<std::vector<Vec>(const Vec&)> subdiff_phi1;
  std::function<Vec(const Vec&)> grad_phi2;
  // Marks samples where phi1 is non-differentiable (skipped and counted).
  std::function<bool(const Vec&)> near_kink;
};

struct DneResult {
  double max_residual = 0.0;
  int n_checked = 0;
  int n_skipped = 0;
};

/// Residual of the doubly nonlinear equation J_p(xi, xi') = -d^o phi(xi):
/// at interior samples, xi' by symmetric finite differences, zeta = J_p image,
/// d^o phi the minimal-F*(-.)-norm element of d phi2 + subdiff phi1 (segment
/// minimization), residual F*(xi, zeta + d^o element).
DneResult dne_residual(const Trajectory& traj, const SplitPotential& split,
                       const SpaceHandle& space, double p);

/// Minimal-dual-norm subdifferential element of a split potential at x.
Vec minimal_subdifferential(const SplitPotential& split, const SpaceHandle& space, const Vec& x);

}  // namespace asymflow
