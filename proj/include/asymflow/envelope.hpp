#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asymflow/metric_core.hpp"
#include "asymflow/vec.hpp"

namespace asymflow {

/// (p, lambda) convexity certificate attached to a potential. `lambda` refers
/// to convexity along the space's connecting curves with modulus
/// (lambda/p) t (1 - t^{p-1}) d^p.
struct PLCertificate {
  double p = 2.0;
  double lambda = 0.0;
};

/// A proper functional phi on a space, given by oracles. `value` may return
/// +infinity outside the proper domain. `grad` is the coordinate differential
/// when available; operations fall back to central finite differences when it
/// is null and `smooth` is set.
struct Potential {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;  // may be null
  double p = 2.0;                       // exponent of the flow functional
  bool smooth = true;
  std::optional<PLCertificate> convexity;
  std::optional<double> known_inf;
  std::optional<Vec> known_minimizer;
  std::string name;
};

/// Coordinate differential of phi at x: analytic when supplied, otherwise
/// central finite differences (requires smooth = true).
Vec differential(const Potential& phi, const Vec& x);

struct SolverConfig {
  double tol = 1e-10;       // objective tolerance
  double arg_tol = 1e-8;    // argument tolerance
  double grad_tol = 1e-10;
  int max_iter = 400;
  int n_restarts = 8;       // x itself plus seeded perturbations
  double restart_radius = 0.1;
  double barrier_strength = 0.0;  // first-phase barrier weight (Funk ball)
  std::uint64_t seed = 0;
};

struct SolverReport {
  int iterations = 0;
  int restarts_converged = 0;
  double gap = 0.0;  // best gradient norm at the returned iterate
};

struct ResolventResult {
  Vec y_tau;
  double phi_tau = 0.0;  // envelope value Phi_tau(x)
  double d_plus = 0.0;   // max of d(x, .) over converged restarts tied at the optimum
  double d_minus = 0.0;  // min of the same
  SolverReport report;
};

/// Phi(tau, x; y) = phi(y) + d(x,y)^p / (p tau^{p-1}). +infinity propagates
/// from phi(y); it is a value, not an error.
double phi_functional(const Potential& phi, const SpaceHandle& space, double tau, const Vec& x,
                      const Vec& y);

/// Minimizes Phi(tau, x; .) by multi-start quasi-Newton descent. Throws
/// coercivity_error when the inner objective is detected unbounded below and
/// convergence_error (carrying the best iterate) when no restart converges.
ResolventResult resolvent(const Potential& phi, const SpaceHandle& space, double tau, const Vec& x,
                          const SolverConfig& config);

/// One verification result; serializes to {check_name, max_violation,
/// n_samples, pass} plus named diagnostic values.
struct CheckReport {
  std::string check_name;
  double max_violation = 0.0;
  int n_samples = 0;
  bool pass = true;
  std::map<std::string, double> details;
};

/// Monotonicity chains of the envelope along an increasing tau list:
/// phi(x) >= Phi_{tau0}(x) >= Phi_{tau1}(x), d(x, y_{tau0}) <= d(x, y_{tau1}),
/// phi(y_{tau0}) >= phi(y_{tau1}).
CheckReport envelope_monotonicity_check(const Potential& phi, const SpaceHandle& space,
                                        const Vec& x, const std::vector<double>& tau_list,
                                        const SolverConfig& config);

/// Central finite difference of tau -> Phi_tau(x) against the closed-form
/// derivative -((p-1)/p) (d(x,y_tau)/tau)^p.
CheckReport envelope_derivative_check(const Potential& phi, const SpaceHandle& space, const Vec& x,
                                      double tau, const SolverConfig& config);

struct SlopeConfig {
  int n_directions = 64;
  std::vector<double> radii = {1e-2, 5e-3, 2.5e-3};
  int polish_rounds = 40;
  std::uint64_t seed = 0;
};

/// Direction-sampled estimate of the local slope
/// |d phi|(x) = limsup_{y->x} [phi(x)-phi(y)]_+ / d(x,y):
/// maximizes the difference quotient over directions at each radius (with a
/// pattern-search polish around the best direction) and Richardson-extrapolates
/// over the radius schedule.
double local_slope(const Potential& phi, const SpaceHandle& space, const Vec& x,
                   const SlopeConfig& config = {});

/// Fast path for smooth potentials on tangent-equipped spaces:
/// |d phi|(x) = F*(x, -d phi(x)).
double local_slope_smooth(const Potential& phi, const SpaceHandle& space, const Vec& x);

struct GlobalSlopeConfig {
  int n_samples = 2000;
  std::uint64_t seed = 0;
  SlopeConfig local;
};

/// Global formula sup_{y != x} [ (phi(x)-phi(y))/d(x,y) + (lambda/p) d^{p-1} ]_+
/// over sampled y, combined with the local estimator near x (where the
/// supremum is attained for certified potentials). Requires a certificate.
double global_slope_formula(const Potential& phi, const SpaceHandle& space, const Vec& x,
                            const GlobalSlopeConfig& config = {});

/// Checks |d phi|^q(y_tau) <= (d(x,y_tau)/tau)^p and the tau->0 limit
/// (phi(x) - Phi_tau(x))/tau -> |d phi|^q(x)/q over a tau sweep.
CheckReport slope_resolvent_bound_check(const Potential& phi, const SpaceHandle& space,
                                        const Vec& x, double tau, const SolverConfig& config);

/// Lower bound for the coercivity horizon: +infinity when lambda >= 0, else
/// lambda_-^{-1/(p-1)}.
double tau_star_lower_bound(const Potential& phi);

}  // namespace asymflow
