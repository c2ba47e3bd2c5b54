#include <doctest.h>

#include <cmath>

#include "asymflow/analysis.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/mms.hpp"
#include "asymflow/potentials.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

using namespace asymflow;

namespace {

Potential quadratic(double p = 2.0, double lambda = 1.0) {
  Potential phi;
  phi.name = "quadratic";
  phi.value = [](const Vec& x) { return 0.5 * norm_sq(x); };
  phi.grad = [](const Vec& x) { return x; };
  phi.p = p;
  phi.convexity = PLCertificate{p, lambda};
  phi.known_inf = 0.0;
  phi.known_minimizer = Vec{0.0, 0.0};
  return phi;
}

Potential funk_sqdist(const SpaceHandle& funk, double lambda = 0.5) {
  PotentialParams params;
  PotentialEntry entry = make_potential("sqdist", params, funk);
  entry.phi.convexity = PLCertificate{2.0, lambda};
  return entry.phi;
}

}  // namespace

TEST_CASE("convexity certificates") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();

  ConvexityCertificate cert = certify_convexity(phi, eu, 2.0, 1.0, 300, 9, 7);
  CHECK(cert.verified);
  CHECK(cert.max_violation <= 1e-12);

  // any lambda' < lambda verifies as well
  ConvexityCertificate weaker = certify_convexity(phi, eu, 2.0, 0.25, 300, 9, 7);
  CHECK(weaker.verified);

  // lambda above the true modulus fails
  ConvexityCertificate toobig = certify_convexity(phi, eu, 2.0, 1.5, 300, 9, 7);
  CHECK_FALSE(toobig.verified);

  // Funk squared distance along chords: scan the lambda grid
  SpaceHandle funk = make_funk_ball(2);
  funk.sample_halfwidth = 0.85;
  Potential sq = funk_sqdist(funk);
  auto best = largest_verified_lambda(sq, funk, 2.0, {1.25, 1.0, 0.75, 0.5, 0.25, 0.0}, 150, 6, 11);
  REQUIRE(best.has_value());
  CHECK(*best >= 0.5);
}

TEST_CASE("ODE oracle on the analytic quadratic flow") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  const Vec x0{0.8, -0.6};
  Trajectory traj = ode_oracle(phi, eu, x0, 3.0);
  REQUIRE(traj.size() >= 100);
  CHECK_FALSE(traj.domain_exit);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    Vec expected = scaled(x0, std::exp(-traj.times[i]));
    worst = std::max(worst, max_abs_diff(traj.points[i], expected));
  }
  CHECK(worst <= 1e-8);
  CHECK(traj.max_chain_residual <= 1e-6);

  // critical start stays put
  Trajectory still = ode_oracle(phi, eu, {0.0, 0.0}, 1.0);
  for (const auto& pt : still.points) CHECK(norm(pt) == 0.0);
}

TEST_CASE("descending gradient from analytic and differenced potentials agree on oracle runs") {
  SpaceHandle r = make_randers(2, {0.4, 0.1});
  Potential phi = quadratic();
  Potential fd = phi;
  fd.grad = nullptr;  // forces central finite differences
  Trajectory traj = ode_oracle(phi, r, {0.7, 0.3}, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); i += 50) {
    Vec a = descending_gradient(r, phi, traj.points[i]);
    Vec b = descending_gradient(r, fd, traj.points[i]);
    worst = std::max(worst, max_abs_diff(a, b));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("ODE oracle chain-rule residual on Randers with p = 3") {
  SpaceHandle r = make_randers(2, {0.4, 0.1});
  Potential phi = quadratic(3.0, 0.0);
  Trajectory traj = ode_oracle(phi, r, {0.9, -0.4}, 1.0);
  CHECK(traj.max_chain_residual <= 1e-6);
  // phi decreases along the flow
  for (std::size_t i = 1; i < traj.size(); ++i)
    CHECK(traj.phi_values[i] <= traj.phi_values[i - 1] + 1e-12);
}

TEST_CASE("ODE oracle truncates on domain exit") {
  // phi = -1/(1 - ||x||) = -exp(d(0,x)) on the Funk ball: the slope along the
  // descending flow is 1/(1-||x||), which blows up, so the run escapes to the
  // boundary in finite time (about 0.7 from this start).
  SpaceHandle funk = make_funk_ball(2);
  Potential esc;
  esc.value = [](const Vec& x) {
    const double r = norm(x);
    return r < 1.0 ? -1.0 / (1.0 - r) : -std::numeric_limits<double>::infinity();
  };
  esc.grad = [](const Vec& x) {
    const double r = norm(x);
    if (r < 1e-14) return zeros(x.size());
    const double m = 1.0 - r;
    return scaled(x, -1.0 / (r * m * m));
  };
  Trajectory traj = ode_oracle(esc, funk, {0.3, 0.0}, 2.0);
  CHECK(traj.domain_exit);
  CHECK(traj.times.back() < 1.0);
  CHECK(norm(traj.points.back()) < 1.0);
  // forward distance from the start blows up along the way
  CHECK(funk.distance({0.3, 0.0}, traj.points.back()) > 3.0);
}

TEST_CASE("energy identity residual on trajectories") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();

  // constant trajectory
  Trajectory still = ode_oracle(phi, eu, {0.0, 0.0}, 1.0);
  CHECK(verify_energy_identity(still, phi, eu) <= 1e-14);

  // analytic flow at 10^3 samples
  RkConfig rk;
  rk.n_samples = 1001;
  Trajectory traj = ode_oracle(phi, eu, {0.8, -0.6}, 2.0, rk);
  CHECK(verify_energy_identity(traj, phi, eu) <= 1e-6);

  // MMS finest-sweep trajectory on the Funk test
  SpaceHandle funk = make_funk_ball(2);
  Potential sq = funk_sqdist(funk);
  SolverConfig cfg;
  cfg.barrier_strength = 1e-8;
  LimitResult lim = limit_trajectory(sq, funk, {0.5, 0.2}, 1.0, {1e-2, 3e-3, 1e-3}, cfg, 2);
  CHECK(verify_energy_identity(lim.trajectory, sq, funk) <= 1e-3);
}

TEST_CASE("exponential decay bounds") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  Trajectory traj = ode_oracle(phi, eu, {0.8, -0.6}, 3.0);

  CheckReport rep = verify_exponential_decay(traj, phi, eu, 0.0);
  CHECK(rep.pass);

  // the lambda = 1, p = 2 quadratic attains the bound: fitted exponent is 2
  const double exponent = fitted_decay_exponent(traj, 0.0, 0.1, 3.0);
  CHECK(exponent == doctest::Approx(2.0).epsilon(0.02));

  // constant trajectory at the minimizer
  Trajectory still = ode_oracle(phi, eu, {0.0, 0.0}, 1.0);
  CHECK(verify_exponential_decay(still, phi, eu, 0.0).pass);

  // strongly convex test on Randers: bound satisfied with slack
  SpaceHandle r = make_randers(2, {0.5, 0.0});
  Potential rq = quadratic(2.0, 4.0 / 9.0);
  Trajectory rt = ode_oracle(rq, r, {0.7, 0.3}, 2.0);
  CheckReport rrep = verify_exponential_decay(rt, rq, r, 0.0);
  CHECK(rrep.pass);
}

TEST_CASE("regularization constant quadrature vs closed forms") {
  // C(2, lambda, t) = t
  for (double lambda : {-1.0, 0.0, 0.7, 2.0})
    for (double t : {0.1, 0.5, 1.5})
      CHECK(std::fabs(regularization_constant(2.0, lambda, t) - t) <= 1e-10);

  // C(p, 0, t) = t^{p-1}/(p-1)
  for (double p : {1.5, 2.5, 3.0})
    for (double t : {0.1, 0.5, 1.5})
      CHECK(std::fabs(regularization_constant(p, 0.0, t) -
                      std::pow(t, p - 1.0) / (p - 1.0)) <= 1e-10);

  // lambda -> 0 limit at p = 3 approaches the closed form; the decay factor
  // carries |lambda|^{q/p}, so the convergence rate is lambda^{3/4}
  const double target = regularization_constant(3.0, 0.0, 0.5);
  double prev_err = 1e300;
  for (double lambda : {1e-2, 1e-4, 1e-6}) {
    const double err = std::fabs(regularization_constant(3.0, lambda, 0.5) - target);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err <= 1e-4);
}

TEST_CASE("slope regularization bounds along certified runs") {
  SolverConfig cfg;
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  Trajectory traj = ode_oracle(phi, eu, {0.8, -0.6}, 2.0);
  CheckReport rep = verify_slope_regularization(traj, phi, eu, 0.0, cfg);
  CHECK(rep.pass);

  // regime guard
  Potential bad = quadratic(3.0, 1.0);
  CHECK_THROWS_AS(verify_slope_regularization(traj, bad, eu, 0.0, cfg), unsupported_operation);
}

TEST_CASE("monotone weighted slope along trajectories") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  Trajectory traj = ode_oracle(phi, eu, {0.8, -0.6}, 2.0);
  // e^t |xi(t)| is constant for the analytic flow: equality case
  CheckReport rep = monotone_slope_check(traj, 2.0, 1.0);
  CHECK(rep.pass);

  Trajectory still = ode_oracle(phi, eu, {0.0, 0.0}, 1.0);
  CHECK(monotone_slope_check(still, 2.0, 1.0).pass);

  // MMS Funk run
  SpaceHandle funk = make_funk_ball(2);
  Potential sq = funk_sqdist(funk);
  SolverConfig cfg;
  cfg.barrier_strength = 1e-8;
  LimitResult lim = limit_trajectory(sq, funk, {0.5, 0.2}, 1.0, {3e-3, 1e-3}, cfg, 2);
  CheckReport frep = monotone_slope_check(lim.trajectory, 2.0, 0.0);
  CHECK(frep.pass);
}

TEST_CASE("DNE residual on the smooth Euclidean flow") {
  SpaceHandle eu = make_euclidean(2);
  PotentialParams params;
  params.vectors["center"] = {0.0, 0.0};
  PotentialEntry entry = make_potential("quadratic", params, eu);

  SplitPotential split;
  split.total = entry.phi;
  split.value_phi1 = [](const Vec&) { return 0.0; };
  split.subdiff_phi1 = nullptr;  // no convex part
  split.grad_phi2 = entry.phi.grad;

  RkConfig rk;
  rk.n_samples = 2001;  // dt = 1e-3 on [0,2]
  Trajectory traj = ode_oracle(entry.phi, eu, {0.8, -0.6}, 2.0, rk);
  DneResult res = dne_residual(traj, split, eu, 2.0);
  CHECK(res.n_skipped == 0);
  CHECK(res.max_residual <= 1e-5);

  // critical point: residual identically zero
  Trajectory still = ode_oracle(entry.phi, eu, {0.0, 0.0}, 1.0, rk);
  CHECK(dne_residual(still, split, eu, 2.0).max_residual <= 1e-14);
}

TEST_CASE("DNE residual on the Randers convex-split test") {
  SpaceHandle r = make_randers(2, {0.4, 0.1});
  PotentialParams params;
  params.vectors["center"] = {0.6, 0.5};
  params.scalars["weight"] = 0.25;
  PotentialEntry entry = make_potential("l1_plus_quadratic", params, r);
  REQUIRE(entry.split.has_value());

  // MMS limit trajectory at tau = 1e-3 (the potential is non-smooth, so the
  // oracle does not apply)
  SolverConfig cfg;
  LimitResult lim = limit_trajectory(entry.phi, r, {-0.5, -0.4}, 1.0, {1e-3}, cfg);
  DneResult res = dne_residual(lim.trajectory, *entry.split, r, 2.0);
  CHECK(res.n_checked > 0);
  CHECK(res.max_residual <= 1e-2);
}

TEST_CASE("local slope vs minimal subdifferential (convex split)") {
  SpaceHandle r = make_randers(2, {0.4, 0.1});
  PotentialParams params;
  params.vectors["center"] = {0.6, 0.5};
  params.scalars["weight"] = 0.25;
  PotentialEntry entry = make_potential("l1_plus_quadratic", params, r);

  Rng rng(81);
  double worst_upper = 0.0, worst_eq = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vec x = rng.box(2, 1.0);
    if (std::fabs(x[0]) < 2e-2) x[0] += 0.05;  // stay off the kink
    Vec eta = minimal_subdifferential(*entry.split, r, x);
    const double upper = r.tangent->dual_norm(x, negated(eta));
    const double slope = local_slope(entry.phi, r, x);
    worst_upper = std::max(worst_upper, slope - upper - 1e-4);
    worst_eq = std::max(worst_eq, std::fabs(slope - upper));
  }
  CHECK(worst_upper <= 0.0);  // |dphi| <= F*(-d^o phi)
  CHECK(worst_eq <= 1e-3);    // equality for convex phi
}

TEST_CASE("MMS converges to the oracle at first order") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  SolverConfig cfg;
  const Vec x0{1.0, -0.5};
  Trajectory oracle = ode_oracle(phi, eu, x0, 1.0);

  auto sup_error = [&](double tau) {
    DiscreteSolution sol = run_scheme(phi, eu, x0, Partition::uniform(1.0, tau), cfg);
    double sup = 0.0;
    for (std::size_t k = 0; k < sol.points.size(); ++k) {
      const double t = sol.partition.times[k];
      Vec expected = scaled(x0, std::exp(-t));
      sup = std::max(sup, norm(sub(sol.points[k], expected)));
    }
    return sup;
  };

  // halved steps: consecutive error ratios sit in [1.5, 4]
  std::vector<double> errors;
  for (double tau : {0.08, 0.04, 0.02, 0.01}) errors.push_back(sup_error(tau));
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double ratio = errors[i - 1] / errors[i];
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 4.0);
  }
}
