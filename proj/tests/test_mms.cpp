#include <doctest.h>

#include <cmath>

#include "asymflow/envelope.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/mms.hpp"
#include "asymflow/spaces.hpp"

using namespace asymflow;

namespace {

Potential quadratic() {
  Potential phi;
  phi.name = "quadratic";
  phi.value = [](const Vec& x) { return 0.5 * norm_sq(x); };
  phi.grad = [](const Vec& x) { return x; };
  phi.convexity = PLCertificate{2.0, 1.0};
  phi.known_inf = 0.0;
  phi.known_minimizer = Vec{0.0, 0.0};
  return phi;
}

Potential funk_sqdist(const SpaceHandle& funk) {
  Potential phi;
  phi.name = "sqdist";
  auto dist = funk.distance;
  auto dist_grad = funk.distance_grad_y;
  phi.value = [dist](const Vec& x) {
    const double d = dist({0.0, 0.0}, x);
    return 0.5 * d * d;
  };
  phi.grad = [dist, dist_grad](const Vec& x) {
    const double d = dist({0.0, 0.0}, x);
    if (d < 1e-14) return zeros(x.size());
    return scaled(dist_grad({0.0, 0.0}, x), d);
  };
  phi.convexity = PLCertificate{2.0, 0.5};
  phi.known_inf = 0.0;
  phi.known_minimizer = Vec{0.0, 0.0};
  return phi;
}

}  // namespace

TEST_CASE("partition construction") {
  Partition p = Partition::uniform(1.0, 0.3);
  REQUIRE(p.n_steps() == 4);
  CHECK(p.times.back() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.norm == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(Partition::from_steps({0.1, -0.1}), parameter_error);
}

TEST_CASE("quadratic proximal recursion matches the closed form over 100 steps") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  SolverConfig cfg;
  const Vec x0{1.0, -0.5};
  const double tau = 0.1;
  DiscreteSolution sol = run_scheme(phi, eu, x0, Partition::uniform(10.0, tau), cfg);
  REQUIRE(sol.points.size() == 101);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.points.size(); ++k) {
    const Vec expected = scaled(x0, std::pow(1.0 + tau, -static_cast<double>(k)));
    worst = std::max(worst, max_abs_diff(sol.points[k], expected));
  }
  CHECK(worst <= 1e-8);

  // phi values non-increasing
  for (std::size_t k = 1; k < sol.phis.size(); ++k) CHECK(sol.phis[k] <= sol.phis[k - 1] + 1e-12);
}

TEST_CASE("scheme fixes the minimizer") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  SolverConfig cfg;
  DiscreteSolution sol = run_scheme(phi, eu, {0.0, 0.0}, Partition::uniform(1.0, 0.1), cfg);
  for (const auto& pt : sol.points) CHECK(norm(pt) <= 1e-9);
}

TEST_CASE("scheme rejects steps above the coercivity horizon") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  phi.convexity = PLCertificate{2.0, -2.0};  // horizon 1/2
  SolverConfig cfg;
  CHECK_THROWS_AS(run_scheme(phi, eu, {0.1, 0.1}, Partition::uniform(3.0, 0.75), cfg),
                  parameter_error);
}

TEST_CASE("scheme failure carries the partial solution") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  SolverConfig starved;
  starved.max_iter = 1;
  starved.grad_tol = 1e-16;
  try {
    run_scheme(phi, eu, {3.0, -4.0}, Partition::uniform(1.0, 0.25), starved);
    FAIL("expected scheme_error");
  } catch (const scheme_error& e) {
    CHECK(e.partial_solution.points.size() >= 1);
    CHECK(max_abs_diff(e.partial_solution.points.front(), {3.0, -4.0}) == 0.0);
  }
}

TEST_CASE("discrete Euler-Lagrange relation at converged iterates") {
  // (X^k - X^{k-1})/tau = F^{(2-p)/(p-1)}(grad(-phi)(X^k)) grad(-phi)(X^k)
  SpaceHandle r = make_randers(2, {0.4, 0.1});
  Potential phi = quadratic();
  SolverConfig cfg;
  const double tau = 0.05;
  for (double p : {2.0, 3.0}) {
    phi.p = p;
    phi.convexity = PLCertificate{p, 0.0};
    DiscreteSolution sol = run_scheme(phi, r, {0.8, -0.3}, Partition::uniform(0.5, tau), cfg);
    double worst = 0.0;
    for (std::size_t k = 1; k < sol.points.size(); ++k) {
      Vec lhs = scaled(sub(sol.points[k], sol.points[k - 1]), 1.0 / tau);
      Vec g = descending_gradient(r, phi, sol.points[k]);
      const double fg = r.tangent->norm(sol.points[k], g);
      Vec rhs = fg < 1e-14 ? zeros(2) : scaled(g, std::pow(fg, (2.0 - p) / (p - 1.0)));
      worst = std::max(worst, max_abs_diff(lhs, rhs));
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("De Giorgi interpolation") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  SolverConfig cfg;
  const Vec x0{1.0, 0.0};
  const double tau = 0.2;
  DiscreteSolution sol = run_scheme(phi, eu, x0, Partition::uniform(1.0, tau), cfg);

  // node times return the stored iterate exactly
  for (std::size_t k = 0; k < sol.points.size(); ++k) {
    Vec v = de_giorgi_interpolant(phi, eu, sol, sol.partition.times[k], cfg);
    CHECK(max_abs_diff(v, sol.points[k]) == 0.0);
  }

  // interior: X^{k-1}/(1+delta) for the quadratic
  for (double frac : {0.25, 0.5, 0.75}) {
    const double t = sol.partition.times[2] + frac * tau;
    Vec v = de_giorgi_interpolant(phi, eu, sol, t, cfg);
    Vec expected = scaled(sol.points[2], 1.0 / (1.0 + frac * tau));
    CHECK(max_abs_diff(v, expected) <= 1e-8);
  }

  // delta -> 0 recovers the left node
  double prev = 1e300;
  for (double delta : {1e-2, 1e-3, 1e-4}) {
    Vec v = de_giorgi_interpolant(phi, eu, sol, sol.partition.times[2] + delta, cfg);
    const double gap = max_abs_diff(v, sol.points[2]);
    CHECK(gap <= prev + 1e-12);
    prev = gap;
  }
  CHECK(prev <= 1e-4);
}

TEST_CASE("g_tau values and the slope bound") {
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  SolverConfig cfg;
  const Vec x0{1.0, 0.0};
  const double tau = 0.2;
  DiscreteSolution sol = run_scheme(phi, eu, x0, Partition::uniform(1.0, tau), cfg);

  // minimizer start: G identically zero
  DiscreteSolution still = run_scheme(phi, eu, {0.0, 0.0}, Partition::uniform(0.4, tau), cfg);
  CHECK(g_tau(phi, eu, still, 0.3, cfg) <= 1e-9);

  // quadratic: G(t^{k-1}+delta) = |X^{k-1}| / (1+delta)
  for (double frac : {0.3, 0.6, 1.0}) {
    const double delta = frac * tau;
    const double g = g_tau(phi, eu, sol, sol.partition.times[1] + delta, cfg);
    CHECK(std::fabs(g - norm(sol.points[1]) / (1.0 + delta)) <= 1e-7);
  }

  // |dphi|^q(interpolant) <= G^p on a Randers linear potential
  SpaceHandle r = make_randers(2, {0.5, 0.0});
  Potential lin;
  lin.value = [](const Vec& x) { return x[0]; };
  lin.grad = [](const Vec&) { return Vec{1.0, 0.0}; };
  DiscreteSolution rsol = run_scheme(lin, r, {0.0, 0.0}, Partition::uniform(0.5, 0.1), cfg);
  double worst = 0.0;
  for (double t : {0.05, 0.17, 0.31, 0.48}) {
    const double g = g_tau(lin, r, rsol, t, cfg);
    Vec pt = de_giorgi_interpolant(lin, r, rsol, t, cfg);
    const double slope_q = std::pow(local_slope_smooth(lin, r, pt), 2.0);
    worst = std::max(worst, slope_q - g * g);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("discrete energy identity") {
  SolverConfig cfg;
  SpaceHandle eu = make_euclidean(2);

  // constant potential: all terms vanish
  Potential flat;
  flat.value = [](const Vec&) { return 2.0; };
  flat.grad = [](const Vec& x) { return zeros(x.size()); };
  DiscreteSolution fsol = run_scheme(flat, eu, {0.4, 0.4}, Partition::uniform(0.5, 0.1), cfg);
  CHECK(discrete_energy_identity(flat, eu, fsol, 0, fsol.partition.n_steps(), 8, cfg) <= 1e-10);

  // quadratic closed form: residual < 1e-9
  Potential phi = quadratic();
  DiscreteSolution sol = run_scheme(phi, eu, {1.0, -0.5}, Partition::uniform(1.0, 0.1), cfg);
  GTauTable table(phi, eu, sol, cfg);
  const double res =
      discrete_energy_identity(phi, eu, sol, 0, sol.partition.n_steps(), 8, cfg, &table);
  CHECK(res <= 1e-9);
  // sub-windows as well
  CHECK(discrete_energy_identity(phi, eu, sol, 2, 7, 8, cfg, &table) <= 1e-9);

  // Funk test potential at quadrature order 32
  SpaceHandle funk = make_funk_ball(2);
  Potential sq = funk_sqdist(funk);
  SolverConfig fcfg;
  fcfg.barrier_strength = 1e-8;
  DiscreteSolution fk = run_scheme(sq, funk, {0.5, 0.2}, Partition::uniform(0.5, 0.1), fcfg);
  CHECK(discrete_energy_identity(sq, funk, fk, 0, fk.partition.n_steps(), 32, fcfg) <= 1e-4);
}

TEST_CASE("a priori estimates") {
  SolverConfig cfg;
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();

  // single step: the bound is the step inequality itself
  DiscreteSolution one = run_scheme(phi, eu, {0.8, 0.0}, Partition::uniform(0.1, 0.1), cfg);
  CheckReport rep1 = a_priori_check(phi, eu, one, {0.0, 0.0}, 1.0, 0.1, cfg);
  CHECK(rep1.pass);

  DiscreteSolution sol = run_scheme(phi, eu, {1.0, -0.5}, Partition::uniform(1.0, 0.05), cfg);
  CheckReport rep = a_priori_check(phi, eu, sol, {0.0, 0.0}, 1.0, 1.0, cfg);
  CHECK(rep.pass);
  CHECK(rep.details["telescoping_sum"] < sol.phis[0] - sol.phis.back() + 1e-9);

  SpaceHandle funk = make_funk_ball(2);
  Potential sq = funk_sqdist(funk);
  SolverConfig fcfg;
  fcfg.barrier_strength = 1e-8;
  DiscreteSolution fk = run_scheme(sq, funk, {0.5, 0.2}, Partition::uniform(1.0, 0.05), fcfg);
  CheckReport frep = a_priori_check(sq, funk, fk, {0.0, 0.0}, 1.0, 1.0, fcfg);
  CHECK(frep.max_violation <= 1e-6);
}

TEST_CASE("weighted slope monotonicity along discrete solutions") {
  SolverConfig cfg;
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  DiscreteSolution sol = run_scheme(phi, eu, {1.0, 0.3}, Partition::uniform(1.0, 0.1), cfg);
  CheckReport rep = weighted_slope_monotonicity(phi, eu, sol, 1.0);
  CHECK(rep.pass);
  CHECK(rep.max_violation <= 1e-5);
}

TEST_CASE("limit trajectory: quadratic flow and its diagnostics") {
  SolverConfig cfg;
  SpaceHandle eu = make_euclidean(2);
  Potential phi = quadratic();
  const Vec x0{1.0, -0.5};
  LimitResult lim = limit_trajectory(phi, eu, x0, 1.0, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}, cfg, 2);

  // Cauchy distances decrease
  for (std::size_t i = 1; i < lim.report.cauchy_distances.size(); ++i)
    CHECK(lim.report.cauchy_distances[i] <= lim.report.cauchy_distances[i - 1]);
  CHECK_FALSE(lim.report.divergence_warning);

  // finest member tracks e^{-t} x0 at first order in tau
  double worst = 0.0;
  for (std::size_t i = 0; i < lim.trajectory.size(); ++i) {
    Vec expected = scaled(x0, std::exp(-lim.trajectory.times[i]));
    worst = std::max(worst, max_abs_diff(lim.trajectory.points[i], expected));
  }
  CHECK(worst <= 2e-3);

  CHECK(lim.report.energy_residual <= 1e-4);

  // constant start at the minimizer
  LimitResult still = limit_trajectory(phi, eu, {0.0, 0.0}, 0.5, {1e-1, 3e-2}, cfg);
  for (const auto& pt : still.trajectory.points) CHECK(norm(pt) <= 1e-8);
  CHECK(still.report.energy_residual <= 1e-10);

  // decreasing sweep enforced
  CHECK_THROWS_AS(limit_trajectory(phi, eu, x0, 0.5, {1e-2, 1e-1}, cfg), parameter_error);
}
