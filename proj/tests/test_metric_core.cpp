#include <doctest.h>

#include <cmath>

#include "asymflow/errors.hpp"
#include "asymflow/metric_core.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

using namespace asymflow;

namespace {

// Independent oracle for the Hilbert (Klein) metric: half the log cross ratio
// along the chord through a and b, with P, a, b, Q ordered on the line.
double hilbert_cross_ratio(const Vec& a, const Vec& b) {
  Vec u = sub(b, a);
  const double len = norm(u);
  u = scaled(u, 1.0 / len);
  const double B = dot(a, u), C = dot(a, a) - 1.0;
  const double disc = std::sqrt(B * B - C);
  const Vec P = axpy(a, -B - disc, u);  // behind a
  const Vec Q = axpy(a, -B + disc, u);  // past b
  return 0.5 * std::log((norm(sub(Q, a)) * norm(sub(P, b))) / (norm(sub(Q, b)) * norm(sub(P, a))));
}

}  // namespace

TEST_CASE("appendix constant values") {
  CHECK(appendix_constant(1.0, 0.5) == 1.0);
  CHECK(appendix_constant(2.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(appendix_constant(2.0, 1e6) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(appendix_constant(0.5, 1.0), parameter_error);
  CHECK_THROWS_AS(appendix_constant(2.0, 0.0), parameter_error);
}

TEST_CASE("appendix inequality holds on random tuples") {
  Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double a = rng.uniform(0.0, 10.0);
    const double b = rng.uniform(0.0, 10.0);
    const double eps = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    const double p = rng.uniform(1.0, 5.0);
    const double lhs = (1.0 + eps) * std::pow(a, p) + appendix_constant(p, eps) * std::pow(b, p);
    const double rhs = std::pow(a + b, p);
    worst = std::max(worst, (rhs - lhs) / std::max(1.0, rhs));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("symmetrized Funk distance at closed-form points") {
  SpaceHandle funk = make_funk_ball(2);
  const Vec origin{0.0, 0.0};
  CHECK(symmetrized_distance(funk, origin, origin) == 0.0);
  // d(0,y) = -log(1-1/2), d(y,0) = log(1+1/2)
  const Vec y{0.5, 0.0};
  const double expected = 0.5 * (std::log(2.0) + std::log(1.5));
  CHECK(symmetrized_distance(funk, origin, y) == doctest::Approx(expected).epsilon(1e-14));
  // symmetric in its arguments
  CHECK(symmetrized_distance(funk, y, origin) ==
        doctest::Approx(symmetrized_distance(funk, origin, y)).epsilon(1e-15));
}

TEST_CASE("symmetrized Randers distance with zero drift is Euclidean") {
  SpaceHandle r = make_randers(3, {0.0, 0.0, 0.0});
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec x = rng.box(3, 2.0), y = rng.box(3, 2.0);
    CHECK(symmetrized_distance(r, x, y) == doctest::Approx(norm(sub(y, x))).epsilon(1e-14));
  }
}

TEST_CASE("reverse metric is an involution and swaps arguments") {
  SpaceHandle funk = make_funk_ball(2);
  SpaceHandle rev = reverse_metric(funk);
  SpaceHandle revrev = reverse_metric(rev);
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Vec x = sample_point(funk, rng), y = sample_point(funk, rng);
    CHECK(rev.distance(x, y) == funk.distance(y, x));
    CHECK(revrev.distance(x, y) == funk.distance(x, y));  // bitwise
  }
  // reverse of the Funk metric at the origin: log(1 + ||x||)
  for (int i = 0; i < 100; ++i) {
    Vec x = sample_point(funk, rng);
    CHECK(rev.distance({0.0, 0.0}, x) == doctest::Approx(std::log1p(norm(x))).epsilon(1e-13));
  }
}

TEST_CASE("reverse of Randers equals Randers with negated drift") {
  SpaceHandle r = make_randers(2, {0.4, -0.2});
  SpaceHandle rev = reverse_metric(r);
  SpaceHandle neg = make_randers(2, {-0.4, 0.2});
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    Vec x = rng.box(2, 2.0), y = rng.box(2, 2.0);
    CHECK(rev.distance(x, y) == doctest::Approx(neg.distance(x, y)).epsilon(1e-14));
  }
}

TEST_CASE("axiom harness: Euclidean and Funk pass, broken fixture fails") {
  AxiomReport eu = check_axioms(make_euclidean(2), 300, 123);
  CHECK(eu.pass(1e-12));

  AxiomReport fk = check_axioms(make_funk_ball(2), 1000, 123);
  CHECK(fk.max_identity_violation <= 1e-12);
  CHECK(fk.max_triangle_violation <= 1e-12);
  CHECK(fk.max_reversibility_violation <= 1e-12);

  SpaceHandle broken = make_euclidean(2);
  broken.distance = [](const Vec& x, const Vec& y) { return norm(sub(y, x)) - 0.1; };
  AxiomReport br = check_axioms(broken, 100, 123);
  CHECK(br.max_identity_violation > 0.0);
  CHECK_FALSE(br.pass(1e-12));
}

TEST_CASE("axiom harness is deterministic given the seed") {
  AxiomReport a = check_axioms(make_funk_ball(2), 200, 99);
  AxiomReport b = check_axioms(make_funk_ball(2), 200, 99);
  CHECK(a.max_triangle_violation == b.max_triangle_violation);
  CHECK(a.max_reversibility_violation == b.max_reversibility_violation);
}

TEST_CASE("triangle inequality holds for the symmetrized metric too") {
  for (int dim : {2, 3}) {
    SpaceHandle funk = make_funk_ball(dim);
    Rng rng(21);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      Vec x = sample_point(funk, rng), y = sample_point(funk, rng), z = sample_point(funk, rng);
      worst = std::max(worst, symmetrized_distance(funk, x, z) -
                                  symmetrized_distance(funk, x, y) -
                                  symmetrized_distance(funk, y, z));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("symmetrized Funk equals the Hilbert cross-ratio metric") {
  for (int dim : {2, 3}) {
    SpaceHandle funk = make_funk_ball(dim);
    Rng rng(31);
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
      Vec a = sample_point(funk, rng), b = sample_point(funk, rng);
      if (norm(sub(b, a)) < 1e-6) continue;
      worst = std::max(worst,
                       std::fabs(hilbert_cross_ratio(a, b) - symmetrized_distance(funk, a, b)));
    }
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("point construction validates the domain") {
  SpaceHandle funk = make_funk_ball(2);
  CHECK_NOTHROW(Point(funk, {0.3, 0.1}));
  CHECK_THROWS_AS(Point(funk, {1.2, 0.0}), domain_error);
  CHECK_THROWS_AS(Point(funk, {0.1, 0.2, 0.3}), parameter_error);
}
