#include <doctest.h>

#include <cmath>

#include "asymflow/curves.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

using namespace asymflow;

namespace {

SampledCurve straight_line(const SpaceHandle& space, const Vec& a, const Vec& b, int n,
                           double t0 = 0.0, double t1 = 1.0) {
  std::vector<double> times;
  std::vector<Vec> points;
  for (int i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / (n - 1);
    times.push_back(t0 + u * (t1 - t0));
    points.push_back(axpy(a, u, sub(b, a)));
  }
  return SampledCurve(std::move(times), std::move(points), space);
}

}  // namespace

TEST_CASE("forward metric derivative on basic curves") {
  SpaceHandle eu = make_euclidean(2);

  // constant curve
  std::vector<double> ts{0.0, 0.5, 1.0};
  std::vector<Vec> ps{{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
  SampledCurve constant(ts, ps, eu);
  for (std::size_t i = 0; i < constant.size(); ++i)
    CHECK(forward_metric_derivative(constant, i) == 0.0);

  // unit-speed line, uniform sampling: exactly 1 at interior nodes
  SampledCurve line = straight_line(eu, {0.0, 0.0}, {1.0, 0.0}, 11);
  for (std::size_t i = 1; i + 1 < line.size(); ++i)
    CHECK(forward_metric_derivative(line, i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("forward metric derivative approaches F(gamma') on a Funk curve") {
  SpaceHandle funk = make_funk_ball(2);
  // gamma(t) = (0.4 sin t, 0.4 t (1-t)): smooth, interior
  auto gamma = [](double t) { return Vec{0.4 * std::sin(t), 0.4 * t * (1.0 - t)}; };
  auto dgamma = [](double t) { return Vec{0.4 * std::cos(t), 0.4 * (1.0 - 2.0 * t)}; };
  for (int n : {100, 400}) {
    std::vector<double> ts;
    std::vector<Vec> ps;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      ts.push_back(t);
      ps.push_back(gamma(t));
    }
    SampledCurve c(ts, ps, funk);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < c.size(); ++i)
      worst = std::max(worst, std::fabs(forward_metric_derivative(c, i) -
                                        funk_norm(c.points[i], dgamma(c.times[i]))));
    // first-order in the grid spacing
    CHECK(worst <= 5.0 / n);
  }
}

TEST_CASE("length of segments and Funk chords") {
  SpaceHandle eu = make_euclidean(2);
  SampledCurve c3 = straight_line(eu, {0.0, 0.0}, {1.0, 0.0}, 3);
  SampledCurve c17 = straight_line(eu, {0.0, 0.0}, {1.0, 0.0}, 17);
  CHECK(length(c3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(length(c17) == doctest::Approx(1.0).epsilon(1e-15));

  // zero length for the constant curve
  std::vector<double> ts{0.0, 1.0};
  std::vector<Vec> ps{{0.5, 0.5}, {0.5, 0.5}};
  CHECK(length(SampledCurve(ts, ps, eu)) == 0.0);

  // Funk chord from the origin: length equals d(0, endpoint) = log 2 under
  // refinement (chords are geodesics)
  SpaceHandle funk = make_funk_ball(2);
  const double expected = std::log(2.0);
  for (int n : {2, 9, 33, 129}) {
    SampledCurve chord = straight_line(funk, {0.0, 0.0}, {0.5, 0.0}, n);
    CHECK(std::fabs(length(chord) - expected) <= 1e-10);
  }
}

TEST_CASE("length never decreases under refinement") {
  SpaceHandle funk = make_funk_ball(2);
  Rng rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    // random interior polyline
    std::vector<double> ts;
    std::vector<Vec> ps;
    const int n = 6;
    for (int i = 0; i < n; ++i) {
      ts.push_back(i);
      ps.push_back(rng.box(2, 0.6));
      if (norm(ps.back()) >= 0.95) ps.back() = scaled(ps.back(), 0.5);
    }
    SampledCurve coarse(ts, ps, funk);
    // refine: insert segment midpoints (coordinate midpoints)
    std::vector<double> ts2;
    std::vector<Vec> ps2;
    for (int i = 0; i < n; ++i) {
      ts2.push_back(ts[i]);
      ps2.push_back(ps[i]);
      if (i + 1 < n) {
        ts2.push_back(0.5 * (ts[i] + ts[i + 1]));
        ps2.push_back(scaled(add(ps[i], ps[i + 1]), 0.5));
      }
    }
    SampledCurve fine(ts2, ps2, funk);
    CHECK(length(fine) >= length(coarse) - 1e-12);
  }
}

TEST_CASE("straight segments realize the distance in Randers spaces") {
  SpaceHandle r = make_randers(2, {0.5, 0.0});
  Rng rng(53);
  for (int rep = 0; rep < 50; ++rep) {
    Vec a = rng.box(2, 2.0), b = rng.box(2, 2.0);
    SampledCurve seg = straight_line(r, a, b, 9);
    CHECK(std::fabs(length(seg) - r.distance(a, b)) <= 1e-12);
  }
}

TEST_CASE("unit-speed reparametrization") {
  SpaceHandle eu = make_euclidean(2);

  // segment traversed at speed 2 on [0,1] -> domain [0,2], speed 1
  SampledCurve fast = straight_line(eu, {0.0, 0.0}, {2.0, 0.0}, 11);
  SampledCurve unit = reparametrize_unit_speed(fast);
  CHECK(unit.times.front() == 0.0);
  CHECK(unit.times.back() == doctest::Approx(2.0).epsilon(1e-14));
  for (std::size_t i = 1; i < unit.size(); ++i) {
    const double speed = eu.distance(unit.points[i - 1], unit.points[i]) /
                         (unit.times[i] - unit.times[i - 1]);
    CHECK(speed == doctest::Approx(1.0).epsilon(1e-10));
  }

  // idempotence on an already unit-speed curve
  SampledCurve again = reparametrize_unit_speed(unit);
  REQUIRE(again.size() == unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i)
    CHECK(std::fabs(again.times[i] - unit.times[i]) <= 1e-10);

  // Funk chord with non-uniform sampling: all segment speeds within 1e-8 of 1
  SpaceHandle funk = make_funk_ball(2);
  std::vector<double> ts;
  std::vector<Vec> ps;
  const Vec a{-0.2, 0.1}, b{0.6, 0.3};
  const int n = 40;
  for (int i = 0; i <= n; ++i) {
    const double u = std::pow(static_cast<double>(i) / n, 2.0);  // clustered
    ts.push_back(i);
    ps.push_back(axpy(a, u, sub(b, a)));
  }
  SampledCurve chord(ts, ps, funk);
  SampledCurve uchord = reparametrize_unit_speed(chord);
  for (std::size_t i = 1; i < uchord.size(); ++i) {
    const double speed = funk.distance(uchord.points[i - 1], uchord.points[i]) /
                         (uchord.times[i] - uchord.times[i - 1]);
    CHECK(std::fabs(speed - 1.0) <= 1e-8);
  }

  // length is preserved
  CHECK(std::fabs(length(uchord) - length(chord)) <= 1e-9);

  // zero-length curve refuses
  std::vector<double> zts{0.0, 1.0};
  std::vector<Vec> zps{{0.1, 0.1}, {0.1, 0.1}};
  CHECK_THROWS_AS(reparametrize_unit_speed(SampledCurve(zts, zps, eu)), degenerate_input);
}

TEST_CASE("curve construction validates input") {
  SpaceHandle funk = make_funk_ball(2);
  std::vector<double> bad_times{0.0, 0.0};
  std::vector<Vec> pts{{0.1, 0.1}, {0.2, 0.2}};
  CHECK_THROWS_AS(SampledCurve(bad_times, pts, funk), parameter_error);
  std::vector<double> times{0.0, 1.0};
  std::vector<Vec> outside{{0.1, 0.1}, {1.2, 0.0}};
  CHECK_THROWS_AS(SampledCurve(times, outside, funk), domain_error);
}
