#include "asymflow/metric_core.hpp"

#include <algorithm>
#include <cmath>

#include "asymflow/errors.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

namespace asymflow {

Point::Point(const SpaceHandle& space, Vec coordinates) : coords(std::move(coordinates)) {
  if (static_cast<int>(coords.size()) != space.dim)
    throw parameter_error("point dimension does not match space");
  if (!space.in_domain(coords)) throw domain_error("point outside the space domain");
}

double symmetrized_distance(const SpaceHandle& space, const Vec& x, const Vec& y) {
  if (!space.in_domain(x) || !space.in_domain(y))
    throw domain_error("symmetrized_distance: point outside domain");
  return 0.5 * (space.distance(x, y) + space.distance(y, x));
}

SpaceHandle reverse_metric(const SpaceHandle& space) {
  SpaceHandle rev = space;
  rev.name = space.name + "_reversed";
  auto d = space.distance;
  rev.distance = [d](const Vec& x, const Vec& y) { return d(y, x); };
  if (space.tangent) {
    // F_rev(x,v) = F(x,-v); Legendre maps pick up a sign on both sides.
    auto t = space.tangent;
    auto rt = std::make_shared<SmoothTangentStructure>();
    rt->norm = [t](const Vec& x, const Vec& v) { return t->norm(x, negated(v)); };
    rt->dual_norm = [t](const Vec& x, const Vec& z) { return t->dual_norm(x, negated(z)); };
    rt->legendre = [t](const Vec& x, const Vec& v) { return negated(t->legendre(x, negated(v))); };
    rt->legendre_inv = [t](const Vec& x, const Vec& z) {
      return negated(t->legendre_inv(x, negated(z)));
    };
    rev.tangent = rt;
  }
  if (space.geodesic) {
    auto g = space.geodesic;
    rev.geodesic = [g](const Vec& x0, const Vec& x1, double t) { return g(x1, x0, 1.0 - t); };
  }
  rev.distance_grad_y = nullptr;  // not needed downstream; finite differences cover it
  return rev;
}

double appendix_constant(double p, double eps) {
  if (p < 1.0 || eps <= 0.0) throw parameter_error("appendix_constant requires p >= 1, eps > 0");
  if (p == 1.0) return 1.0;
  // D = exp(-(p-1) * log1p(-exp(-L))), L = log1p(eps)/(p-1).
  const double L = std::log1p(eps) / (p - 1.0);
  if (L > 700.0) return 1.0;  // exp(-L) underflows; the limit value
  return std::exp(-(p - 1.0) * std::log1p(-std::exp(-L)));
}

Vec sample_point(const SpaceHandle& space, Rng& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec x = rng.box(space.dim, space.sample_halfwidth);
    if (space.in_domain(x)) return x;
  }
  throw domain_error("sample_point: rejection sampling failed; domain too thin for the box");
}

AxiomReport check_axioms(const SpaceHandle& space, int n_samples, std::uint64_t seed) {
  if (n_samples < 3) throw parameter_error("check_axioms requires n_samples >= 3");
  Rng rng(seed);
  AxiomReport report;
  report.n_samples = n_samples;
  report.seed = seed;

  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) pts.push_back(sample_point(space, rng));

  for (const auto& x : pts) {
    report.max_identity_violation =
        std::max(report.max_identity_violation, std::fabs(space.distance(x, x)));
  }
  for (int i = 0; i + 1 < n_samples; ++i) {
    const Vec& x = pts[static_cast<std::size_t>(i)];
    const Vec& y = pts[static_cast<std::size_t>(i + 1)];
    if (max_abs_diff(x, y) == 0.0) continue;
    const double d = space.distance(x, y);
    if (d <= 0.0) report.max_identity_violation = std::max(report.max_identity_violation, -d + 1e-300);
  }
  for (int i = 0; i < n_samples; ++i) {
    const Vec& x = pts[static_cast<std::size_t>(rng.uniform_int(0, n_samples - 1))];
    const Vec& y = pts[static_cast<std::size_t>(rng.uniform_int(0, n_samples - 1))];
    const Vec& z = pts[static_cast<std::size_t>(rng.uniform_int(0, n_samples - 1))];
    const double v = space.distance(x, z) - space.distance(x, y) - space.distance(y, z);
    report.max_triangle_violation = std::max(report.max_triangle_violation, v);
  }

  if (space.theta) {
    const Vec& star = space.base_point;
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
      const double bound = space.theta(r);
      std::vector<const Vec*> in_ball;
      for (const auto& x : pts)
        if (space.distance(star, x) < r) in_ball.push_back(&x);
      for (std::size_t i = 0; i + 1 < in_ball.size(); ++i) {
        const Vec& x = *in_ball[i];
        const Vec& y = *in_ball[i + 1];
        const double v = space.distance(x, y) - bound * space.distance(y, x);
        report.max_reversibility_violation = std::max(report.max_reversibility_violation, v);
      }
    }
  }
  return report;
}

}  // namespace asymflow
