#include "asymflow/curves.hpp"

#include <cmath>

#include "asymflow/errors.hpp"

namespace asymflow {

SampledCurve::SampledCurve(std::vector<double> ts, std::vector<Vec> ps, const SpaceHandle& s)
    : times(std::move(ts)), points(std::move(ps)), space(&s) {
  if (times.size() != points.size() || times.empty())
    throw parameter_error("SampledCurve: times/points size mismatch");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw parameter_error("SampledCurve: times must increase");
  for (const auto& p : points)
    if (!s.in_domain(p)) throw domain_error("SampledCurve: point outside domain");
}

double forward_metric_derivative(const SampledCurve& c, std::size_t i) {
  const auto& d = c.space->distance;
  const std::size_t n = c.size();
  auto seg = [&](std::size_t a, std::size_t b) {
    return d(c.points[a], c.points[b]) / (c.times[b] - c.times[a]);
  };
  if (n == 1) return 0.0;
  if (i == 0) return seg(0, 1);
  if (i + 1 == n) return seg(n - 2, n - 1);
  return 0.5 * (seg(i - 1, i) + seg(i, i + 1));
}

double length(const SampledCurve& c) {
  double L = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i)
    L += c.space->distance(c.points[i - 1], c.points[i]);
  return L;
}

SampledCurve reparametrize_unit_speed(const SampledCurve& c) {
  const std::size_t n = c.size();
  std::vector<double> cum(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cum[i] = cum[i - 1] + c.space->distance(c.points[i - 1], c.points[i]);
  if (cum.back() <= 0.0) throw degenerate_input("reparametrize_unit_speed: zero-length curve");

  // Leftmost preimage: a run of equal cumulative lengths keeps only its first
  // node, dropping zero-length segments.
  std::vector<double> ts;
  std::vector<Vec> ps;
  ts.reserve(n);
  ps.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!ts.empty() && !(cum[i] > ts.back())) continue;
    ts.push_back(cum[i]);
    ps.push_back(c.points[i]);
  }
  return SampledCurve(std::move(ts), std::move(ps), *c.space);
}

}  // namespace asymflow
