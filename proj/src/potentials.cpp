#include "asymflow/potentials.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "asymflow/errors.hpp"
#include "asymflow/spaces.hpp"

namespace asymflow {

double PotentialParams::scalar(const std::string& key, double fallback) const {
  auto it = scalars.find(key);
  return it == scalars.end() ? fallback : it->second;
}

Vec PotentialParams::vector(const std::string& key, const Vec& fallback) const {
  auto it = vectors.find(key);
  return it == vectors.end() ? fallback : it->second;
}

namespace {

PotentialEntry make_quadratic(const PotentialParams& params, const SpaceHandle& space) {
  const Vec c = params.vector("center", zeros(static_cast<std::size_t>(space.dim)));
  const double scale = params.scalar("scale", 1.0);
  PotentialEntry e;
  e.phi.name = "quadratic";
  e.phi.value = [c, scale](const Vec& x) { return 0.5 * scale * norm_sq(sub(x, c)); };
  e.phi.grad = [c, scale](const Vec& x) { return scaled(sub(x, c), scale); };
  e.phi.known_inf = 0.0;
  e.phi.known_minimizer = c;
  return e;
}

PotentialEntry make_linear(const PotentialParams& params, const SpaceHandle& space) {
  const Vec c = params.vector("c", Vec(static_cast<std::size_t>(space.dim), 1.0));
  PotentialEntry e;
  e.phi.name = "linear";
  e.phi.value = [c](const Vec& x) { return dot(c, x); };
  e.phi.grad = [c](const Vec&) { return c; };
  return e;
}

PotentialEntry make_sqdist(const PotentialParams& params, const SpaceHandle& space) {
  const Vec c = params.vector("center", space.base_point);
  if (!space.in_domain(c)) throw parameter_error("sqdist center outside domain");
  auto dist = space.distance;
  auto dist_grad = space.distance_grad_y;
  PotentialEntry e;
  e.phi.name = "sqdist";
  e.phi.value = [dist, c](const Vec& x) {
    const double d = dist(c, x);
    return 0.5 * d * d;
  };
  if (dist_grad) {
    e.phi.grad = [dist, dist_grad, c](const Vec& x) {
      const double d = dist(c, x);
      if (d < 1e-14) return zeros(x.size());
      return scaled(dist_grad(c, x), d);
    };
  }
  e.phi.known_inf = 0.0;
  e.phi.known_minimizer = c;
  return e;
}

PotentialEntry make_funk_entropy(const PotentialParams& params, const SpaceHandle& space) {
  const double a = params.scalar("a", 1.0);
  const double b = params.scalar("b", 0.0);
  PotentialEntry e;
  e.phi.name = "funk_entropy";
  e.phi.value = [a, b](const Vec& x) {
    const double r = norm(x);
    if (r >= 1.0) return std::numeric_limits<double>::infinity();
    return -a * std::log1p(-r) + 0.5 * b * norm_sq(x);
  };
  e.phi.grad = [a, b](const Vec& x) {
    const double r = norm(x);
    Vec g = scaled(x, b);
    if (r > 1e-14) g = axpy(g, a / (r * (1.0 - r)), x);
    return g;
  };
  e.phi.known_inf = 0.0;
  e.phi.known_minimizer = zeros(static_cast<std::size_t>(space.dim));
  return e;
}

PotentialEntry make_l1_plus_quadratic(const PotentialParams& params, const SpaceHandle& space) {
  const Vec c = params.vector("center", zeros(static_cast<std::size_t>(space.dim)));
  const double w = params.scalar("weight", 0.25);
  const double kink_band = params.scalar("kink_band", 1e-3);
  PotentialEntry e;
  e.phi.name = "l1_plus_quadratic";
  e.phi.value = [c, w](const Vec& x) { return w * std::fabs(x[0]) + 0.5 * norm_sq(sub(x, c)); };
  e.phi.smooth = false;

  SplitPotential split;
  split.value_phi1 = [w](const Vec& x) { return w * std::fabs(x[0]); };
  split.grad_phi2 = [c](const Vec& x) { return sub(x, c); };
  split.subdiff_phi1 = [w](const Vec& x) {
    std::vector<Vec> extremes;
    Vec e1 = zeros(x.size());
    if (x[0] > 0.0) {
      e1[0] = w;
      extremes.push_back(e1);
    } else if (x[0] < 0.0) {
      e1[0] = -w;
      extremes.push_back(e1);
    } else {
      e1[0] = -w;
      extremes.push_back(e1);
      Vec e2 = zeros(x.size());
      e2[0] = w;
      extremes.push_back(e2);
    }
    return extremes;
  };
  split.near_kink = [kink_band](const Vec& x) { return std::fabs(x[0]) < kink_band; };
  split.total = e.phi;
  e.split = std::move(split);
  return e;
}

}  // namespace

PotentialEntry make_potential(const std::string& name, const PotentialParams& params,
                              const SpaceHandle& space) {
  PotentialEntry entry;
  if (name == "quadratic") {
    entry = make_quadratic(params, space);
  } else if (name == "linear") {
    entry = make_linear(params, space);
  } else if (name == "sqdist") {
    entry = make_sqdist(params, space);
  } else if (name == "funk_entropy") {
    entry = make_funk_entropy(params, space);
  } else if (name == "l1_plus_quadratic") {
    entry = make_l1_plus_quadratic(params, space);
  } else {
    throw parameter_error("unknown potential: " + name);
  }
  entry.phi.p = params.scalar("p", 2.0);
  if (entry.split) entry.split->total.p = entry.phi.p;
  return entry;
}

}  // namespace asymflow
