#include "asymflow/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "asymflow/envelope.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/optimize.hpp"

namespace asymflow {

namespace {

// Cancellation-free square root term shared by the Funk distance and norm:
// S(x, w)^2 = (1 - ||x||^2) ||w||^2 + <x, w>^2, symmetric under x1 <-> x2
// when w = x2 - x1.
double funk_sqrt_term(double one_minus_x2, double w2, double xw) {
  return std::sqrt(one_minus_x2 * w2 + xw * xw);
}

Vec funk_norm_grad(const Vec& x, const Vec& v) {
  const double x2 = dot(x, x), v2 = dot(v, v), xv = dot(x, v);
  const double one_minus = 1.0 - x2;
  const double sq = funk_sqrt_term(one_minus, v2, xv);
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    g[i] = ((one_minus * v[i] + xv * x[i]) / sq + x[i]) / one_minus;
  return g;
}

// Constant forward-speed point on the straight chord from x0 to x1:
// solves d(x0, x0 + s (x1-x0)) = t d(x0,x1) by bisection (the chord map is
// strictly increasing; 80 halvings put s at machine resolution).
Vec funk_chord_point(const Vec& x0, const Vec& x1, double t) {
  if (t <= 0.0) return x0;
  if (t >= 1.0) return x1;
  const double target = t * funk_distance(x0, x1);
  if (target == 0.0) return x0;
  const Vec w = sub(x1, x0);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (funk_distance(x0, axpy(x0, mid, w)) < target)
      lo = mid;
    else
      hi = mid;
  }
  return axpy(x0, 0.5 * (lo + hi), w);
}

}  // namespace

double funk_distance(const Vec& x1, const Vec& x2) {
  const Vec w = sub(x2, x1);
  const double w2 = dot(w, w);
  if (w2 == 0.0) return 0.0;
  const double c1 = dot(x1, w), c2 = dot(x2, w);
  const double m1 = 1.0 - dot(x1, x1), m2 = 1.0 - dot(x2, x2);
  const double s = funk_sqrt_term(m1, w2, c1);
  const double A = (c1 > 0.0) ? m1 * w2 / (s + c1) : s - c1;
  const double B = (c2 > 0.0) ? m2 * w2 / (s + c2) : s - c2;
  return std::log(A / B);
}

double funk_norm(const Vec& x, const Vec& v) {
  const double v2 = dot(v, v);
  if (v2 == 0.0) return 0.0;
  const double x2 = dot(x, x), xv = dot(x, v);
  const double one_minus = 1.0 - x2;
  const double sq = funk_sqrt_term(one_minus, v2, xv);
  const double num = (xv < 0.0) ? one_minus * v2 / (sq - xv) : sq + xv;
  return num / one_minus;
}

double funk_reversibility_profile(double r) {
  if (r <= 0.0) throw parameter_error("funk_reversibility_profile requires r > 0");
  return 2.0 * std::exp(r) - 1.0;
}

SpaceHandle make_euclidean(int dim) {
  SpaceHandle s;
  s.dim = dim;
  s.name = "euclidean";
  s.base_point = zeros(static_cast<std::size_t>(dim));
  s.distance = [](const Vec& x, const Vec& y) { return norm(sub(y, x)); };
  s.in_domain = [](const Vec&) { return true; };
  s.theta = [](double) { return 1.0; };
  auto t = std::make_shared<SmoothTangentStructure>();
  t->norm = [](const Vec&, const Vec& v) { return norm(v); };
  t->dual_norm = [](const Vec&, const Vec& z) { return norm(z); };
  t->legendre = [](const Vec&, const Vec& v) { return v; };
  t->legendre_inv = [](const Vec&, const Vec& z) { return z; };
  s.tangent = t;
  s.geodesic = [](const Vec& x0, const Vec& x1, double u) { return axpy(x0, u, sub(x1, x0)); };
  s.distance_grad_y = [](const Vec& x, const Vec& y) {
    Vec w = sub(y, x);
    const double n = norm(w);
    return n == 0.0 ? w : scaled(w, 1.0 / n);
  };
  return s;
}

SpaceHandle make_randers(int dim, const Vec& drift) {
  if (static_cast<int>(drift.size()) != dim) throw parameter_error("drift dimension mismatch");
  const double a2 = dot(drift, drift);
  if (a2 >= 1.0) throw parameter_error("Randers drift must have norm < 1");
  const double anorm = std::sqrt(a2);

  SpaceHandle s;
  s.dim = dim;
  s.name = "randers";
  s.base_point = zeros(static_cast<std::size_t>(dim));
  Vec a = drift;
  s.distance = [a](const Vec& x, const Vec& y) {
    Vec w = sub(y, x);
    return norm(w) + dot(a, w);
  };
  s.in_domain = [](const Vec&) { return true; };
  const double theta_const = (1.0 + anorm) / (1.0 - anorm);
  s.theta = [theta_const](double) { return theta_const; };

  auto t = std::make_shared<SmoothTangentStructure>();
  t->norm = [a](const Vec&, const Vec& v) { return norm(v) + dot(a, v); };
  // Dual of a Randers norm: the support function of its (ellipsoidal) unit
  // ball, F*(z) = (sqrt((1-|a|^2)|z|^2 + <a,z>^2) - <a,z>) / (1-|a|^2).
  t->dual_norm = [a, a2](const Vec&, const Vec& z) {
    const double az = dot(a, z);
    return (std::sqrt((1.0 - a2) * dot(z, z) + az * az) - az) / (1.0 - a2);
  };
  t->legendre = [a](const Vec&, const Vec& v) {
    const double n = norm(v);
    if (n == 0.0) return zeros(v.size());
    const double F = n + dot(a, v);
    Vec z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = F * (v[i] / n + a[i]);
    return z;
  };
  t->legendre_inv = [a, a2](const Vec&, const Vec& z) {
    const double zn2 = dot(z, z);
    if (zn2 == 0.0) return zeros(z.size());
    const double az = dot(a, z);
    const double sq = std::sqrt((1.0 - a2) * zn2 + az * az);
    const double Fd = (sq - az) / (1.0 - a2);
    Vec v(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      v[i] = Fd * (((1.0 - a2) * z[i] + az * a[i]) / sq - a[i]) / (1.0 - a2);
    return v;
  };
  s.tangent = t;
  s.geodesic = [](const Vec& x0, const Vec& x1, double u) { return axpy(x0, u, sub(x1, x0)); };
  s.distance_grad_y = [a](const Vec& x, const Vec& y) {
    Vec w = sub(y, x);
    const double n = norm(w);
    if (n == 0.0) return w;
    Vec g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = w[i] / n + a[i];
    return g;
  };
  return s;
}

SpaceHandle make_minkowski(int dim, const std::string& name,
                           std::function<double(const Vec&)> norm_fn,
                           std::function<Vec(const Vec&)> norm_grad, bool smooth) {
  SpaceHandle s;
  s.dim = dim;
  s.name = name;
  s.base_point = zeros(static_cast<std::size_t>(dim));
  s.distance = [norm_fn](const Vec& x, const Vec& y) { return norm_fn(sub(y, x)); };
  s.in_domain = [](const Vec&) { return true; };
  s.theta = [norm_fn, dim](double) {
    // Reversibility of a norm: max over coordinate octant directions of
    // F(-v)/F(v) is only a sample; the true constant is refined by callers
    // that need tightness. A conservative sampled bound suffices here.
    double worst = 1.0;
    Vec v(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i) {
      v[static_cast<std::size_t>(i)] = 1.0;
      worst = std::max(worst, norm_fn(negated(v)) / norm_fn(v));
      worst = std::max(worst, norm_fn(v) / norm_fn(negated(v)));
      v[static_cast<std::size_t>(i)] = 0.0;
    }
    return 2.0 * worst;
  };
  s.geodesic = [](const Vec& x0, const Vec& x1, double u) { return axpy(x0, u, sub(x1, x0)); };

  if (smooth && norm_grad) {
    auto t = std::make_shared<SmoothTangentStructure>();
    t->norm = [norm_fn](const Vec&, const Vec& v) { return norm_fn(v); };
    t->legendre = [norm_fn, norm_grad](const Vec&, const Vec& v) {
      if (norm_sq(v) == 0.0) return zeros(v.size());
      return scaled(norm_grad(v), norm_fn(v));
    };
    // Both the inverse Legendre map and the dual norm run through the numeric
    // inversion of v -> F(v)^2/2 - <zeta, v>.
    auto norm_xfree = t->norm;
    auto leg_xfree = t->legendre;
    t->legendre_inv = [norm_xfree, leg_xfree](const Vec& x, const Vec& z) {
      if (norm_sq(z) == 0.0) return zeros(z.size());
      return legendre_invert_numeric(norm_xfree, leg_xfree, x, z);
    };
    t->dual_norm = [norm_xfree, leg_xfree](const Vec& x, const Vec& z) {
      if (norm_sq(z) == 0.0) return 0.0;
      return norm_xfree(x, legendre_invert_numeric(norm_xfree, leg_xfree, x, z));
    };
    s.tangent = t;
    s.distance_grad_y = [norm_grad](const Vec& x, const Vec& y) {
      Vec w = sub(y, x);
      if (norm_sq(w) == 0.0) return w;
      return norm_grad(w);
    };
  }
  return s;
}

SpaceHandle make_funk_ball(int dim) {
  if (dim < 2) throw parameter_error("Funk ball requires dim >= 2");
  SpaceHandle s;
  s.dim = dim;
  s.name = "funk";
  s.base_point = zeros(static_cast<std::size_t>(dim));
  s.distance = [](const Vec& x, const Vec& y) { return funk_distance(x, y); };
  s.in_domain = [](const Vec& x) { return norm_sq(x) < 1.0; };
  s.theta = [](double r) { return funk_reversibility_profile(r); };
  s.sample_halfwidth = 1.0;

  auto t = std::make_shared<SmoothTangentStructure>();
  t->norm = [](const Vec& x, const Vec& v) { return funk_norm(x, v); };
  // Dual of the Funk tangent norm: F(x,.) is the dual of the Randers norm
  // with drift -x, so biduality gives F*(x, z) = ||z|| - <x, z>.
  t->dual_norm = [](const Vec& x, const Vec& z) { return norm(z) - dot(x, z); };
  t->legendre = [](const Vec& x, const Vec& v) {
    if (norm_sq(v) == 0.0) return zeros(v.size());
    return scaled(funk_norm_grad(x, v), funk_norm(x, v));
  };
  t->legendre_inv = [](const Vec& x, const Vec& z) {
    const double zn = norm(z);
    if (zn == 0.0) return zeros(z.size());
    const double Fd = zn - dot(x, z);
    Vec v(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) v[i] = Fd * (z[i] / zn - x[i]);
    return v;
  };
  s.tangent = t;
  s.geodesic = [](const Vec& x0, const Vec& x1, double u) { return funk_chord_point(x0, x1, u); };
  // Straight chords are the geodesics, so the derivative of d(x,.) at y is the
  // Legendre image of the arriving unit velocity along the chord.
  s.distance_grad_y = [t](const Vec& x, const Vec& y) {
    Vec w = sub(y, x);
    const double F = funk_norm(y, w);
    if (F == 0.0) return zeros(w.size());
    return t->legendre(y, scaled(w, 1.0 / F));
  };
  return s;
}

namespace {

void require_tangent(const SpaceHandle& space, const char* op) {
  if (!space.has_tangent())
    throw unsupported_operation(std::string(op) + ": space has no smooth tangent structure");
}

}  // namespace

Vec gradient(const SpaceHandle& space, const Potential& phi, const Vec& x) {
  require_tangent(space, "gradient");
  if (!phi.smooth) throw unsupported_operation("gradient: potential is not smooth");
  Vec d = differential(phi, x);
  if (norm_sq(d) == 0.0) return zeros(d.size());
  return space.tangent->legendre_inv(x, d);
}

Vec descending_gradient(const SpaceHandle& space, const Potential& phi, const Vec& x) {
  require_tangent(space, "descending_gradient");
  if (!phi.smooth) throw unsupported_operation("descending_gradient: potential is not smooth");
  Vec d = negated(differential(phi, x));
  if (norm_sq(d) == 0.0) return zeros(d.size());
  return space.tangent->legendre_inv(x, d);
}

Vec duality_map_jp(const SpaceHandle& space, const Vec& x, const Vec& v, double p) {
  require_tangent(space, "duality_map_jp");
  if (norm_sq(v) == 0.0) return zeros(v.size());
  return scaled(v, std::pow(space.tangent->norm(x, v), p - 2.0));
}

Vec duality_set_Jp(const SpaceHandle& space, const Vec& x, const Vec& v, double p) {
  require_tangent(space, "duality_set_Jp");
  if (norm_sq(v) == 0.0) return zeros(v.size());
  return space.tangent->legendre(x, duality_map_jp(space, x, v, p));
}

Vec legendre_invert_numeric(const std::function<double(const Vec&, const Vec&)>& norm_fn,
                            const std::function<Vec(const Vec&, const Vec&)>& legendre_fn,
                            const Vec& x, const Vec& zeta, const LegendreInvertOptions& options) {
  auto objective = [&](const Vec& v) { return 0.5 * std::pow(norm_fn(x, v), 2) - dot(zeta, v); };
  auto grad = [&](const Vec& v) -> Vec {
    if (norm_sq(v) == 0.0) return negated(zeta);
    return sub(legendre_fn(x, v), zeta);
  };
  MinimizeOptions mo;
  mo.grad_tol = options.grad_tol;
  mo.max_iter = options.max_iter;

  // Euclidean proxy start plus scaled variants.
  const double zn = norm(zeta);
  MinimizeResult best;
  for (int k = 0; k < options.n_starts; ++k) {
    Vec v0 = zeta;
    switch (k) {
      case 0: break;
      case 1: v0 = scaled(zeta, 0.5); break;
      case 2: v0 = scaled(zeta, 2.0); break;
      default: v0 = scaled(zeta, zn > 0 ? 1.0 / zn : 1.0); break;
    }
    MinimizeResult r = minimize_bfgs(objective, grad, v0, nullptr, mo);
    if (r.f < best.f) best = r;
  }
  return best.x;
}

}  // namespace asymflow
