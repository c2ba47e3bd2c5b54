#pragma once

#include <functional>

#include "asymflow/metric_core.hpp"
#include "asymflow/vec.hpp"

namespace asymflow {

struct Potential;  // envelope.hpp

/// Smooth structure on the tangent spaces: the (asymmetric, positively
/// 1-homogeneous) norm F, its dual norm F*, and the Legendre maps between
/// vectors and covectors. Legendre consistency: with z = legendre(x, v),
///   dual_norm(x, z) = norm(x, v)   and   <z, v> = norm(x, v)^2.
struct SmoothTangentStructure {
  std::function<double(const Vec&, const Vec&)> norm;       // F(x, v)
  std::function<double(const Vec&, const Vec&)> dual_norm;  // F*(x, zeta)
  std::function<Vec(const Vec&, const Vec&)> legendre;      // vector -> covector
  std::function<Vec(const Vec&, const Vec&)> legendre_inv;  // covector -> vector
};

SpaceHandle make_euclidean(int dim);

/// d(x,y) = ||y-x|| + <drift, y-x>, a theta-metric space with
/// theta = (1+||drift||)/(1-||drift||). Requires ||drift|| < 1.
SpaceHandle make_randers(int dim, const Vec& drift);

/// Translation-invariant space of a user norm, d(x,y) = F(y-x). When `smooth`
/// is false (or no gradient is supplied) the tangent structure is absent and
/// gradient/duality operations refuse to run on this space. The Legendre
/// inverse and the dual norm are computed by the numeric inversion below.
SpaceHandle make_minkowski(int dim, const std::string& name,
                           std::function<double(const Vec&)> norm_fn,
                           std::function<Vec(const Vec&)> norm_grad, bool smooth);

/// Unit ball with the Funk metric. Forward-pointed at the origin with
/// theta(r) = 2 e^r - 1.
SpaceHandle make_funk_ball(int dim);

/// Reversibility bound 2 e^r - 1 of the Funk ball on forward balls B+_0(r).
double funk_reversibility_profile(double r);

/// Funk distance and tangent norm in cancellation-free form; exposed for the
/// closed-form potentials and oracles.
double funk_distance(const Vec& x1, const Vec& x2);
double funk_norm(const Vec& x, const Vec& v);

/// Gradient grad(phi)(x) = legendre_inv(d phi(x)). Uses the potential's
/// analytic differential when present, central finite differences otherwise.
/// Satisfies norm(x, result) = dual_norm(x, d phi(x)).
Vec gradient(const SpaceHandle& space, const Potential& phi, const Vec& x);

/// grad(-phi)(x) = legendre_inv(-d phi(x)). In irreversible spaces this is not
/// -gradient(phi) in general; its norm equals the local slope of phi at x for
/// smooth phi.
Vec descending_gradient(const SpaceHandle& space, const Potential& phi, const Vec& x);

/// j_p(v) = F(x,v)^{p-2} v, with j_p(0) = 0.
Vec duality_map_jp(const SpaceHandle& space, const Vec& x, const Vec& v, double p);

/// The unique covector zeta with <zeta,v> = F(x,v)^p = F*(x,zeta)^q
/// = F(x,v) F*(x,zeta); computed as legendre(j_p(v)). Zero maps to zero.
Vec duality_set_Jp(const SpaceHandle& space, const Vec& x, const Vec& v, double p);

struct LegendreInvertOptions {
  double grad_tol = 1e-12;
  int max_iter = 300;
  int n_starts = 4;
};

/// Numeric Legendre inversion: minimizes v -> F(x,v)^2/2 - <zeta,v> (strictly
/// convex for Minkowski norms) with a multi-start BFGS, Euclidean-proxy start.
Vec legendre_invert_numeric(const std::function<double(const Vec&, const Vec&)>& norm_fn,
                            const std::function<Vec(const Vec&, const Vec&)>& legendre_fn,
                            const Vec& x, const Vec& zeta,
                            const LegendreInvertOptions& options = {});

}  // namespace asymflow
