#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "asymflow/vec.hpp"

namespace asymflow {

struct SmoothTangentStructure;  // defined in spaces.hpp

/// An asymmetric metric space given through oracles: a distance d(x,y) that
/// satisfies positivity and the triangle inequality but not symmetry, a domain
/// predicate on coordinate points, a base point (the marked point of the
/// pointed space), and a reversibility profile theta(r) bounding d(x,y)/d(y,x)
/// on the forward ball of radius r around the base point.
///
/// Spaces with a smooth structure additionally carry the tangent norm F, its
/// dual, and the Legendre maps (see SmoothTangentStructure), a constant
/// forward-speed connecting curve, and a closed-form gradient of y -> d(x,y).
/// All handles are immutable after construction and safe to share across
/// threads.
struct SpaceHandle {
  int dim = 0;
  std::string name;
  Vec base_point;

  std::function<double(const Vec&, const Vec&)> distance;
  std::function<bool(const Vec&)> in_domain;
  std::function<double(double)> theta;  // r > 0 -> bound >= 1

  std::shared_ptr<const SmoothTangentStructure> tangent;  // null when not smooth

  // geodesic(x0, x1, t) for t in [0,1], parametrized so that
  // d(x0, geodesic(t)) = t * d(x0, x1). Null when the space ships no curves.
  std::function<Vec(const Vec&, const Vec&, double)> geodesic;

  // Gradient of y -> d(x, y) at y != x. Null: callers fall back to finite
  // differences.
  std::function<Vec(const Vec&, const Vec&)> distance_grad_y;

  // Half-width of the coordinate box used for rejection sampling in the
  // axiom/property harnesses.
  double sample_halfwidth = 1.0;

  bool has_tangent() const { return tangent != nullptr; }
};

/// Coordinate point of a space; construction checks the domain predicate.
struct Point {
  Point(const SpaceHandle& space, Vec coordinates);
  Vec coords;
};

/// (d(x,y) + d(y,x)) / 2. Always a symmetric metric.
double symmetrized_distance(const SpaceHandle& space, const Vec& x, const Vec& y);

/// Handle for the reverse metric d'(x,y) := d(y,x). Involutive on the nose:
/// distances of reverse(reverse(S)) are bitwise those of S.
SpaceHandle reverse_metric(const SpaceHandle& space);

/// Constant of the inequality (1+eps) a^p + D(p,eps) b^p >= (a+b)^p:
/// D(1,eps) = 1 and D(p,eps) = (1+eps) / ((1+eps)^{1/(p-1)} - 1)^{p-1}.
/// Evaluated in log space so that p near 1 and large eps do not overflow.
double appendix_constant(double p, double eps);

struct AxiomReport {
  int n_samples = 0;
  std::uint64_t seed = 0;
  double max_identity_violation = 0.0;     // |d(x,x)| and [-d(x,y)]_+ for x != y
  double max_triangle_violation = 0.0;     // [d(x,z) - d(x,y) - d(y,z)]_+
  double max_reversibility_violation = 0.0;  // [d(x,y) - theta(r) d(y,x)]_+ on forward balls
  bool pass(double tol = 1e-12) const {
    return max_identity_violation <= tol && max_triangle_violation <= tol &&
           max_reversibility_violation <= tol;
  }
};

/// Samples points (rejection sampling against in_domain), checks identity of
/// indiscernibles, triangle inequality on triples, and the reversibility bound
/// theta on forward balls. Violations are reported, never thrown.
AxiomReport check_axioms(const SpaceHandle& space, int n_samples, std::uint64_t seed);

/// Draw an in-domain point by rejection sampling from the coordinate box.
Vec sample_point(const SpaceHandle& space, class Rng& rng);

}  // namespace asymflow
