#pragma once

#include <functional>
#include <limits>

#include "asymflow/vec.hpp"

namespace asymflow {

using Objective = std::function<double(const Vec&)>;
using GradientFn = std::function<Vec(const Vec&)>;
using DomainFn = std::function<bool(const Vec&)>;

struct MinimizeOptions {
  int max_iter = 200;
  double grad_tol = 1e-10;
  double step_tol = 1e-12;
  double obj_tol = 1e-14;
  // Objective values below this floor are treated as evidence that the
  // objective is unbounded below.
  double unbounded_floor = -1e12;
  double max_radius = 1e8;  // iterates farther than this from x0 signal divergence
};

struct MinimizeResult {
  Vec x;
  double f = std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool unbounded = false;
};

/// Central finite-difference gradient; falls back to one-sided steps at the
/// domain boundary. Out-of-domain evaluation of `f` must return +inf.
Vec fd_gradient(const Objective& f, const Vec& x, const DomainFn& in_domain,
                double h = 1e-6);

/// Dense-matrix BFGS with backtracking Armijo line search. Points outside the
/// domain are treated as +inf, so the search never leaves it. Dimension is
/// expected to be small (the library runs at dim 2..4).
MinimizeResult minimize_bfgs(const Objective& f, const GradientFn& grad, const Vec& x0,
                             const DomainFn& in_domain, const MinimizeOptions& options);

}  // namespace asymflow
