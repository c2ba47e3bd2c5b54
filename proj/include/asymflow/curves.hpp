#pragma once

#include <vector>

#include "asymflow/metric_core.hpp"
#include "asymflow/vec.hpp"

namespace asymflow {

/// A curve sampled on a strictly increasing time grid; the continuous objects
/// of the theory are realized as polylines with bounded segment speeds.
struct SampledCurve {
  std::vector<double> times;
  std::vector<Vec> points;
  const SpaceHandle* space = nullptr;

  SampledCurve() = default;
  SampledCurve(std::vector<double> ts, std::vector<Vec> ps, const SpaceHandle& s);
  std::size_t size() const { return times.size(); }
};

/// Forward metric derivative at node i: the central asymmetric difference
/// (d(x_{i-1},x_i)/dt_- + d(x_i,x_{i+1})/dt_+)/2, one-sided at the endpoints.
double forward_metric_derivative(const SampledCurve& curve, std::size_t i);

/// Sum of forward segment distances; non-decreasing under grid refinement.
double length(const SampledCurve& curve);

/// Reparametrizes onto [0, L] with unit forward speed per segment. The inverse
/// of the cumulative-length map uses the leftmost preimage, so zero-length
/// segments collapse. Throws degenerate_input for zero-length curves.
SampledCurve reparametrize_unit_speed(const SampledCurve& curve);

}  // namespace asymflow
