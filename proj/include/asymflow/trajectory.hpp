#pragma once

#include <vector>

#include "asymflow/vec.hpp"

namespace asymflow {

/// Time-sampled flow curve with per-sample potential value, slope estimate and
/// metric speed. Produced either by the minimizing-movement limit or by the
/// smooth-case ODE oracle.
struct Trajectory {
  enum class Provenance { mms, ode_oracle };

  std::vector<double> times;
  std::vector<Vec> points;
  std::vector<double> phi_values;
  std::vector<double> slope_values;
  std::vector<double> speed_values;
  Provenance provenance = Provenance::mms;

  // Oracle diagnostics: set when the run left the domain (truncated) and the
  // worst per-sample chain-rule residual |(phi o xi)' + F^p(xi')|.
  bool domain_exit = false;
  double max_chain_residual = 0.0;

  std::size_t size() const { return times.size(); }
};

}  // namespace asymflow
