#pragma once

#include <string>

#include "asymflow/config.hpp"
#include "asymflow/metric_core.hpp"
#include "asymflow/potentials.hpp"
#include "asymflow/trajectory.hpp"

namespace asymflow {

/// Exit codes shared by the CLI subcommands: 0 success, 1 runtime error,
/// 2 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitVerification = 2;

SpaceHandle build_space(const ExperimentConfig& config);
PotentialEntry build_potential(const ExperimentConfig& config, const SpaceHandle& space);

/// Writes times/coords/phi/slope/speed as CSV with fixed headers
/// t,coord_0..coord_{n-1},phi,slope,speed. Deterministic %.17g formatting.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, int dim);

/// Runs the MMS sweep (and the ODE oracle when the potential is smooth),
/// writes the trajectory CSV and a versioned JSON summary. Returns an exit
/// code.
int cmd_run(const ExperimentConfig& config, int log_level = 0);

/// Runs the property suite (axioms, tangent consistency, envelope
/// monotonicity, discrete energy identity, convexity certificate, decay and
/// regularization bounds), prints one line per check and writes the JSON
/// table.
int cmd_verify(const ExperimentConfig& config, int log_level = 0);

/// Per-step-size error-vs-oracle table (CSV: tau, sup_error, energy_residual,
/// runtime_ms). Requires a sweep of at least two entries.
int cmd_sweep(const ExperimentConfig& config, int log_level = 0);

}  // namespace asymflow
