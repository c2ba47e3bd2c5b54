#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asymflow/envelope.hpp"
#include "asymflow/vec.hpp"

namespace asymflow {

/// Experiment description parsed from the sectioned key-value config format
/// (see README for the grammar). All numeric fields are validated finite.
struct ExperimentConfig {
  // [space]
  std::string space_kind = "euclidean";  // euclidean|randers|minkowski|funk|broken
  int dim = 2;
  Vec drift;                      // randers
  std::string norm_name = "ellipse";  // minkowski: randers|ellipse|quartic
  Vec norm_param;

  // [potential]
  std::string potential_name = "quadratic";
  std::map<std::string, double> potential_scalars;
  std::map<std::string, Vec> potential_vectors;

  // [flow]
  double p = 2.0;
  std::optional<double> lambda;  // certificate request
  Vec x0;
  double horizon = 1.0;
  std::vector<double> tau_sweep = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

  // [solver]
  SolverConfig solver;

  // [verify]
  std::vector<std::string> checks;  // empty = full suite

  // [output]
  std::string out_dir = ".";
  std::string prefix = "experiment";

  // top level
  std::uint64_t seed = 42;
  int jobs = 1;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace asymflow
