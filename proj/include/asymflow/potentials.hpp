#pragma once

#include <map>
#include <optional>
#include <string>

#include "asymflow/analysis.hpp"
#include "asymflow/envelope.hpp"
#include "asymflow/metric_core.hpp"

namespace asymflow {

struct PotentialParams {
  std::map<std::string, double> scalars;
  std::map<std::string, Vec> vectors;

  double scalar(const std::string& key, double fallback) const;
  Vec vector(const std::string& key, const Vec& fallback) const;
};

struct PotentialEntry {
  Potential phi;
  std::optional<SplitPotential> split;  // set for the l1-plus-smooth family
};

/// Built-in potential registry:
///   quadratic          scale * ||x - center||^2 / 2
///   linear             <c, x>
///   sqdist             d(center, .)^2 / 2 (forward distance of the space)
///   funk_entropy       a * (-log(1 - ||x||)) + b * ||x||^2 / 2
///   l1_plus_quadratic  w |x_1| + ||x - center||^2 / 2 (convex split)
PotentialEntry make_potential(const std::string& name, const PotentialParams& params,
                              const SpaceHandle& space);

}  // namespace asymflow
