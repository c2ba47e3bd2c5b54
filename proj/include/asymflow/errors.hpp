#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "asymflow/vec.hpp"

namespace asymflow {

struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

struct parameter_error : std::invalid_argument {
  explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

struct unsupported_operation : std::logic_error {
  explicit unsupported_operation(const std::string& what) : std::logic_error(what) {}
};

struct degenerate_input : std::invalid_argument {
  explicit degenerate_input(const std::string& what) : std::invalid_argument(what) {}
};

// Inner solver gave up; carries the best iterate found so far.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& what, Vec best, double best_value)
      : std::runtime_error(what), best_iterate(std::move(best)), best_objective(best_value) {}
  Vec best_iterate;
  double best_objective;
};

// Inner objective detected as unbounded below (step size past the coercivity range).
struct coercivity_error : std::runtime_error {
  explicit coercivity_error(const std::string& what) : std::runtime_error(what) {}
};

struct usage_error : std::invalid_argument {
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace asymflow
