#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "melod/assembly.hpp"
#include "melod/fem.hpp"

namespace melod {

/// Relative energy and L2 errors of a trajectory against the reference.
/// A missing value marks an undefined ratio (zero reference energy).
struct ErrorReport {
  std::optional<double> e_u_energy;
  std::optional<double> e_theta_energy;
  std::optional<double> e_w_energy;
  std::optional<double> e_w_l2;

  // Per-time-level series, index n = 0..N.
  std::vector<std::optional<double>> series_u_energy;
  std::vector<std::optional<double>> series_theta_energy;
  std::vector<std::optional<double>> series_w_energy;
  std::vector<std::optional<double>> series_w_l2;

  std::map<std::string, std::string> metadata;
};

/// Errors per Eq.-style definitions: energy quadratic forms with A1 (u part)
/// and A4 (theta part), L2 with the unweighted mass matrix. `at` selects the
/// time level for the scalar fields; -1 means the final level.
ErrorReport energy_errors(const Trajectory& sol, const Trajectory& ref,
                          const NestedGrid& grid, const BlockSystem& bs, int at = -1);

}  // namespace melod
