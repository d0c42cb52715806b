#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "melod/grid.hpp"

namespace melod {

/// Per-fine-element material data: Lame lambda/mu, conductivity kappa and
/// thermal coupling alpha. All values must be strictly positive and finite.
struct CoefficientField {
  std::vector<double> lambda;
  std::vector<double> mu;
  std::vector<double> kappa;
  std::vector<double> alpha;

  /// Generator names/parameters/seeds, for output metadata.
  std::map<std::string, std::string> provenance;

  void validate(const NestedGrid& grid) const;
};

struct LogGaussianSpec {
  double sigma2 = 1.0;  // overall variance of the log field
  double ell = 0.1;     // length scale in cov = sigma2 * exp(-|x1-x2|^2/ell^2)
  double b0 = 0.0;      // constant mean of the log field
  std::uint64_t seed = 0;
};

struct PeriodicSpec {
  int cells_per_side = 8;          // must divide 2^fine_level
  double inclusion_fraction = 0.5; // inclusion side / cell side, in (0,1)
  double background = 1.0;
  double contrast = 1.0;           // inclusion value = background * contrast
};

struct HighContrastSpec {
  std::uint64_t pattern_seed = 0;
  double contrast = 1.0;  // values in {1, contrast}
};

struct ConstantSpec {
  double value = 1.0;
};

using FieldSpec = std::variant<LogGaussianSpec, PeriodicSpec, HighContrastSpec, ConstantSpec>;

/// One draw of exp(G), G Gaussian with mean b0 and squared-exponential
/// covariance, evaluated at fine-element centroids. The field is sampled on
/// a lattice of at most 64x64 cells and prolongated piecewise-constantly.
std::vector<double> gen_log_gaussian(const NestedGrid& grid, const LogGaussianSpec& spec);

/// Periodic microstructure: a centered square inclusion per periodic cell.
std::vector<double> gen_periodic(const NestedGrid& grid, const PeriodicSpec& spec);

/// Seeded connected channel pattern covering 10-30% of the elements with
/// value `contrast`, value 1 elsewhere. The geometry depends only on
/// pattern_seed and the grid.
std::vector<double> gen_high_contrast(const NestedGrid& grid, const HighContrastSpec& spec);

std::vector<double> gen_field(const NestedGrid& grid, const FieldSpec& spec);

/// CSV dump: element_index, centroid_x, centroid_y, lambda, mu, kappa, alpha.
std::string field_csv(const NestedGrid& grid, const CoefficientField& coeffs);

}  // namespace melod
