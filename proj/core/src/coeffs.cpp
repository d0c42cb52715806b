#include "melod/coeffs.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <tuple>

#include "melod/csv.hpp"

namespace melod {

void CoefficientField::validate(const NestedGrid& grid) const {
  const std::size_t ne = static_cast<std::size_t>(grid.fine.triangle_count());
  for (const auto& [name, values] :
       {std::pair{"lambda", &lambda}, std::pair{"mu", &mu},
        std::pair{"kappa", &kappa}, std::pair{"alpha", &alpha}}) {
    if (values->size() != ne)
      throw Error(std::string("coefficient field '") + name + "' has " +
                  std::to_string(values->size()) + " values, grid has " +
                  std::to_string(ne) + " elements");
    for (double v : *values)
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(std::string("coefficient field '") + name +
                    "' contains a nonpositive or nonfinite value");
  }
}

namespace {

/// Uniform double in [2^-53, 1) from one 64-bit draw.
double to_unit(std::uint64_t x) {
  double u = static_cast<double>(x >> 11) * 0x1.0p-53;
  return u > 0.0 ? u : 0x1.0p-53;
}

/// Box-Muller, fully determined by the engine's integer stream.
class NormalStream {
public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = to_unit(eng_());
    const double u2 = to_unit(eng_());
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

using CholKey = std::tuple<int, double, double>;  // lattice size, sigma2, ell

/// Cholesky factors of the squared-exponential covariance are expensive at
/// 64x64; keep the few most recent around since experiment presets reuse one
/// kernel for all four coefficients.
std::shared_ptr<const Eigen::MatrixXd> covariance_factor(int c, double sigma2, double ell) {
  static std::mutex mtx;
  static std::deque<std::pair<CholKey, std::shared_ptr<const Eigen::MatrixXd>>> cache;

  const CholKey key{c, sigma2, ell};
  {
    std::lock_guard<std::mutex> lock(mtx);
    for (const auto& [k, v] : cache)
      if (k == key) return v;
  }

  const int np = c * c;
  Eigen::MatrixXd cov(np, np);
  for (int j = 0; j < np; ++j) {
    const double xj = (j % c + 0.5) / c;
    const double yj = (j / c + 0.5) / c;
    for (int i = 0; i < np; ++i) {
      const double dx = (i % c + 0.5) / c - xj;
      const double dy = (i / c + 0.5) / c - yj;
      cov(i, j) = sigma2 * std::exp(-(dx * dx + dy * dy) / (ell * ell));
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10 * sigma2;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw Error("gen_log_gaussian: covariance factorization failed even with "
                  "nugget; length scale too small for the sampling lattice");
  }

  auto factor = std::make_shared<Eigen::MatrixXd>(llt.matrixL());
  std::lock_guard<std::mutex> lock(mtx);
  if (cache.size() >= 4) cache.pop_front();
  cache.emplace_back(key, factor);
  return factor;
}

}  // namespace

std::vector<double> gen_log_gaussian(const NestedGrid& grid, const LogGaussianSpec& spec) {
  if (!(spec.sigma2 >= 0.0) || !(spec.ell > 0.0))
    throw Error("gen_log_gaussian: need sigma2 >= 0 and ell > 0");

  const int ne = grid.fine.triangle_count();
  std::vector<double> out(ne);

  if (spec.sigma2 == 0.0) {
    std::fill(out.begin(), out.end(), std::exp(spec.b0));
    return out;
  }

  const int c = std::min(grid.fine.n, 64);
  const auto L = covariance_factor(c, spec.sigma2, spec.ell);

  NormalStream normals(spec.seed);
  Eigen::VectorXd z(c * c);
  for (int i = 0; i < z.size(); ++i) z[i] = normals.next();
  Eigen::VectorXd g = (*L) * z;

  for (int t = 0; t < ne; ++t) {
    const Vec2 ctr = triangle_centroid(grid.fine, t);
    const int ci = std::min(static_cast<int>(ctr.x * c), c - 1);
    const int cj = std::min(static_cast<int>(ctr.y * c), c - 1);
    out[t] = std::exp(spec.b0 + g[cj * c + ci]);
  }
  return out;
}

std::vector<double> gen_periodic(const NestedGrid& grid, const PeriodicSpec& spec) {
  const int c = spec.cells_per_side;
  if (c < 1 || grid.fine.n % c != 0)
    throw Error("gen_periodic: cells_per_side must divide 2^fine_level");
  if (!(spec.inclusion_fraction > 0.0) || !(spec.inclusion_fraction < 1.0))
    throw Error("gen_periodic: inclusion_fraction must lie in (0,1)");
  if (spec.contrast < 1.0) throw Error("gen_periodic: contrast must be >= 1");

  const double lo = 0.5 - 0.5 * spec.inclusion_fraction;
  const double hi = 0.5 + 0.5 * spec.inclusion_fraction;
  const int ne = grid.fine.triangle_count();
  std::vector<double> out(ne);
  for (int t = 0; t < ne; ++t) {
    const Vec2 ctr = triangle_centroid(grid.fine, t);
    const double lx = ctr.x * c - std::floor(ctr.x * c);
    const double ly = ctr.y * c - std::floor(ctr.y * c);
    const bool inside = lx >= lo && lx <= hi && ly >= lo && ly <= hi;
    out[t] = inside ? spec.background * spec.contrast : spec.background;
  }
  return out;
}

std::vector<double> gen_high_contrast(const NestedGrid& grid, const HighContrastSpec& spec) {
  if (spec.contrast < 1.0) throw Error("gen_high_contrast: contrast must be >= 1");

  const int n = grid.fine.n;
  const int w = std::max(1, n / 16);
  const int nc = std::clamp(static_cast<int>(std::lround(0.18 * n / w)), 1, 3);
  const int max_drift = std::max(1, n / 8);

  std::mt19937_64 eng(spec.pattern_seed);
  std::vector<char> marked(static_cast<std::size_t>(n) * n, 0);

  // Meandering channels spanning the domain, alternating vertical and
  // horizontal so the pattern crosses coarse element boundaries both ways.
  for (int ch = 0; ch < nc; ++ch) {
    const bool vertical = (ch % 2 == 0);
    const int base = static_cast<int>((ch + 0.5) * n / nc);
    int offset = static_cast<int>(eng() % (2 * static_cast<std::uint64_t>(max_drift) + 1)) - max_drift;
    for (int s = 0; s < n; ++s) {
      const int drift = static_cast<int>(eng() % 3) - 1;
      offset = std::clamp(offset + drift, -max_drift, max_drift);
      const int start = std::clamp(base + offset, 0, n - w);
      for (int t = 0; t < w; ++t) {
        const int cx = vertical ? start + t : s;
        const int cy = vertical ? s : start + t;
        marked[static_cast<std::size_t>(cy) * n + cx] = 1;
      }
    }
  }

  const int ne = grid.fine.triangle_count();
  std::vector<double> out(ne);
  for (int t = 0; t < ne; ++t) {
    const int cell = t / 2;
    out[t] = marked[cell] ? spec.contrast : 1.0;
  }
  return out;
}

std::vector<double> gen_field(const NestedGrid& grid, const FieldSpec& spec) {
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LogGaussianSpec>) return gen_log_gaussian(grid, s);
        else if constexpr (std::is_same_v<T, PeriodicSpec>) return gen_periodic(grid, s);
        else if constexpr (std::is_same_v<T, HighContrastSpec>) return gen_high_contrast(grid, s);
        else {
          if (!(s.value > 0.0)) throw Error("constant field: value must be positive");
          return std::vector<double>(grid.fine.triangle_count(), s.value);
        }
      },
      spec);
}

std::string field_csv(const NestedGrid& grid, const CoefficientField& coeffs) {
  std::string out = "element_index,centroid_x,centroid_y,lambda,mu,kappa,alpha\n";
  for (int t = 0; t < grid.fine.triangle_count(); ++t) {
    const Vec2 c = triangle_centroid(grid.fine, t);
    out += std::to_string(t);
    out += ',';
    out += csv_num(c.x);
    out += ',';
    out += csv_num(c.y);
    out += ',';
    out += csv_num(coeffs.lambda[t]);
    out += ',';
    out += csv_num(coeffs.mu[t]);
    out += ',';
    out += csv_num(coeffs.kappa[t]);
    out += ',';
    out += csv_num(coeffs.alpha[t]);
    out += '\n';
  }
  return out;
}

}  // namespace melod
