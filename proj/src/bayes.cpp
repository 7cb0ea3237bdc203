#include "lpnest/bayes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpnest/geometry.hpp"

namespace lpnest {

double location_log_joint(const LpTree& tree, std::span<const double> x,
                          std::span<const double> mu, const LogPrior& log_prior) {
  if (x.size() != mu.size() || static_cast<int>(x.size()) != tree.dimension()) {
    throw std::invalid_argument("location_log_joint: dimension mismatch");
  }
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - mu[i];
  const double f = evaluate(tree, diff);
  if (!(f > 0.0)) throw std::domain_error("location_log_joint: x equals mu");
  const double n = static_cast<double>(tree.dimension());
  const double log_z = log_surface_area(tree) - std::log(2.0);
  return -n * std::log(f) + log_prior(mu) - log_z;
}

PosteriorGrid location_posterior_grid(const LpTree& tree, const Dataset& data,
                                      const GridSpec& grid, const LogPrior& log_prior) {
  const std::size_t dim = static_cast<std::size_t>(tree.dimension());
  if (grid.lo.size() != dim || grid.hi.size() != dim || grid.points.size() != dim) {
    throw std::invalid_argument("location_posterior_grid: grid spec dimension mismatch");
  }
  if (data.cols != dim) throw std::invalid_argument("location_posterior_grid: data dimension");
  for (const int p : grid.points) {
    if (p < 1) throw std::invalid_argument("location_posterior_grid: grid points must be >= 1");
  }

  PosteriorGrid out;
  out.spec = grid;
  const std::size_t total = grid.total();
  out.mu.reserve(total);
  out.log_posterior.reserve(total);

  const double n = static_cast<double>(dim);
  std::vector<double> mu(dim), diff(dim);
  std::vector<std::size_t> index(dim, 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    for (std::size_t a = 0; a < dim; ++a) {
      const int pts = grid.points[a];
      mu[a] = pts == 1 ? grid.lo[a]
                       : grid.lo[a] + (grid.hi[a] - grid.lo[a]) *
                                          (static_cast<double>(index[a]) / (pts - 1.0));
    }
    double lp = log_prior(mu);
    for (std::size_t j = 0; j < data.rows; ++j) {
      const auto row = data.row(j);
      for (std::size_t a = 0; a < dim; ++a) diff[a] = row[a] - mu[a];
      const double f = evaluate(tree, diff);
      if (!(f > 0.0)) {
        throw std::domain_error("location_posterior_grid: grid point equals a data point");
      }
      lp -= n * std::log(f);
    }
    out.mu.push_back(mu);
    out.log_posterior.push_back(lp);
    for (std::size_t a = dim; a-- > 0;) {
      if (++index[a] < static_cast<std::size_t>(grid.points[a])) break;
      index[a] = 0;
    }
  }

  // Normalize over the grid.
  double peak = -std::numeric_limits<double>::infinity();
  for (const double lp : out.log_posterior) peak = std::max(peak, lp);
  double sum = 0.0;
  for (const double lp : out.log_posterior) sum += std::exp(lp - peak);
  const double lse = peak + std::log(sum);
  for (double& lp : out.log_posterior) lp -= lse;
  return out;
}

}  // namespace lpnest
