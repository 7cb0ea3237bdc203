#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lpnest/dataset.hpp"
#include "lpnest/tree.hpp"

namespace lpnest {

using LogPrior = std::function<double(std::span<const double>)>;

// log p(x, mu) = -n log f(x - mu) + log prior(mu) - log Z under the
// improper Jeffreys scale prior; Z is the uniform-sphere normalizer
// S_f(1) / 2 (the improper constant c is dropped). Radial-free.
double location_log_joint(const LpTree& tree, std::span<const double> x,
                          std::span<const double> mu, const LogPrior& log_prior);

// Rectangular evaluation grid for the location parameter.
struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> points;  // per axis

  std::size_t total() const {
    std::size_t t = 1;
    for (const int p : points) t *= static_cast<std::size_t>(p);
    return t;
  }
};

struct PosteriorGrid {
  GridSpec spec;
  std::vector<std::vector<double>> mu;   // grid points, row-major over axes
  std::vector<double> log_posterior;     // normalized over the grid
};

// Sum over observations of -n log f(x_j - mu) plus the prior, normalized
// across the grid by log-sum-exp (each observation integrates out its own
// scale).
PosteriorGrid location_posterior_grid(const LpTree& tree, const Dataset& data,
                                      const GridSpec& grid, const LogPrior& log_prior);

}  // namespace lpnest
