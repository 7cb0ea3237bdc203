#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lpnest/radial.hpp"
#include "lpnest/tree.hpp"

namespace lpnest {

// target.quantile(source.cdf(r)); the CDF value is clamped to
// [1e-15, 1 - 1e-15] before inversion so the map stays finite.
double radial_remap(double r, const RadialModel& source, const RadialModel& target);

// The gamma_p law that makes a node's children independent with unit
// variance: shape n_node / p, scale (Gamma(1/p) / Gamma(3/p))^(p/2).
GammaPRadial nrf_target_radial(int n_node, double p);

// Nested Radial Factorization of one demixed point y = Wx: remap the
// radius at each inner node top-down, recursing into non-leaf children
// whose source law is the parent-exponent gamma_p. The result has
// independent exponential-power coordinates.
std::vector<double> nrf_transform(std::span<const double> y, const LpTree& tree,
                                  const RadialModel& source);

// log |det| of the transform (W excluded): per inner node,
// (n_I - 1) (log g - log r) + log varrho_src(r) - log varrho_tgt(g)
// evaluated at the node's radius r of the partially transformed input.
double nrf_log_jacobian(std::span<const double> y, const LpTree& tree, const RadialModel& source);

std::pair<std::vector<double>, double> nrf_transform_with_jacobian(std::span<const double> y,
                                                                   const LpTree& tree,
                                                                   const RadialModel& source);

// Exponential-power marginal exp(-|z|^p / s) of the transformed
// coordinates: density, CDF, and d/dz log density.
double pgn_log_pdf(double z, double p, double s);
double pgn_cdf(double z, double p, double s);

// The p and s of the output marginal for each coordinate (those of the
// leaf's parent node).
std::vector<std::pair<double, double>> nrf_marginal_params(const LpTree& tree);

}  // namespace lpnest
