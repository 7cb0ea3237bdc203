#pragma once

#include <span>
#include <vector>

#include "lpnest/tree.hpp"

namespace lpnest {

// Polar-like coordinates: radius r = f(x), direction u_i = x_i / r for
// i < n-1, and the sign of the last coordinate. The last direction
// coordinate is implied by f(u) = 1 and not stored.
struct PolarPoint {
  double r = 0.0;
  std::vector<double> u;  // length n - 1
  double last_sign = 1.0;
};

PolarPoint to_polar(const LpTree& tree, std::span<const double> x);

std::vector<double> from_polar(const LpTree& tree, const PolarPoint& point);

// The non-negative u_n with f(u_1,...,u_{n-1}, u_n) = 1, obtained by
// peeling the root-to-last-leaf spine; throws if u lies outside the
// projected unit body.
double last_coordinate(const LpTree& tree, std::span<const double> u);

// log |det J| = (n-1) log r + sum of log G_L over the spine below the
// root. Requires a strictly interior direction.
double log_jacobian_det(const LpTree& tree, const PolarPoint& point);

}  // namespace lpnest
