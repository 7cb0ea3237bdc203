#pragma once

#include <vector>

#include "lpnest/tree.hpp"

namespace lpnest {

struct SphereMeasure {
  double log_surface;  // log S_f(1)
  double log_volume;   // log V_f(1) = log_surface - log n
};

// log S_f(R) through the Gamma-ratio product (primary form).
double log_surface_area(const LpTree& tree, double radius = 1.0);

// Same quantity through the Beta-function product; kept as a cross-check.
double log_surface_area_beta(const LpTree& tree, double radius = 1.0);

// log V_f(R) = log S_f(R) + log R - log n.
double log_volume(const LpTree& tree, double radius = 1.0);

SphereMeasure sphere_measure(const LpTree& tree);

// d/dp_J log S_f(1) for every inner node J, inner_ids order; derivative of
// the Beta-product form.
std::vector<double> grad_p_log_surface(const LpTree& tree);

}  // namespace lpnest
