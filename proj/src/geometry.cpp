#include "lpnest/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "lpnest/special.hpp"

namespace lpnest {

namespace {

void check_radius(double radius) {
  if (!(radius > 0.0)) throw std::domain_error("sphere measure: radius must be > 0");
}

// Leaf counts of the children of `id`.
std::vector<double> child_leaf_counts(const LpTree& tree, int id) {
  std::vector<double> n;
  for (int c = tree.node(id).first_child; c >= 0; c = tree.node(c).next_sibling) {
    n.push_back(static_cast<double>(tree.node(c).leaf_count));
  }
  return n;
}

}  // namespace

double log_surface_area(const LpTree& tree, double radius) {
  check_radius(radius);
  const double n = static_cast<double>(tree.dimension());
  double sum = (n - 1.0) * std::log(radius) + n * std::log(2.0);
  for (const int id : tree.inner_ids()) {
    const LpTree::Node& node = tree.node(id);
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      sum += log_gamma(tree.node(c).leaf_count / node.p);
    }
    sum -= (node.child_count - 1) * std::log(node.p);
    sum -= log_gamma(node.leaf_count / node.p);
  }
  return sum;
}

double log_surface_area_beta(const LpTree& tree, double radius) {
  check_radius(radius);
  const double n = static_cast<double>(tree.dimension());
  double sum = (n - 1.0) * std::log(radius) + n * std::log(2.0);
  for (const int id : tree.inner_ids()) {
    const LpTree::Node& node = tree.node(id);
    const std::vector<double> counts = child_leaf_counts(tree, id);
    sum -= (node.child_count - 1) * std::log(node.p);
    double cum = counts[0];
    for (std::size_t k = 1; k < counts.size(); ++k) {
      sum += log_beta(cum / node.p, counts[k] / node.p);
      cum += counts[k];
    }
  }
  return sum;
}

double log_volume(const LpTree& tree, double radius) {
  check_radius(radius);
  return log_surface_area(tree, radius) + std::log(radius) -
         std::log(static_cast<double>(tree.dimension()));
}

SphereMeasure sphere_measure(const LpTree& tree) {
  const double ls = log_surface_area(tree);
  return {ls, ls - std::log(static_cast<double>(tree.dimension()))};
}

std::vector<double> grad_p_log_surface(const LpTree& tree) {
  std::vector<double> grad(static_cast<std::size_t>(tree.inner_count()), 0.0);
  for (int j = 0; j < tree.inner_count(); ++j) {
    const int id = tree.inner_ids()[static_cast<std::size_t>(j)];
    const LpTree::Node& node = tree.node(id);
    const double p = node.p;
    const std::vector<double> counts = child_leaf_counts(tree, id);
    double g = -(node.child_count - 1) / p;
    double cum = counts[0];
    for (std::size_t k = 1; k < counts.size(); ++k) {
      const double a = cum / p;
      const double b = counts[k] / p;
      // d/dp log B(a(p), b(p)) with a' = -a/p, b' = -b/p.
      g += (-digamma(a) * a - digamma(b) * b + digamma(a + b) * (a + b)) / p;
      cum += counts[k];
    }
    grad[static_cast<std::size_t>(j)] = g;
  }
  return grad;
}

}  // namespace lpnest
