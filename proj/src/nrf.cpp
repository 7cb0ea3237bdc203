#include "lpnest/nrf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lpnest/special.hpp"

namespace lpnest {

namespace {

constexpr double kCdfClamp = 1e-15;

double white_gamma_p_scale(double p) {
  // (Gamma(1/p) / Gamma(3/p))^(p/2): unit variance for the implied
  // exponential-power marginals.
  return std::exp(0.5 * p * (log_gamma(1.0 / p) - log_gamma(3.0 / p)));
}

void nrf_node(const LpTree& tree, int id, const RadialModel& source, std::vector<double>& y,
              double& log_jac) {
  const LpTree::Node& node = tree.node(id);
  const double p = node.p;
  const double n_node = static_cast<double>(node.leaf_count);
  const RadialModel target = nrf_target_radial(node.leaf_count, p);

  const double r = evaluate_subtree(tree, id, y);
  if (r > 0.0) {
    const double g = radial_remap(r, source, target);
    const double scale = g / r;
    for (int j = node.first_leaf; j < node.first_leaf + node.leaf_count; ++j) {
      y[static_cast<std::size_t>(j)] *= scale;
    }
    log_jac += (n_node - 1.0) * (std::log(g) - std::log(r)) + log_pdf(source, r) -
               log_pdf(target, g);
  }
  // r = 0 only on a measure-zero set; the sub-vector stays untouched.

  for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
    const LpTree::Node& child = tree.node(c);
    if (child.is_leaf()) continue;
    const GammaPRadial child_source{child.leaf_count / p, white_gamma_p_scale(p), p};
    nrf_node(tree, c, child_source, y, log_jac);
  }
}

}  // namespace

double radial_remap(double r, const RadialModel& source, const RadialModel& target) {
  if (!(r > 0.0)) throw std::domain_error("radial_remap: r must be > 0");
  const double q = std::clamp(cdf(source, r), kCdfClamp, 1.0 - kCdfClamp);
  return quantile(target, q);
}

GammaPRadial nrf_target_radial(int n_node, double p) {
  return {static_cast<double>(n_node) / p, white_gamma_p_scale(p), p};
}

std::pair<std::vector<double>, double> nrf_transform_with_jacobian(std::span<const double> y,
                                                                   const LpTree& tree,
                                                                   const RadialModel& source) {
  if (static_cast<int>(y.size()) != tree.dimension()) {
    throw std::invalid_argument("nrf: dimension mismatch");
  }
  if (tree.node(LpTree::root_id()).is_leaf()) {
    throw std::invalid_argument("nrf: tree must have at least one inner node");
  }
  std::vector<double> z(y.begin(), y.end());
  double log_jac = 0.0;
  nrf_node(tree, LpTree::root_id(), source, z, log_jac);
  return {std::move(z), log_jac};
}

std::vector<double> nrf_transform(std::span<const double> y, const LpTree& tree,
                                  const RadialModel& source) {
  return nrf_transform_with_jacobian(y, tree, source).first;
}

double nrf_log_jacobian(std::span<const double> y, const LpTree& tree,
                        const RadialModel& source) {
  return nrf_transform_with_jacobian(y, tree, source).second;
}

double pgn_log_pdf(double z, double p, double s) {
  return std::log(p) - std::log(2.0) - log_gamma(1.0 / p) - std::log(s) / p -
         std::pow(std::fabs(z), p) / s;
}

double pgn_cdf(double z, double p, double s) {
  if (z == 0.0) return 0.5;
  const double tail = reg_inc_gamma_P(1.0 / p, std::pow(std::fabs(z), p) / s);
  return z > 0.0 ? 0.5 + 0.5 * tail : 0.5 - 0.5 * tail;
}

std::vector<std::pair<double, double>> nrf_marginal_params(const LpTree& tree) {
  std::vector<std::pair<double, double>> params(static_cast<std::size_t>(tree.dimension()));
  for (int id = 0; id < tree.node_count(); ++id) {
    const LpTree::Node& node = tree.node(id);
    if (!node.is_leaf()) continue;
    const double p = tree.node(node.parent).p;
    params[static_cast<std::size_t>(node.leaf_index)] = {p, white_gamma_p_scale(p)};
  }
  return params;
}

}  // namespace lpnest
