#include "lpnest/density.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpnest/geometry.hpp"
#include "lpnest/special.hpp"
#include "lpnest/stats.hpp"

namespace lpnest {

void LpNestedModel::set_W(const Eigen::MatrixXd& w) {
  if (w.rows() != tree.dimension() || w.cols() != tree.dimension()) {
    throw std::invalid_argument("set_W: W must be n x n");
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(w);
  if (!lu.isInvertible()) throw std::invalid_argument("set_W: W must be invertible");
  W = w;
  log_abs_det_W = std::log(std::fabs(lu.determinant()));
}

std::vector<double> LpNestedModel::map_through_W(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != tree.dimension()) {
    throw std::invalid_argument("model: dimension mismatch");
  }
  if (!has_W()) return {x.begin(), x.end()};
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd y = W * xv;
  return {y.data(), y.data() + y.size()};
}

double log_density(const LpNestedModel& model, std::span<const double> x) {
  const std::vector<double> y = model.map_through_W(x);
  const double r = evaluate(model.tree, y);
  const double n = static_cast<double>(model.tree.dimension());
  if (r <= 0.0) {
    // The radial law decides the value on the measure-zero ray r = 0.
    return -std::numeric_limits<double>::infinity();
  }
  return log_pdf(model.radial, r) - (n - 1.0) * std::log(r) - log_surface_area(model.tree) +
         model.log_abs_det_W;
}

double uniform_sphere_log_density(const LpTree& tree, const PolarPoint& point) {
  if (std::fabs(point.r - 1.0) > 1e-9) {
    throw std::invalid_argument("uniform_sphere_log_density: point must have r = 1");
  }
  const double n = static_cast<double>(tree.dimension());
  // log of prod G_L: the Jacobian at r = 1 is exactly that product.
  PolarPoint unit = point;
  unit.r = 1.0;
  double sum = log_jacobian_det(tree, unit);
  sum -= (n - 1.0) * std::log(2.0);
  for (const int id : tree.inner_ids()) {
    const LpTree::Node& node = tree.node(id);
    sum += (node.child_count - 1) * std::log(node.p);
    double cum = 0.0;
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      const double nc = static_cast<double>(tree.node(c).leaf_count);
      if (cum > 0.0) sum -= log_beta(cum / node.p, nc / node.p);
      cum += nc;
    }
  }
  return sum;
}

double layer_marginal_log_density(const LpNestedModel& model, std::span<const double> x_kept,
                                  std::span<const double> v_collapsed,
                                  const std::vector<NodePath>& collapsed) {
  const LpTree& tree = model.tree;
  if (v_collapsed.size() != collapsed.size()) {
    throw std::invalid_argument("layer_marginal: radii/node count mismatch");
  }
  const int count = tree.node_count();
  std::vector<double> pinned(static_cast<std::size_t>(count),
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> is_pinned(static_cast<std::size_t>(count), false);
  for (std::size_t k = 0; k < collapsed.size(); ++k) {
    const int id = tree.id_of(collapsed[k]);
    if (tree.node(id).is_leaf()) {
      throw std::invalid_argument("layer_marginal: collapsed nodes must be inner nodes");
    }
    if (!(v_collapsed[k] > 0.0)) throw std::domain_error("layer_marginal: radii must be > 0");
    if (is_pinned[static_cast<std::size_t>(id)]) {
      throw std::invalid_argument("layer_marginal: duplicate collapsed node");
    }
    is_pinned[static_cast<std::size_t>(id)] = true;
    pinned[static_cast<std::size_t>(id)] = v_collapsed[k];
  }

  // Mark everything strictly below a pinned node as removed; pinned nodes
  // must be disjoint.
  std::vector<bool> removed(static_cast<std::size_t>(count), false);
  for (int id = 1; id < count; ++id) {
    const int parent = tree.node(id).parent;
    const bool below = removed[static_cast<std::size_t>(parent)] ||
                       is_pinned[static_cast<std::size_t>(parent)];
    if (below && is_pinned[static_cast<std::size_t>(id)]) {
      throw std::invalid_argument("layer_marginal: collapsed nodes must be disjoint");
    }
    removed[static_cast<std::size_t>(id)] = below;
  }

  // Reduced-tree evaluation: pinned nodes act as leaves with the given
  // radii, surviving leaves consume x_kept in leaf order.
  std::vector<double> v(static_cast<std::size_t>(count), 0.0);
  std::size_t kept_used = 0;
  int kept_leaves = 0;
  for (int id = count - 1; id >= 0; --id) {
    if (removed[static_cast<std::size_t>(id)]) continue;
    const LpTree::Node& node = tree.node(id);
    if (is_pinned[static_cast<std::size_t>(id)]) {
      v[static_cast<std::size_t>(id)] = pinned[static_cast<std::size_t>(id)];
      continue;
    }
    if (node.is_leaf()) {
      ++kept_leaves;
      continue;  // filled below, after we know the kept count
    }
  }
  if (static_cast<std::size_t>(kept_leaves) != x_kept.size()) {
    throw std::invalid_argument("layer_marginal: expected " + std::to_string(kept_leaves) +
                                " kept coordinates, got " + std::to_string(x_kept.size()));
  }
  // Kept leaves appear in increasing leaf order, which is preorder order.
  for (int id = 0; id < count; ++id) {
    if (removed[static_cast<std::size_t>(id)] || is_pinned[static_cast<std::size_t>(id)]) continue;
    if (tree.node(id).is_leaf()) v[static_cast<std::size_t>(id)] = std::fabs(x_kept[kept_used++]);
  }
  for (int id = count - 1; id >= 0; --id) {
    if (removed[static_cast<std::size_t>(id)] || is_pinned[static_cast<std::size_t>(id)]) continue;
    const LpTree::Node& node = tree.node(id);
    if (node.is_leaf()) continue;
    double sum = 0.0;
    double vmax = 0.0;
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      vmax = std::max(vmax, v[static_cast<std::size_t>(c)]);
    }
    if (vmax > 0.0) {
      for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
        const double t = v[static_cast<std::size_t>(c)] / vmax;
        if (t > 0.0) sum += std::pow(t, node.p);
      }
    }
    v[static_cast<std::size_t>(id)] = vmax > 0.0 ? vmax * std::pow(sum, 1.0 / node.p) : 0.0;
  }
  const double f_reduced = v[0];
  if (!(f_reduced > 0.0)) throw std::domain_error("layer_marginal: reduced value is zero");

  // Normalizer of the collapsed density: the original surface area with the
  // removed nodes' factors dropped and one sign factor (2) per surviving
  // coordinate; the radius power keeps the original dimension.
  const double n = static_cast<double>(tree.dimension());
  double log_norm = (n - 1.0) * std::log(f_reduced) +
                    static_cast<double>(kept_leaves) * std::log(2.0);
  for (const int id : tree.inner_ids()) {
    if (removed[static_cast<std::size_t>(id)] || is_pinned[static_cast<std::size_t>(id)]) continue;
    const LpTree::Node& node = tree.node(id);
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      log_norm += log_gamma(tree.node(c).leaf_count / node.p);
    }
    log_norm -= (node.child_count - 1) * std::log(node.p);
    log_norm -= log_gamma(node.leaf_count / node.p);
  }

  double result = log_pdf(model.radial, f_reduced) - log_norm;
  for (std::size_t k = 0; k < collapsed.size(); ++k) {
    const int id = tree.id_of(collapsed[k]);
    const double nj = static_cast<double>(tree.node(id).leaf_count);
    result += (nj - 1.0) * std::log(v_collapsed[k]);
  }
  return result;
}

DirichletCheckReport root_children_dirichlet_check(const LpNestedModel& model,
                                                   const Dataset& samples) {
  if (samples.rows < 10000) {
    throw std::invalid_argument("dirichlet check: need at least 10^4 samples");
  }
  const LpTree& tree = model.tree;
  if (samples.cols != static_cast<std::size_t>(tree.dimension())) {
    throw std::invalid_argument("dirichlet check: dimension mismatch");
  }
  const std::vector<int> kids = tree.children(LpTree::root_id());
  const double p_root = tree.node(LpTree::root_id()).p;
  const double n = static_cast<double>(tree.dimension());

  std::vector<std::vector<double>> s(kids.size());
  for (auto& col : s) col.reserve(samples.rows);
  for (std::size_t i = 0; i < samples.rows; ++i) {
    const std::vector<double> y = model.map_through_W(samples.row(i));
    const NodeValues values = evaluate_nodes(tree, y);
    const double f = values.root();
    if (!(f > 0.0)) continue;
    for (std::size_t k = 0; k < kids.size(); ++k) {
      s[k].push_back(std::pow(values.value(kids[k]) / f, p_root));
    }
  }

  DirichletCheckReport report;
  report.critical_value = ks_critical(samples.rows, 0.01);
  report.pass = true;
  for (std::size_t k = 0; k < kids.size(); ++k) {
    const double nk = static_cast<double>(tree.node(kids[k]).leaf_count);
    const double a = nk / p_root;
    const double b = (n - nk) / p_root;
    const double d = ks_statistic(
        s[k], [a, b](double x) { return reg_inc_beta(a, b, std::clamp(x, 0.0, 1.0)); });
    const bool pass = d < report.critical_value;
    report.coordinates.push_back({a, b, d, pass});
    report.pass = report.pass && pass;
  }
  return report;
}

}  // namespace lpnest
