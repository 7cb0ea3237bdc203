#include "lpnest/sampler.hpp"

#include <Eigen/LU>
#include <cmath>

#include "lpnest/instrument.hpp"

namespace lpnest {

namespace {

// One ball sample written to out[0..n-1]; work is one Dirichlet draw per
// inner node, O(n) in total.
void ball_sample(const LpTree& tree, Rng& rng, std::span<double> out) {
  const int count = tree.node_count();
  thread_local std::vector<double> v;
  v.assign(static_cast<std::size_t>(count), 0.0);
  v[0] = std::pow(rng.uniform(), 1.0 / static_cast<double>(tree.dimension()));
  for (int id = 0; id < count; ++id) {
    ++instrument::node_visits;
    const LpTree::Node& node = tree.node(id);
    if (node.is_leaf()) {
      out[static_cast<std::size_t>(node.leaf_index)] =
          v[static_cast<std::size_t>(id)] * rng.sign();
      continue;
    }
    // Dirichlet(n_{I,k} / p_I) via normalized Gamma draws, then the
    // component-wise 1/p_I power.
    double total = 0.0;
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      const double g = rng.gamma(tree.node(c).leaf_count / node.p, 1.0);
      v[static_cast<std::size_t>(c)] = g;
      total += g;
    }
    for (int c = node.first_child; c >= 0; c = tree.node(c).next_sibling) {
      const double s = v[static_cast<std::size_t>(c)] / total;
      v[static_cast<std::size_t>(c)] =
          v[static_cast<std::size_t>(id)] * std::pow(s, 1.0 / node.p);
    }
  }
}

}  // namespace

Dataset sample_uniform_ball(const LpTree& tree, Rng& rng, std::size_t count) {
  if (count < 1) throw std::invalid_argument("sample_uniform_ball: count must be >= 1");
  Dataset data = Dataset::zeros(count, static_cast<std::size_t>(tree.dimension()));
  for (std::size_t i = 0; i < count; ++i) ball_sample(tree, rng, data.row(i));
  return data;
}

Dataset sample(const LpNestedModel& model, Rng& rng, std::size_t count) {
  if (count < 1) throw std::invalid_argument("sample: count must be >= 1");
  const LpTree& tree = model.tree;
  const std::size_t n = static_cast<std::size_t>(tree.dimension());
  Dataset data = Dataset::zeros(count, n);

  Eigen::MatrixXd w_inv;
  if (model.has_W()) w_inv = model.W.inverse();

  std::vector<double> y(n);
  for (std::size_t i = 0; i < count; ++i) {
    ball_sample(tree, rng, y);
    const double f = evaluate(tree, y);
    const double radius = sample(model.radial, rng);
    const double scale = radius / f;
    auto row = data.row(i);
    if (model.has_W()) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          acc += w_inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * y[k];
        }
        row[j] = acc * scale;
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) row[j] = y[j] * scale;
    }
  }
  return data;
}

}  // namespace lpnest
