#include "lpnest/polar.hpp"

#include <cmath>
#include <stdexcept>

namespace lpnest {

namespace {

struct SpineTerm {
  double g;        // value of the spine node given f = 1 and the other u
  double p_diff;   // p_node - p_parent (leaf p is 1)
};

// Walks the root-to-last-leaf spine, expressing each spine node's value
// from the fixed root value 1 and the sibling subtree values. The last
// entry's g is the implied u_n.
std::vector<SpineTerm> peel_spine(const LpTree& tree, std::span<const double> u,
                                  bool allow_boundary) {
  const int n = tree.dimension();
  if (static_cast<int>(u.size()) != n - 1) {
    throw std::invalid_argument("polar: direction must have n - 1 coordinates");
  }
  std::vector<double> padded(u.begin(), u.end());
  padded.push_back(0.0);
  const NodeValues values = evaluate_nodes(tree, padded);

  std::vector<SpineTerm> terms;
  const std::vector<int>& spine = tree.rightmost_path();
  double g = 1.0;
  for (std::size_t s = 0; s + 1 < spine.size(); ++s) {
    const int parent = spine[s];
    const int child = spine[s + 1];
    const LpTree::Node& pnode = tree.node(parent);
    double residual = std::pow(g, pnode.p);
    for (int c = pnode.first_child; c >= 0; c = tree.node(c).next_sibling) {
      if (c == child) continue;
      residual -= std::pow(values.value(c), pnode.p);
    }
    if (residual < 0.0) {
      if (residual < -1e-12) {
        throw std::domain_error("polar: direction lies outside the projected unit body");
      }
      residual = 0.0;
    }
    if (residual == 0.0 && !allow_boundary) {
      throw std::domain_error("polar: direction lies on the boundary of the projected body");
    }
    g = std::pow(residual, 1.0 / pnode.p);
    const LpTree::Node& cnode = tree.node(child);
    const double pc = cnode.is_leaf() ? 1.0 : cnode.p;
    terms.push_back({g, pc - pnode.p});
  }
  return terms;
}

}  // namespace

PolarPoint to_polar(const LpTree& tree, std::span<const double> x) {
  const double r = evaluate(tree, x);
  if (!(r > 0.0)) throw std::domain_error("to_polar: origin has no direction");
  PolarPoint point;
  point.r = r;
  point.u.reserve(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) point.u.push_back(x[i] / r);
  point.last_sign = (x.back() < 0.0) ? -1.0 : 1.0;
  return point;
}

double last_coordinate(const LpTree& tree, std::span<const double> u) {
  if (tree.dimension() == 1) return 1.0;
  const std::vector<SpineTerm> terms = peel_spine(tree, u, /*allow_boundary=*/true);
  return terms.back().g;
}

std::vector<double> from_polar(const LpTree& tree, const PolarPoint& point) {
  const double un = last_coordinate(tree, point.u);
  std::vector<double> x;
  x.reserve(point.u.size() + 1);
  for (const double ui : point.u) x.push_back(point.r * ui);
  x.push_back(point.r * point.last_sign * un);
  return x;
}

double log_jacobian_det(const LpTree& tree, const PolarPoint& point) {
  if (!(point.r > 0.0)) throw std::domain_error("log_jacobian_det: r must be > 0");
  const double n = static_cast<double>(tree.dimension());
  double sum = (n - 1.0) * std::log(point.r);
  if (tree.dimension() == 1) return sum;
  const std::vector<SpineTerm> terms = peel_spine(tree, point.u, /*allow_boundary=*/false);
  for (const SpineTerm& t : terms) sum += t.p_diff * std::log(t.g);
  return sum;
}

}  // namespace lpnest
