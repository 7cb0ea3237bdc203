#pragma once

// Test-only oracles, independent of the library implementations they check:
// finite differences, Monte Carlo geometry, numerical Jacobians,
// quadrature, and randomized tree generation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lpnest/polar.hpp"
#include "lpnest/rng.hpp"
#include "lpnest/special.hpp"
#include "lpnest/tree.hpp"

namespace oracles {

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Random tree text over n leaves: recursive partition into 2..4 groups,
// exponents uniform in [p_lo, p_hi].
inline std::string random_tree_text(lpnest::Rng& rng, int n, double p_lo, double p_hi,
                                    int first_leaf = 0) {
  if (n == 1) return std::to_string(first_leaf);
  const double p = rng.uniform(p_lo, p_hi);
  int groups = 2 + static_cast<int>(rng.uniform() * 3.0);
  groups = std::min(groups, n);
  // Split n leaves into `groups` non-empty parts.
  std::vector<int> sizes(static_cast<std::size_t>(groups), 1);
  for (int extra = n - groups; extra > 0; --extra) {
    sizes[static_cast<std::size_t>(rng.uniform() * groups)] += 1;
  }
  std::string text = "(" + std::to_string(p);
  int offset = first_leaf;
  for (const int size : sizes) {
    text += " ";
    // Keep some children as leaf groups to vary the shapes.
    if (size == 1 || rng.uniform() < 0.3) {
      if (size == 1) {
        text += std::to_string(offset);
      } else {
        text += "(" + std::to_string(rng.uniform(p_lo, p_hi));
        for (int k = 0; k < size; ++k) text += " " + std::to_string(offset + k);
        text += ")";
      }
    } else {
      text += random_tree_text(rng, size, p_lo, p_hi, offset);
    }
    offset += size;
  }
  text += ")";
  return text;
}

inline lpnest::LpTree random_tree(lpnest::Rng& rng, int n, double p_lo = 0.7, double p_hi = 3.0) {
  return lpnest::LpTree::parse(random_tree_text(rng, n, p_lo, p_hi));
}

// Balanced binary tree over n leaves (the worst case of 2n - 1 nodes),
// with random exponents; used by the complexity assertions.
inline std::string binary_tree_text(lpnest::Rng& rng, int n, double p_lo, double p_hi,
                                    int first_leaf = 0) {
  if (n == 1) return std::to_string(first_leaf);
  const int left = n / 2;
  return "(" + std::to_string(rng.uniform(p_lo, p_hi)) + " " +
         binary_tree_text(rng, left, p_lo, p_hi, first_leaf) + " " +
         binary_tree_text(rng, n - left, p_lo, p_hi, first_leaf + left) + ")";
}

inline lpnest::LpTree random_binary_tree(lpnest::Rng& rng, int n, double p_lo = 0.7,
                                         double p_hi = 3.0) {
  return lpnest::LpTree::parse(binary_tree_text(rng, n, p_lo, p_hi));
}

// Rejection estimate of log V_f(1) from points uniform in [-1, 1]^n.
inline double mc_log_volume(const lpnest::LpTree& tree, std::size_t points, lpnest::Rng& rng) {
  const int n = tree.dimension();
  std::vector<double> x(static_cast<std::size_t>(n));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < points; ++i) {
    for (double& c : x) c = rng.uniform(-1.0, 1.0);
    if (lpnest::evaluate(tree, x) <= 1.0) ++hits;
  }
  return std::log(static_cast<double>(hits) / static_cast<double>(points)) +
         n * std::log(2.0);
}

// log |det| of the numerically differentiated inverse polar map
// (r, u_1..u_{n-1}) -> x.
inline double numerical_polar_logdet(const lpnest::LpTree& tree, const lpnest::PolarPoint& point,
                                     double h = 1e-6) {
  const int n = tree.dimension();
  Eigen::MatrixXd jac(n, n);
  const auto column = [&](const lpnest::PolarPoint& plus, const lpnest::PolarPoint& minus,
                          int col) {
    const std::vector<double> xp = lpnest::from_polar(tree, plus);
    const std::vector<double> xm = lpnest::from_polar(tree, minus);
    for (int i = 0; i < n; ++i) jac(i, col) = (xp[static_cast<std::size_t>(i)] -
                                               xm[static_cast<std::size_t>(i)]) / (2.0 * h);
  };
  lpnest::PolarPoint plus = point, minus = point;
  plus.r += h;
  minus.r -= h;
  column(plus, minus, 0);
  for (int k = 0; k < n - 1; ++k) {
    plus = minus = point;
    plus.u[static_cast<std::size_t>(k)] += h;
    minus.u[static_cast<std::size_t>(k)] -= h;
    column(plus, minus, k + 1);
  }
  return std::log(std::fabs(jac.determinant()));
}

// Midpoint quadrature on [lo, hi].
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        int cells = 20000) {
  const double h = (hi - lo) / cells;
  double sum = 0.0;
  for (int i = 0; i < cells; ++i) sum += f(lo + (i + 0.5) * h);
  return sum * h;
}

// Midpoint quadrature with endpoint-graded mesh t -> lo + (hi-lo) * s(t),
// s clustering points at both endpoints; handles integrable endpoint
// singularities.
inline double integrate_graded(const std::function<double(double)>& f, double lo, double hi,
                               int cells = 20000) {
  const double len = hi - lo;
  double sum = 0.0;
  const double dt = 1.0 / cells;
  for (int i = 0; i < cells; ++i) {
    const double t = (i + 0.5) * dt;
    const double s = t * t * (3.0 - 2.0 * t);  // smoothstep, s'(0)=s'(1)=0
    const double ds = 6.0 * t * (1.0 - t);
    sum += f(lo + len * s) * len * ds * dt;
  }
  return sum;
}

inline double chi2_sf(double stat, int dof) {
  return 1.0 - lpnest::reg_inc_gamma_P(dof / 2.0, stat / 2.0);
}

inline double linear_fit_r2(std::span<const double> x, std::span<const double> y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / m;
  const double vx = sxx - sx * sx / m;
  const double vy = syy - sy * sy / m;
  return cov * cov / (vx * vy);
}

}  // namespace oracles
