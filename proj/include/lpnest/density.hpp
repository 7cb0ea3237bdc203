#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "lpnest/dataset.hpp"
#include "lpnest/polar.hpp"
#include "lpnest/radial.hpp"
#include "lpnest/tree.hpp"

namespace lpnest {

// An L_p-nested symmetric density: tree + radial law, observed through an
// invertible linear map W (identity when absent). Wx follows the
// symmetric law; densities include log |det W|.
struct LpNestedModel {
  LpTree tree;
  RadialModel radial;
  Eigen::MatrixXd W;  // 0x0 when absent
  double log_abs_det_W = 0.0;

  LpNestedModel(LpTree t, RadialModel r) : tree(std::move(t)), radial(std::move(r)) {}
  LpNestedModel(LpTree t, RadialModel r, const Eigen::MatrixXd& w)
      : tree(std::move(t)), radial(std::move(r)) {
    set_W(w);
  }

  bool has_W() const { return W.size() > 0; }
  void set_W(const Eigen::MatrixXd& w);

  // Wx, or x itself when no map is set.
  std::vector<double> map_through_W(std::span<const double> x) const;
};

// log rho(x) = log varrho(f(Wx)) - (n-1) log f(Wx) - log S_f(1) + log|det W|.
double log_density(const LpNestedModel& model, std::span<const double> x);

// Density of the uniform distribution on the unit f-sphere in the
// coordinates u_1..u_{n-1}; requires r = 1 and an interior direction.
double uniform_sphere_log_density(const LpTree& tree, const PolarPoint& point);

// Joint density of the kept coordinates and the radii of collapsed
// subtrees. `x_kept` holds the surviving coordinates in increasing leaf
// order; `v_collapsed[k]` is the radius pinned at `collapsed[k]`.
double layer_marginal_log_density(const LpNestedModel& model, std::span<const double> x_kept,
                                  std::span<const double> v_collapsed,
                                  const std::vector<NodePath>& collapsed);

// Kolmogorov-Smirnov checks of Cor. 8: per root child k, the statistic of
// (v_k / f)^p_root against Beta(n_k / p_root, (n - n_k) / p_root).
struct DirichletCheckReport {
  struct Coordinate {
    double beta_a;
    double beta_b;
    double ks_statistic;
    bool pass;
  };
  std::vector<Coordinate> coordinates;
  double critical_value;  // 1% level
  bool pass;
};

DirichletCheckReport root_children_dirichlet_check(const LpNestedModel& model,
                                                   const Dataset& samples);

}  // namespace lpnest
