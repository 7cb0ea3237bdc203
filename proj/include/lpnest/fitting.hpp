#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "lpnest/dataset.hpp"
#include "lpnest/density.hpp"

namespace lpnest {

struct FitConfig {
  int max_iters = 100;       // per block
  double tol = 1e-7;         // relative log-likelihood change
  double p_min = kMinExponent;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  std::vector<std::string> blocks = {"radial", "p", "q"};  // cycled in order
  int max_cycles = 30;
  int n_starts = 1;
  std::uint64_t seed = 0;
  bool whiten = true;
  int mixture_components = 4;
};

struct FitTrace {
  std::vector<std::string> block;  // block label per entry
  std::vector<double> loglik;      // total log-likelihood after the block
};

// Symmetric inverse square root of the sample covariance, plus the
// column-centered data. cov(centered * W0^T) is the identity.
std::pair<Eigen::MatrixXd, Dataset> whiten(const Dataset& data);

// Total log-likelihood of the data under the model.
double log_likelihood(const LpNestedModel& model, const Dataset& data);

// Log-likelihood and its gradient with respect to the inner-node
// exponents (inner_ids order).
std::pair<double, std::vector<double>> loglik_grad_p(const LpNestedModel& model,
                                                     const Dataset& data);

// Projected gradient ascent on the exponents with Armijo backtracking.
LpNestedModel fit_p(LpNestedModel model, const Dataset& data, const FitConfig& cfg,
                    FitTrace* trace = nullptr);

// Log-likelihood and its gradient with respect to W.
std::pair<double, Eigen::MatrixXd> loglik_grad_W(const LpNestedModel& model, const Dataset& data);

// Geodesic line search on SO(n) for Q in W = Q W0: tangent projection of
// the Euclidean gradient, update by the exponential of the skew step.
LpNestedModel fit_Q(LpNestedModel model, const Dataset& data, const Eigen::MatrixXd& W0,
                    const FitConfig& cfg, FitTrace* trace = nullptr);

struct FitResult {
  LpNestedModel model;
  Eigen::MatrixXd W0;  // whitening factor (identity when whitening is off)
  FitTrace trace;
  double loglik;
};

// Block-coordinate ascent cycling radial -> p -> Q until the joint
// relative improvement drops below cfg.tol. With n_starts > 1 the Q block
// is restarted from random rotations and the best run is kept.
FitResult fit(const LpNestedModel& model_template, const Dataset& data, const FitConfig& cfg);

}  // namespace lpnest
