#include "lpnest/fitting.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "lpnest/geometry.hpp"
#include "lpnest/rng.hpp"

namespace lpnest {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMatrix> as_matrix(const Dataset& data) {
  return {data.values.data(), static_cast<Eigen::Index>(data.rows),
          static_cast<Eigen::Index>(data.cols)};
}

// Rows of data mapped through W (identity when the model has none).
RowMatrix demixed(const LpNestedModel& model, const Dataset& data) {
  const auto x = as_matrix(data);
  if (!model.has_W()) return x;
  return x * model.W.transpose();
}

// Per-sample factor d/dr log varrho(f) - (n-1)/f shared by both gradients.
double radial_weight(const LpNestedModel& model, double f, double n) {
  return log_pdf_dr(model.radial, f) - (n - 1.0) / f;
}

Eigen::MatrixXd random_rotation(int n, Rng& rng) {
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

// Polar factor; keeps Q exactly orthogonal after long update chains.
Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& q) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

void record(FitTrace* trace, const char* block, double ll) {
  if (!trace) return;
  trace->block.emplace_back(block);
  trace->loglik.push_back(ll);
}

}  // namespace

std::pair<Eigen::MatrixXd, Dataset> whiten(const Dataset& data) {
  const std::size_t m = data.rows;
  const std::size_t n = data.cols;
  if (m <= n) throw std::invalid_argument("whiten: need more samples than dimensions");
  Dataset centered = data;
  auto x = as_matrix(data);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::Map<RowMatrix> c(centered.values.data(), static_cast<Eigen::Index>(m),
                          static_cast<Eigen::Index>(n));
  c = x.rowwise() - mean;
  const Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(m - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 1e-12 * std::max(lambda.maxCoeff(), 1e-300)) {
    throw std::invalid_argument("whiten: sample covariance is rank-deficient");
  }
  const Eigen::MatrixXd w0 = eig.eigenvectors() *
                             lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                             eig.eigenvectors().transpose();
  return {w0, std::move(centered)};
}

double log_likelihood(const LpNestedModel& model, const Dataset& data) {
  double ll = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) ll += log_density(model, data.row(i));
  return ll;
}

std::pair<double, std::vector<double>> loglik_grad_p(const LpNestedModel& model,
                                                     const Dataset& data) {
  const LpTree& tree = model.tree;
  const double n = static_cast<double>(tree.dimension());
  const double m = static_cast<double>(data.rows);
  const RowMatrix y = demixed(model, data);
  std::vector<double> grad(static_cast<std::size_t>(tree.inner_count()), 0.0);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const std::span<const double> yi(y.data() + i * data.cols, data.cols);
    const double f = evaluate(tree, yi);
    if (!(f > 0.0)) throw std::domain_error("loglik_grad_p: sample with f(Wx) = 0");
    const double w = radial_weight(model, f, n);
    const std::vector<double> gp = gradient_p(tree, yi);
    for (std::size_t j = 0; j < gp.size(); ++j) grad[j] += w * gp[j];
    ll += log_pdf(model.radial, f) - (n - 1.0) * std::log(f);
  }
  const std::vector<double> gs = grad_p_log_surface(tree);
  for (std::size_t j = 0; j < gs.size(); ++j) grad[j] -= m * gs[j];
  ll += m * (model.log_abs_det_W - log_surface_area(tree));
  return {ll, grad};
}

LpNestedModel fit_p(LpNestedModel model, const Dataset& data, const FitConfig& cfg,
                    FitTrace* trace) {
  const double m = static_cast<double>(data.rows);
  std::vector<double> p = model.tree.exponents();
  auto [ll, grad] = loglik_grad_p(model, data);
  for (int it = 0; it < cfg.max_iters; ++it) {
    double sup = 0.0;
    for (const double g : grad) sup = std::max(sup, std::fabs(g));
    if (sup <= cfg.tol * m) break;

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      std::vector<double> p_new(p.size());
      double descent = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) {
        p_new[j] = std::clamp(p[j] + t * grad[j] / m, cfg.p_min, kMaxExponent);
        descent += grad[j] * (p_new[j] - p[j]);
      }
      if (descent <= 0.0) break;  // fully clamped
      LpNestedModel candidate = model;
      candidate.tree = model.tree.with_exponents(p_new);
      double ll_new;
      std::vector<double> grad_new;
      std::tie(ll_new, grad_new) = loglik_grad_p(candidate, data);
      if (ll_new >= ll + cfg.armijo_c * descent) {
        model = std::move(candidate);
        p = std::move(p_new);
        ll = ll_new;
        grad = std::move(grad_new);
        accepted = true;
        break;
      }
      t *= cfg.shrink;
    }
    if (!accepted) break;
    record(trace, "p", ll);
  }
  return model;
}

std::pair<double, Eigen::MatrixXd> loglik_grad_W(const LpNestedModel& model, const Dataset& data) {
  const LpTree& tree = model.tree;
  const int dim = tree.dimension();
  const double n = static_cast<double>(dim);
  const double m = static_cast<double>(data.rows);
  const RowMatrix y = demixed(model, data);
  const auto x = as_matrix(data);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(dim, dim);
  double ll = 0.0;
  for (std::size_t i = 0; i < data.rows; ++i) {
    const std::span<const double> yi(y.data() + i * data.cols, data.cols);
    const std::vector<double> gy = gradient_x(tree, yi);
    const double f = evaluate(tree, yi);
    if (!(f > 0.0)) throw std::domain_error("loglik_grad_W: sample with f(Wx) = 0");
    const double w = radial_weight(model, f, n);
    const Eigen::Map<const Eigen::VectorXd> gyv(gy.data(), dim);
    grad.noalias() += w * gyv * x.row(static_cast<Eigen::Index>(i));
    ll += log_pdf(model.radial, f) - (n - 1.0) * std::log(f);
  }
  ll += m * (model.log_abs_det_W - log_surface_area(tree));
  return {ll, grad};
}

LpNestedModel fit_Q(LpNestedModel model, const Dataset& data, const Eigen::MatrixXd& W0,
                    const FitConfig& cfg, FitTrace* trace) {
  const int dim = model.tree.dimension();
  const double m = static_cast<double>(data.rows);
  if (W0.rows() != dim || W0.cols() != dim) {
    throw std::invalid_argument("fit_Q: W0 must be n x n");
  }
  Eigen::MatrixXd q;
  if (model.has_W()) {
    q = model.W * W0.inverse();
    if ((q * q.transpose() - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-6) {
      throw std::invalid_argument("fit_Q: model W is not Q * W0 with orthogonal Q");
    }
    q = reorthonormalize(q);
  } else {
    q = Eigen::MatrixXd::Identity(dim, dim);
  }
  model.set_W(q * W0);

  auto [ll, grad_w] = loglik_grad_W(model, data);
  int accepted_steps = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::MatrixXd grad_q = grad_w * W0.transpose();
    const Eigen::MatrixXd skew = 0.5 * (grad_q * q.transpose() - q * grad_q.transpose());
    const double skew_norm2 = skew.squaredNorm();
    if (std::sqrt(skew_norm2) <= cfg.tol * m) break;

    double t = 1.0;
    bool accepted = false;
    const Eigen::MatrixXd direction = skew / m;
    while (t > 1e-14) {
      const Eigen::MatrixXd q_new = (t * direction).exp() * q;
      LpNestedModel candidate = model;
      candidate.set_W(q_new * W0);
      double ll_new;
      Eigen::MatrixXd grad_new;
      std::tie(ll_new, grad_new) = loglik_grad_W(candidate, data);
      if (ll_new >= ll + cfg.armijo_c * t * skew_norm2 / m) {
        q = q_new;
        model = std::move(candidate);
        ll = ll_new;
        grad_w = std::move(grad_new);
        accepted = true;
        break;
      }
      t *= cfg.shrink;
    }
    if (!accepted) break;
    if (++accepted_steps % 50 == 0) {
      q = reorthonormalize(q);
      model.set_W(q * W0);
    }
    record(trace, "q", ll);
  }
  return model;
}

FitResult fit(const LpNestedModel& model_template, const Dataset& data, const FitConfig& cfg) {
  const int dim = model_template.tree.dimension();
  const bool use_q = std::find(cfg.blocks.begin(), cfg.blocks.end(), "q") != cfg.blocks.end();

  Eigen::MatrixXd w0 = Eigen::MatrixXd::Identity(dim, dim);
  Dataset working = data;
  if (cfg.whiten) {
    std::tie(w0, working) = whiten(data);
  }

  Rng rng(cfg.seed);
  FitResult best{model_template, w0, {}, -std::numeric_limits<double>::infinity()};
  const int starts = std::max(cfg.n_starts, 1);
  for (int start = 0; start < starts; ++start) {
    LpNestedModel model = model_template;
    if (cfg.whiten || use_q) {
      const Eigen::MatrixXd q0 =
          start == 0 ? Eigen::MatrixXd::Identity(dim, dim) : random_rotation(dim, rng);
      model.set_W(q0 * w0);
    }
    FitTrace trace;
    double ll = log_likelihood(model, working);
    for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
      const double ll_before = ll;
      for (const std::string& block : cfg.blocks) {
        if (block == "radial") {
          std::vector<double> radii(working.rows);
          for (std::size_t i = 0; i < working.rows; ++i) {
            const std::vector<double> y = model.map_through_W(working.row(i));
            radii[i] = evaluate(model.tree, y);
          }
          RadialModel refit = fit_radial(model.radial, radii);
          // Keep the better of old and new; EM restarts can land lower.
          if (log_likelihood(refit, radii) >= log_likelihood(model.radial, radii)) {
            model.radial = std::move(refit);
          }
          ll = log_likelihood(model, working);
          record(&trace, "radial", ll);
        } else if (block == "p") {
          model = fit_p(std::move(model), working, cfg, &trace);
          ll = loglik_grad_p(model, working).first;
        } else if (block == "q") {
          model = fit_Q(std::move(model), working, w0, cfg, &trace);
          ll = loglik_grad_W(model, working).first;
        } else {
          throw std::invalid_argument("fit: unknown block '" + block + "'");
        }
      }
      if (ll - ll_before <= cfg.tol * std::fabs(ll_before)) break;
    }
    if (ll > best.loglik) {
      best.model = std::move(model);
      best.trace = std::move(trace);
      best.loglik = ll;
    }
  }
  best.W0 = w0;
  return best;
}

}  // namespace lpnest
