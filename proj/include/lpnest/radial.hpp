#pragma once

#include <span>
#include <variant>
#include <vector>

#include "lpnest/rng.hpp"

namespace lpnest {

// Distribution of G^(1/p) for G ~ Gamma(shape, scale). The member with
// shape = n / p_root renders the root subspaces of an L_p-nested model
// independent.
struct GammaPRadial {
  double shape;     // u > 0
  double scale;     // s > 0
  double exponent;  // p > 0
};

// Radius of the uniform distribution inside the unit f-ball: n r^(n-1)
// on (0, 1].
struct UniformBallRadial {
  int dim;
};

struct LogNormalRadial {
  double mu;
  double sigma;
};

struct LogNormalMixtureRadial {
  std::vector<double> weights;  // simplex
  std::vector<double> mus;
  std::vector<double> sigmas;
};

using RadialModel =
    std::variant<GammaPRadial, UniformBallRadial, LogNormalRadial, LogNormalMixtureRadial>;

double log_pdf(const RadialModel& model, double r);

// d/dr log pdf(r); used by the likelihood gradients.
double log_pdf_dr(const RadialModel& model, double r);

double cdf(const RadialModel& model, double r);

double quantile(const RadialModel& model, double q);

double sample(const RadialModel& model, Rng& rng);
std::vector<double> sample(const RadialModel& model, Rng& rng, std::size_t count);

double log_likelihood(const RadialModel& model, std::span<const double> radii);

// Closed-form fit of the log of the data; sigma floored at 1e-6.
LogNormalRadial fit_lognormal(std::span<const double> radii);

// Maximum likelihood with the exponent held fixed: shape by Newton on the
// profile likelihood, scale by its stationary condition.
GammaPRadial fit_gammap(std::span<const double> radii, double exponent);

// EM on log radii until the relative log-likelihood change drops below
// 1e-9 (or 500 iterations). Optionally records the per-iteration
// log-likelihood trace.
LogNormalMixtureRadial fit_lognormal_mixture(std::span<const double> radii, int components,
                                             std::vector<double>* loglik_trace = nullptr);

// Refits the parameters of `family` on the given radii, keeping whatever
// the family fixes (the GammaP exponent, the mixture size). The uniform
// ball radial has no free parameters and is returned unchanged.
RadialModel fit_radial(const RadialModel& family, std::span<const double> radii);

}  // namespace lpnest
