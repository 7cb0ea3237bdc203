#include "lpnest/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lpnest/special.hpp"

namespace lpnest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSigmaFloor = 1e-6;

void check_positive_radius(double r) {
  if (!(r > 0.0)) throw std::domain_error("radial: r must be > 0");
}

void check_prob(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("radial: q must be in [0, 1]");
}

double lognormal_log_pdf(double mu, double sigma, double r) {
  const double z = (std::log(r) - mu) / sigma;
  return -std::log(r) - std::log(sigma) - 0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
}

double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (const double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (const double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double log_pdf(const RadialModel& model, double r) {
  check_positive_radius(r);
  return std::visit(
      [r](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return std::log(m.exponent) + (m.shape * m.exponent - 1.0) * std::log(r) -
                 std::pow(r, m.exponent) / m.scale - log_gamma(m.shape) -
                 m.shape * std::log(m.scale);
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          if (r > 1.0) return kNegInf;
          return std::log(static_cast<double>(m.dim)) + (m.dim - 1.0) * std::log(r);
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          return lognormal_log_pdf(m.mu, m.sigma, r);
        } else {
          std::vector<double> terms(m.weights.size());
          for (std::size_t k = 0; k < m.weights.size(); ++k) {
            terms[k] = std::log(m.weights[k]) + lognormal_log_pdf(m.mus[k], m.sigmas[k], r);
          }
          return logsumexp(terms);
        }
      },
      model);
}

double log_pdf_dr(const RadialModel& model, double r) {
  check_positive_radius(r);
  return std::visit(
      [r](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return (m.shape * m.exponent - 1.0) / r -
                 m.exponent * std::pow(r, m.exponent - 1.0) / m.scale;
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          if (r > 1.0) return 0.0;  // density vanishes; flat in log space
          return (m.dim - 1.0) / r;
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          return -(1.0 + (std::log(r) - m.mu) / (m.sigma * m.sigma)) / r;
        } else {
          // Responsibility-weighted component derivatives.
          std::vector<double> terms(m.weights.size());
          for (std::size_t k = 0; k < m.weights.size(); ++k) {
            terms[k] = std::log(m.weights[k]) + lognormal_log_pdf(m.mus[k], m.sigmas[k], r);
          }
          const double total = logsumexp(terms);
          double g = 0.0;
          for (std::size_t k = 0; k < m.weights.size(); ++k) {
            const double resp = std::exp(terms[k] - total);
            g += resp * (-(1.0 + (std::log(r) - m.mus[k]) / (m.sigmas[k] * m.sigmas[k])) / r);
          }
          return g;
        }
      },
      model);
}

double cdf(const RadialModel& model, double r) {
  if (r <= 0.0) return 0.0;
  return std::visit(
      [r](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return reg_inc_gamma_P(m.shape, std::pow(r, m.exponent) / m.scale);
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          return r >= 1.0 ? 1.0 : std::pow(r, static_cast<double>(m.dim));
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          return std_normal_cdf((std::log(r) - m.mu) / m.sigma);
        } else {
          double s = 0.0;
          for (std::size_t k = 0; k < m.weights.size(); ++k) {
            s += m.weights[k] * std_normal_cdf((std::log(r) - m.mus[k]) / m.sigmas[k]);
          }
          return std::min(1.0, std::max(0.0, s));
        }
      },
      model);
}

double quantile(const RadialModel& model, double q) {
  check_prob(q);
  return std::visit(
      [q, &model](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return std::pow(m.scale * inv_reg_inc_gamma_P(m.shape, q), 1.0 / m.exponent);
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          return std::pow(q, 1.0 / static_cast<double>(m.dim));
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          if (q == 0.0) return 0.0;
          if (q == 1.0) return std::numeric_limits<double>::infinity();
          return std::exp(m.mu + m.sigma * std_normal_quantile(q));
        } else {
          if (q == 0.0) return 0.0;
          if (q == 1.0) return std::numeric_limits<double>::infinity();
          // Bracket by the component quantiles, then safeguarded Newton.
          double lo = std::numeric_limits<double>::infinity();
          double hi = 0.0;
          for (std::size_t k = 0; k < m.weights.size(); ++k) {
            const double rk = std::exp(m.mus[k] + m.sigmas[k] * std_normal_quantile(q));
            lo = std::min(lo, rk);
            hi = std::max(hi, rk);
          }
          double x = 0.5 * (lo + hi);
          for (int it = 0; it < 200; ++it) {
            const double err = cdf(model, x) - q;
            if (err > 0.0) hi = std::min(hi, x);
            else lo = std::max(lo, x);
            if (std::fabs(err) < 1e-14 || hi - lo < 1e-15 * hi) break;
            const double pdf = std::exp(log_pdf(model, x));
            double next = pdf > 0.0 ? x - err / pdf : x;
            if (!(next > lo) || !(next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
            x = next;
          }
          return x;
        }
      },
      model);
}

double sample(const RadialModel& model, Rng& rng) {
  return std::visit(
      [&rng](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return std::pow(rng.gamma(m.shape, m.scale), 1.0 / m.exponent);
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          return std::pow(rng.uniform(), 1.0 / static_cast<double>(m.dim));
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          return std::exp(m.mu + m.sigma * rng.normal());
        } else {
          const double pick = rng.uniform();
          double acc = 0.0;
          std::size_t k = 0;
          for (; k + 1 < m.weights.size(); ++k) {
            acc += m.weights[k];
            if (pick < acc) break;
          }
          return std::exp(m.mus[k] + m.sigmas[k] * rng.normal());
        }
      },
      model);
}

std::vector<double> sample(const RadialModel& model, Rng& rng, std::size_t count) {
  std::vector<double> out(count);
  for (double& r : out) r = sample(model, rng);
  return out;
}

double log_likelihood(const RadialModel& model, std::span<const double> radii) {
  double s = 0.0;
  for (const double r : radii) s += log_pdf(model, r);
  return s;
}

LogNormalRadial fit_lognormal(std::span<const double> radii) {
  if (radii.size() < 2) throw std::invalid_argument("fit_lognormal: need at least 2 radii");
  double mu = 0.0;
  for (const double r : radii) {
    check_positive_radius(r);
    mu += std::log(r);
  }
  mu /= static_cast<double>(radii.size());
  double var = 0.0;
  for (const double r : radii) {
    const double d = std::log(r) - mu;
    var += d * d;
  }
  var /= static_cast<double>(radii.size());
  return {mu, std::max(std::sqrt(var), kSigmaFloor)};
}

GammaPRadial fit_gammap(std::span<const double> radii, double exponent) {
  if (radii.size() < 2) throw std::invalid_argument("fit_gammap: need at least 2 radii");
  if (!(exponent > 0.0)) throw std::invalid_argument("fit_gammap: exponent must be > 0");
  const double m = static_cast<double>(radii.size());
  double mean_g = 0.0;
  double mean_log_g = 0.0;
  for (const double r : radii) {
    check_positive_radius(r);
    const double g = std::pow(r, exponent);
    mean_g += g;
    mean_log_g += exponent * std::log(r);
  }
  mean_g /= m;
  mean_log_g /= m;
  const double gap = std::max(std::log(mean_g) - mean_log_g, 1e-12);  // >= 0 by Jensen
  // Standard closed-form start, then Newton on log u - psi(u) = gap.
  double u = (3.0 - gap + std::sqrt((gap - 3.0) * (gap - 3.0) + 24.0 * gap)) / (12.0 * gap);
  for (int it = 0; it < 60; ++it) {
    const double h = std::log(u) - digamma(u) - gap;
    const double dh = 1.0 / u - trigamma(u);
    double next = u - h / dh;
    if (!(next > 0.0) || !std::isfinite(next)) next = u * 0.5;
    if (std::fabs(next - u) < 1e-12 * u) {
      u = next;
      break;
    }
    u = next;
  }
  return {u, mean_g / u, exponent};
}

LogNormalMixtureRadial fit_lognormal_mixture(std::span<const double> radii, int components,
                                             std::vector<double>* loglik_trace) {
  if (radii.size() < 2) throw std::invalid_argument("fit_lognormal_mixture: need at least 2 radii");
  if (components < 1) throw std::invalid_argument("fit_lognormal_mixture: need >= 1 component");
  const std::size_t m = radii.size();
  std::vector<double> logs(m);
  for (std::size_t i = 0; i < m; ++i) {
    check_positive_radius(radii[i]);
    logs[i] = std::log(radii[i]);
  }

  // Quantile-sliced moment initialization.
  std::vector<double> sorted = logs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k_count = static_cast<std::size_t>(components);
  LogNormalMixtureRadial mix;
  mix.weights.assign(k_count, 1.0 / static_cast<double>(components));
  mix.mus.resize(k_count);
  mix.sigmas.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const std::size_t lo = m * k / k_count;
    const std::size_t hi = std::max(m * (k + 1) / k_count, lo + 1);
    double mu = 0.0;
    for (std::size_t i = lo; i < hi; ++i) mu += sorted[i];
    mu /= static_cast<double>(hi - lo);
    double var = 0.0;
    for (std::size_t i = lo; i < hi; ++i) var += (sorted[i] - mu) * (sorted[i] - mu);
    var /= static_cast<double>(hi - lo);
    mix.mus[k] = mu;
    mix.sigmas[k] = std::max(std::sqrt(var), 1e-2);
  }

  std::vector<double> resp(m * k_count);
  std::vector<double> terms(k_count);
  double prev_ll = kNegInf;
  for (int it = 0; it < 500; ++it) {
    double ll = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < k_count; ++k) {
        terms[k] = std::log(mix.weights[k]) + lognormal_log_pdf(mix.mus[k], mix.sigmas[k], radii[i]);
      }
      const double total = logsumexp(terms);
      ll += total;
      for (std::size_t k = 0; k < k_count; ++k) resp[i * k_count + k] = std::exp(terms[k] - total);
    }
    if (loglik_trace) loglik_trace->push_back(ll);
    if (std::isfinite(prev_ll) && ll - prev_ll < 1e-9 * std::fabs(ll)) break;
    prev_ll = ll;

    for (std::size_t k = 0; k < k_count; ++k) {
      double wk = 0.0;
      double mk = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        wk += resp[i * k_count + k];
        mk += resp[i * k_count + k] * logs[i];
      }
      if (wk < 1e-12) {
        mix.weights[k] = 1e-12;
        continue;
      }
      mk /= wk;
      double vk = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        vk += resp[i * k_count + k] * (logs[i] - mk) * (logs[i] - mk);
      }
      vk /= wk;
      mix.weights[k] = wk / static_cast<double>(m);
      mix.mus[k] = mk;
      mix.sigmas[k] = std::max(std::sqrt(vk), kSigmaFloor);
    }
    const double wsum = std::accumulate(mix.weights.begin(), mix.weights.end(), 0.0);
    for (double& w : mix.weights) w /= wsum;
  }
  return mix;
}

RadialModel fit_radial(const RadialModel& family, std::span<const double> radii) {
  return std::visit(
      [&radii](const auto& m) -> RadialModel {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaPRadial>) {
          return fit_gammap(radii, m.exponent);
        } else if constexpr (std::is_same_v<T, UniformBallRadial>) {
          return m;  // no free parameters
        } else if constexpr (std::is_same_v<T, LogNormalRadial>) {
          return fit_lognormal(radii);
        } else {
          return fit_lognormal_mixture(radii, static_cast<int>(m.weights.size()));
        }
      },
      family);
}

}  // namespace lpnest
