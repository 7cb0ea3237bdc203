#include <doctest.h>

#include <cmath>

#include "lpnest/radial.hpp"
#include "lpnest/special.hpp"
#include "lpnest/stats.hpp"
#include "oracles.hpp"

using namespace lpnest;

namespace {

std::vector<RadialModel> test_models() {
  return {
      GammaPRadial{2.0, 1.5, 2.0},
      GammaPRadial{0.8, 0.7, 1.3},
      UniformBallRadial{3},
      LogNormalRadial{0.2, 0.8},
      LogNormalMixtureRadial{{0.3, 0.7}, {-0.5, 0.6}, {0.4, 0.3}},
  };
}

}  // namespace

TEST_CASE("gamma_p reductions") {
  // p = 1 is the plain Gamma density.
  const GammaPRadial g1{2.3, 1.7, 1.0};
  for (const double r : {0.1, 1.0, 4.0}) {
    const double gamma_logpdf =
        (g1.shape - 1.0) * std::log(r) - r / g1.scale - log_gamma(g1.shape) -
        g1.shape * std::log(g1.scale);
    CHECK(log_pdf(RadialModel{g1}, r) == doctest::Approx(gamma_logpdf).epsilon(1e-12));
  }
  // Unit-exponential member.
  CHECK(log_pdf(RadialModel{GammaPRadial{1.0, 1.0, 1.0}}, 2.0) ==
        doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("gamma_p with shape n/p matches the ISA radial density") {
  const int n = 5;
  const double p = 1.4, s = 0.9;
  const RadialModel m = GammaPRadial{n / p, s, p};
  for (const double v : {0.3, 1.0, 2.2}) {
    const double expected = std::log(p) + (n - 1.0) * std::log(v) - std::pow(v, p) / s -
                            log_gamma(n / p) - (n / p) * std::log(s);
    CHECK(log_pdf(m, v) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("uniform ball radial closed forms") {
  const RadialModel m = UniformBallRadial{3};
  CHECK(log_pdf(m, 0.5) == doctest::Approx(std::log(3.0 * 0.25)).epsilon(1e-14));
  CHECK(log_pdf(m, 2.0) == -std::numeric_limits<double>::infinity());
  CHECK(cdf(m, 0.5) == doctest::Approx(0.125));
  CHECK(quantile(m, 0.125) == doctest::Approx(0.5));
  CHECK_THROWS_AS(log_pdf(m, 0.0), std::domain_error);
  CHECK_THROWS_AS(quantile(m, 1.5), std::domain_error);
}

TEST_CASE("pdf integrates to one") {
  for (const RadialModel& m : test_models()) {
    const double lo = quantile(m, 1e-9);
    const double hi = quantile(m, 1.0 - 1e-9);
    const double mass = oracles::integrate_graded(
        [&](double r) { return std::exp(log_pdf(m, r)); }, lo, hi, 200000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("quantile inverts the cdf on the bulk") {
  for (const RadialModel& m : test_models()) {
    for (const double q : {1e-6, 0.05, 0.3, 0.5, 0.9, 1.0 - 1e-6}) {
      const double r = quantile(m, q);
      CHECK(cdf(m, r) == doctest::Approx(q).epsilon(1e-8));
    }
    for (const double r : {0.1, 1.0, 10.0}) {
      const double q = cdf(m, r);
      if (q < 1e-6 || q > 1.0 - 1e-6) continue;
      CHECK(quantile(m, q) == doctest::Approx(r).epsilon(1e-8));
    }
  }
}

TEST_CASE("log_pdf_dr matches finite differences") {
  for (const RadialModel& m : test_models()) {
    for (const double r : {0.2, 0.7, 1.8}) {
      if (std::holds_alternative<UniformBallRadial>(m) && r > 1.0) continue;
      const double fd =
          oracles::central_diff([&](double t) { return log_pdf(m, t); }, r, 1e-7);
      CHECK(log_pdf_dr(m, r) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("samples pass a KS test against the cdf") {
  Rng rng(71);
  for (const RadialModel& m : test_models()) {
    Rng stream = rng.fork();
    const std::vector<double> draws = sample(m, stream, 100000);
    const double d = ks_statistic(draws, [&](double r) { return cdf(m, r); });
    CHECK(d < ks_critical(draws.size(), 0.01));
  }
}

TEST_CASE("lognormal fit recovers synthetic parameters") {
  Rng rng(73);
  const RadialModel truth = LogNormalRadial{0.0, 1.0};
  const std::vector<double> radii = sample(truth, rng, 100000);
  const LogNormalRadial fit = fit_lognormal(radii);
  CHECK(std::fabs(fit.mu - 0.0) < 0.02);
  CHECK(std::fabs(fit.sigma - 1.0) < 0.02);
}

TEST_CASE("gamma_p fit with fixed exponent recovers the shape") {
  Rng rng(79);
  const RadialModel truth = GammaPRadial{2.0, 1.0, 1.0};
  const std::vector<double> radii = sample(truth, rng, 100000);
  const GammaPRadial fit = fit_gammap(radii, 1.0);
  CHECK(std::fabs(fit.shape - 2.0) < 0.05);
  CHECK(std::fabs(fit.scale - 1.0) < 0.05);
}

TEST_CASE("single-component mixture equals the plain lognormal fit") {
  Rng rng(83);
  const std::vector<double> radii = sample(RadialModel{LogNormalRadial{0.3, 0.6}}, rng, 5000);
  const LogNormalMixtureRadial mix = fit_lognormal_mixture(radii, 1);
  const LogNormalRadial plain = fit_lognormal(radii);
  CHECK(mix.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mix.mus[0] == doctest::Approx(plain.mu).epsilon(1e-9));
  CHECK(mix.sigmas[0] == doctest::Approx(plain.sigma).epsilon(1e-9));
}

TEST_CASE("EM log-likelihood is non-decreasing") {
  Rng rng(89);
  const RadialModel truth = LogNormalMixtureRadial{{0.4, 0.6}, {-1.0, 1.0}, {0.3, 0.5}};
  const std::vector<double> radii = sample(truth, rng, 20000);
  std::vector<double> trace;
  const LogNormalMixtureRadial fit = fit_lognormal_mixture(radii, 2, &trace);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i] >= trace[i - 1] - 1e-7 * std::fabs(trace[i - 1]));
  }
  // The fitted mixture beats the single-component description.
  CHECK(log_likelihood(RadialModel{fit}, radii) >
        log_likelihood(RadialModel{fit_lognormal(radii)}, radii));
}

TEST_CASE("degenerate data floors the lognormal sigma") {
  const std::vector<double> radii(100, 2.5);
  const LogNormalRadial fit = fit_lognormal(radii);
  CHECK(fit.sigma == 1e-6);
}

TEST_CASE("fit_radial dispatches by family and keeps fixed parameters") {
  Rng rng(97);
  const std::vector<double> radii = sample(RadialModel{GammaPRadial{1.5, 1.0, 2.0}}, rng, 20000);
  const RadialModel refit = fit_radial(GammaPRadial{1.0, 1.0, 2.0}, radii);
  CHECK(std::get<GammaPRadial>(refit).exponent == 2.0);
  CHECK(std::fabs(std::get<GammaPRadial>(refit).shape - 1.5) < 0.1);

  const RadialModel ball = fit_radial(UniformBallRadial{4}, radii);
  CHECK(std::get<UniformBallRadial>(ball).dim == 4);
}
