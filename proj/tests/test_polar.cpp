#include <doctest.h>

#include <cmath>

#include "lpnest/polar.hpp"
#include "lpnest/sampler.hpp"
#include "oracles.hpp"

using namespace lpnest;

TEST_CASE("to_polar on axis points") {
  const LpTree l2 = LpTree::flat(2, 2.0);
  const double x[] = {3.0, 4.0};
  const PolarPoint p = to_polar(l2, x);
  CHECK(p.r == doctest::Approx(5.0));
  CHECK(p.u[0] == doctest::Approx(0.6));
  CHECK(p.last_sign == 1.0);

  const LpTree l1 = LpTree::flat(2, 1.0);
  const double y[] = {0.0, -2.0};
  const PolarPoint q = to_polar(l1, y);
  CHECK(q.r == doctest::Approx(2.0));
  CHECK(q.u[0] == 0.0);
  CHECK(q.last_sign == -1.0);

  const double zero[] = {0.0, 0.0};
  CHECK_THROWS_AS(to_polar(l2, zero), std::domain_error);
}

TEST_CASE("from_polar closed form for flat norms") {
  for (const double p : {0.7, 1.0, 2.0, 3.5}) {
    const LpTree tree = LpTree::flat(3, p);
    PolarPoint point;
    point.r = 2.0;
    point.u = {0.3, -0.4};
    point.last_sign = -1.0;
    const double un =
        std::pow(1.0 - std::pow(0.3, p) - std::pow(0.4, p), 1.0 / p);
    const std::vector<double> x = from_polar(tree, point);
    CHECK(x[0] == doctest::Approx(0.6));
    CHECK(x[1] == doctest::Approx(-0.8));
    CHECK(x[2] == doctest::Approx(-2.0 * un).epsilon(1e-12));
  }
}

TEST_CASE("pole point and out-of-body errors") {
  const LpTree tree = LpTree::parse("(2.0 0 (1.0 1 2))");
  PolarPoint pole;
  pole.r = 1.0;
  pole.u = {0.0, 0.0};
  pole.last_sign = 1.0;
  const std::vector<double> x = from_polar(tree, pole);
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
  CHECK(x[2] == doctest::Approx(1.0));

  PolarPoint outside;
  outside.r = 1.0;
  outside.u = {2.0, 0.0};
  outside.last_sign = 1.0;
  CHECK_THROWS_AS(from_polar(tree, outside), std::domain_error);
}

TEST_CASE("from_polar inverts to_polar on random points") {
  Rng rng(47);
  int done = 0;
  while (done < 1000) {
    const int n = 2 + done % 4;
    const LpTree tree = oracles::random_tree(rng, n);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& c : x) c = rng.uniform(-2.0, 2.0);
    const double f = evaluate(tree, x);
    // Keep a margin from the boundary u_n = 0, where the reconstruction
    // conditioning degrades without bound.
    if (std::fabs(x.back()) < 0.05 * f) continue;
    const PolarPoint p = to_polar(tree, x);
    const std::vector<double> back = from_polar(tree, p);
    for (int i = 0; i < n; ++i) {
      CHECK(std::fabs(back[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) <=
            1e-12 * std::max(1.0, p.r));
    }
    // The reconstructed direction lies on the unit sphere.
    std::vector<double> u_full = back;
    for (double& c : u_full) c /= p.r;
    CHECK(evaluate(tree, u_full) == doctest::Approx(1.0).epsilon(1e-10));
    ++done;
  }
}

TEST_CASE("nested-tree last coordinate agrees with a 1-d root finder") {
  const LpTree tree = LpTree::parse("(2.0 0 (1.0 1 2))");
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    // Interior directions of the projected body.
    const double u1 = rng.uniform(-0.6, 0.6);
    const double u2 = rng.uniform(-0.3, 0.3);
    const std::vector<double> u = {u1, u2};
    const double un = last_coordinate(tree, u);
    double lo = 0.0, hi = 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const std::vector<double> x = {u1, u2, mid};
      (evaluate(tree, x) < 1.0 ? lo : hi) = mid;
    }
    CHECK(un == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  }
}

TEST_CASE("flat-norm Jacobian closed form") {
  for (const double p : {0.8, 1.0, 2.0, 2.7}) {
    const LpTree tree = LpTree::flat(3, p);
    PolarPoint point;
    point.r = 1.7;
    point.u = {0.25, -0.35};
    point.last_sign = 1.0;
    const double expected =
        2.0 * std::log(1.7) +
        (1.0 - p) / p * std::log(1.0 - std::pow(0.25, p) - std::pow(0.35, p));
    CHECK(log_jacobian_det(tree, point) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("Example-3 tree: two explicit G factors") {
  const double p0 = 1.6, p1 = 0.9;
  const LpTree tree =
      LpTree::parse("(" + std::to_string(p0) + " 0 (" + std::to_string(p1) + " 1 2))");
  PolarPoint point;
  point.r = 1.0;
  point.u = {0.4, 0.3};
  point.last_sign = 1.0;
  const double g2 = std::pow(1.0 - std::pow(0.4, p0), (p1 - p0) / p0);
  const double g22 = std::pow(std::pow(1.0 - std::pow(0.4, p0), p1 / p0) - std::pow(0.3, p1),
                              (1.0 - p1) / p1);
  CHECK(log_jacobian_det(tree, point) ==
        doctest::Approx(std::log(g2) + std::log(g22)).epsilon(1e-12));
}

TEST_CASE("Jacobian against a numerically differentiated map") {
  Rng rng(59);
  int done = 0;
  while (done < 100) {
    const int n = 2 + done % 4;
    const LpTree tree = oracles::random_tree(rng, n);
    Rng sampler_rng = rng.fork();
    const Dataset ball = sample_uniform_ball(tree, sampler_rng, 1);
    std::vector<double> x(ball.row(0).begin(), ball.row(0).end());
    const PolarPoint p = to_polar(tree, x);
    // Interior points only: near the boundary the h = 1e-6 central
    // difference oracle itself loses accuracy.
    if (last_coordinate(tree, p.u) < 0.05) continue;
    const double ana = log_jacobian_det(tree, p);
    const double num = oracles::numerical_polar_logdet(tree, p);
    CHECK(std::fabs(ana - num) <= 1e-5 * std::max(1.0, std::fabs(num)));
    ++done;
  }
}

TEST_CASE("determinant ignores the last sign and scales in r") {
  Rng rng(61);
  const LpTree tree = oracles::random_tree(rng, 4);
  PolarPoint p;
  p.r = 1.0;
  p.u = {0.2, -0.1, 0.15};
  p.last_sign = 1.0;
  PolarPoint flipped = p;
  flipped.last_sign = -1.0;
  CHECK(std::fabs(log_jacobian_det(tree, p) - log_jacobian_det(tree, flipped)) < 1e-12);

  PolarPoint scaled = p;
  scaled.r = 3.0;
  CHECK(log_jacobian_det(tree, scaled) - log_jacobian_det(tree, p) ==
        doctest::Approx(3.0 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("simplified trees give matching determinants") {
  const LpTree tree = LpTree::parse("(1.5 (1.5 0 1) 2)");
  const LpTree reduced = tree.simplified(0.0);
  PolarPoint p;
  p.r = 0.8;
  p.u = {0.3, 0.2};
  p.last_sign = 1.0;
  CHECK(log_jacobian_det(tree, p) ==
        doctest::Approx(log_jacobian_det(reduced, p)).epsilon(1e-10));
}
