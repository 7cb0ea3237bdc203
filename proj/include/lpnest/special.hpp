#pragma once

namespace lpnest {

// Natural log of the Gamma function, x > 0.
double log_gamma(double x);

// Digamma function Psi(x) = d/dx log Gamma(x), x > 0.
double digamma(double x);

// Trigamma function Psi'(x), x > 0.
double trigamma(double x);

// log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b).
double log_beta(double a, double b);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double reg_inc_gamma_P(double a, double x);

// Inverse of P(a, .) in x: returns x with P(a, x) = q, q in [0, 1].
// Newton iteration on the log CDF with a bisection fallback, capped at 60
// iterations. Round-trip accuracy holds for q in the normal double range;
// subnormal q loses precision in the forward value itself.
double inv_reg_inc_gamma_P(double a, double q);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double reg_inc_beta(double a, double b, double x);

// Standard normal CDF and its inverse.
double std_normal_cdf(double z);
double std_normal_quantile(double q);

}  // namespace lpnest
