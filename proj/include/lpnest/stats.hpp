#pragma once

#include <functional>
#include <span>

namespace lpnest {

// Kolmogorov-Smirnov distance between the empirical CDF of the samples
// and a reference CDF. Sorts a copy of the input.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Asymptotic critical value c(alpha)/sqrt(m) with c = sqrt(-ln(alpha/2)/2);
// alpha = 0.01 gives 1.6276/sqrt(m).
double ks_critical(std::size_t m, double alpha);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace lpnest
