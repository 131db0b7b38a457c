#ifndef PNNP_STATS_HPP
#define PNNP_STATS_HPP

#include <cstddef>
#include <span>

namespace pnnp {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (inverse CDF), p in (0, 1).
/// Acklam's rational approximation refined with one Halley step; accurate to
/// a few ulps over the full open interval.
double normal_quantile(double p);

double mean(std::span<const double> v);

/// Sample standard deviation (ddof = 1); 0 for fewer than two values.
double stddev(std::span<const double> v);

/// Population variance (ddof = 0).
double variance_population(std::span<const double> v);

/// Squared Pearson correlation of the pairs (x_i, y_i); the R^2 of the
/// least-squares line. Returns -1 when either side is degenerate.
double r_squared(std::span<const double> x, std::span<const double> y);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace pnnp

#endif  // PNNP_STATS_HPP
