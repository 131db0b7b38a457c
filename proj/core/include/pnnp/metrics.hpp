#ifndef PNNP_METRICS_HPP
#define PNNP_METRICS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnnp {

/// Discrete KL divergence KL(a || b) over shared bins covering both sample
/// supports. Bin width defaults to 0.1 * stddev(a); each bin gets 0.1
/// pseudo-counts of smoothing. Identical sample sets give exactly 0.
double kld(std::span<const double> samples_a, std::span<const double> samples_b,
           double bin_width = 0.0);

/// R^2 of the least-squares line through paired sample quantiles at
/// u = k/(n_quantiles+1). Affine-invariant; 1 when the distributions agree
/// up to an affine map. Returns nullopt for degenerate (zero-variance) input.
std::optional<double> qq_r2(std::span<const double> samples_a,
                            std::span<const double> samples_b,
                            int n_quantiles = 1000);

/// R^2 of the ordered samples against standard-normal quantiles at
/// (i - 0.5)/n. Needs >= 30 samples; returns -1 when degenerate.
double gaussian_probplot_r2(std::span<const double> samples);

struct DistributionReport {
  double kld = 0.0;
  std::optional<double> qq_r2;
  std::optional<double> probplot_r2_a;  // normality of the reference samples
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::vector<double> bin_centers;
  std::vector<double> density_a;
  std::vector<double> density_b;
  std::vector<double> qq_u;
  std::vector<double> qq_quantile_a;
  std::vector<double> qq_quantile_b;
};

DistributionReport compare_distributions(std::span<const double> samples_a,
                                         std::span<const double> samples_b,
                                         double bin_width = 0.0,
                                         int n_quantiles = 1000);

/// Writes hist.csv (bin_center, density_a, density_b), qq.csv
/// (u, quantile_a, quantile_b) and summary.csv
/// (kld, qq_r2, probplot_r2, n_a, n_b) into the directory.
void emit_report(const DistributionReport& report, const std::string& dir);

}  // namespace pnnp

#endif  // PNNP_METRICS_HPP
