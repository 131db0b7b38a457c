#ifndef PNNP_DISTRIBUTION_LOSS_HPP
#define PNNP_DISTRIBUTION_LOSS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pnnp/rng.hpp"
#include "pnnp/sorted_samples.hpp"

namespace pnnp {

/// CDF-value and quantile-probability query points for the distribution loss.
struct QuerySet {
  std::vector<double> cdf_queries;       // DN
  std::vector<double> quantile_queries;  // probabilities strictly in (0,1)
};

/// Baseline: the uniform grid u_k = k/(count+1) mapped onto the standard
/// normal. CDF queries are scale * z_k plus Gaussian perturbation of
/// perturb_std * scale, clipped to +-clip * scale; quantile queries perturb
/// z_k by perturb_std in normal-score space and map back through the normal
/// CDF, which keeps them strictly inside (0,1).
QuerySet sample_queries(std::size_t count, double scale, double perturb_std,
                        double clip, RandomStream& rng);

struct DdlResult {
  double total = 0.0;
  double cdf_term = 0.0;
  double quantile_term = 0.0;
  /// d total / d out[j], original sample order (empty when not requested).
  std::vector<double> grad;
  /// Hash of the bracket structure and subgradient signs of every query;
  /// finite-difference checks compare signatures to detect kink crossings.
  std::uint64_t kink_signature = 0;
};

/// L_cdf = sum_k |F_out(q_k) - F_real(q_k)|,
/// L_quantile = sum_k |F_out^-1(p_k) - F_real^-1(p_k)|, total = sum of both.
/// The real side is a constant (no gradient). Quantile probabilities are
/// clamped to [1/(2n), 1 - 1/(2n)] with n the smaller sample count. At exact
/// |.| kinks the subgradient is taken as zero.
DdlResult ddl_loss(std::span<const double> out, const SortedSamples& real,
                   const QuerySet& queries, bool with_grad = true);

}  // namespace pnnp

#endif  // PNNP_DISTRIBUTION_LOSS_HPP
