#ifndef PNNP_SORTED_SAMPLES_HPP
#define PNNP_SORTED_SAMPLES_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pnnp {

/// Ascending sample values plus the permutation back to the original order
/// (permutation[sorted_pos] = original index). Sorting is stable, so ties
/// keep a fixed, reproducible bracket structure.
struct SortedSamples {
  std::vector<double> values;
  std::vector<std::size_t> permutation;

  static SortedSamples from(std::span<const double> samples);
  std::size_t size() const { return values.size(); }
};

/// Sparse derivative of one query result with respect to the sorted sample
/// values: at most the two bracketing entries are touched.
struct QueryGrad {
  std::size_t index[2] = {0, 0};
  double weight[2] = {0.0, 0.0};
  int count = 0;
};

/// Interpolated empirical CDF: with q_1..q_n the sorted values and i the
/// smallest index with q_i > q,  p = (i - (q_i - q)/(q_i - q_{i-1}))/n.
/// Below the minimum the result is 0; at or above the maximum it is 1.
double ecdf_query(const SortedSamples& s, double q);
double ecdf_query_grad(const SortedSamples& s, double q, QueryGrad& grad);

/// Piecewise-linear inverse of ecdf_query on [q_1, q_n]: for p in
/// [i/n, (i+1)/n],  q = q_i + (p*n - i)*(q_{i+1} - q_i); exact at sample
/// points. p must lie in (0, 1]; p <= 1/n maps to the minimum sample.
double quantile_query(const SortedSamples& s, double p);
double quantile_query_grad(const SortedSamples& s, double p, QueryGrad& grad);

}  // namespace pnnp

#endif  // PNNP_SORTED_SAMPLES_HPP
