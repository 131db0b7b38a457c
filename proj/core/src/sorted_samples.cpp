#include "pnnp/sorted_samples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pnnp {

SortedSamples SortedSamples::from(std::span<const double> samples) {
  if (samples.empty())
    throw std::invalid_argument("SortedSamples: empty sample set");
  SortedSamples s;
  s.permutation.resize(samples.size());
  std::iota(s.permutation.begin(), s.permutation.end(), std::size_t{0});
  std::stable_sort(s.permutation.begin(), s.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
  s.values.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    s.values[i] = samples[s.permutation[i]];
  return s;
}

double ecdf_query(const SortedSamples& s, double q) {
  QueryGrad g;
  return ecdf_query_grad(s, q, g);
}

double ecdf_query_grad(const SortedSamples& s, double q, QueryGrad& grad) {
  grad.count = 0;
  const auto& v = s.values;
  const double n = static_cast<double>(v.size());
  if (q < v.front()) return 0.0;
  if (q >= v.back()) return 1.0;
  // first index (0-based) with value > q; the two cases above guarantee
  // 1 <= ub <= n-1
  const std::size_t ub =
      static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), q) - v.begin());
  const double qi = v[ub];
  const double qim1 = v[ub - 1];
  const double b = qi - qim1;  // > 0 since qim1 <= q < qi
  const double p = (static_cast<double>(ub + 1) - (qi - q) / b) / n;
  grad.count = 2;
  grad.index[0] = ub;
  grad.weight[0] = -(q - qim1) / (n * b * b);
  grad.index[1] = ub - 1;
  grad.weight[1] = -(qi - q) / (n * b * b);
  return p;
}

double quantile_query(const SortedSamples& s, double p) {
  QueryGrad g;
  return quantile_query_grad(s, p, g);
}

double quantile_query_grad(const SortedSamples& s, double p, QueryGrad& grad) {
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("quantile_query: p must be in (0,1]");
  grad.count = 0;
  const auto& v = s.values;
  const std::size_t n = v.size();
  const double pn = p * static_cast<double>(n);
  if (pn <= 1.0 || n == 1) {
    grad.count = 1;
    grad.index[0] = 0;
    grad.weight[0] = 1.0;
    return v.front();
  }
  std::size_t i = static_cast<std::size_t>(pn);  // 1-based sample index
  if (i >= n) i = n - 1;
  const double frac = pn - static_cast<double>(i);
  grad.count = 2;
  grad.index[0] = i - 1;
  grad.weight[0] = 1.0 - frac;
  grad.index[1] = i;
  grad.weight[1] = frac;
  return v[i - 1] + frac * (v[i] - v[i - 1]);
}

}  // namespace pnnp
