#include "pnnp/distribution_loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnnp/stats.hpp"

namespace pnnp {

namespace {

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline void mix_signature(std::uint64_t& h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

constexpr double kProbabilityFloor = 1e-12;

}  // namespace

QuerySet sample_queries(std::size_t count, double scale, double perturb_std,
                        double clip, RandomStream& rng) {
  if (count < 2) throw std::invalid_argument("sample_queries: count must be >= 2");
  if (clip <= 0.0) throw std::invalid_argument("sample_queries: clip must be > 0");
  if (scale <= 0.0) throw std::invalid_argument("sample_queries: scale must be > 0");
  if (perturb_std < 0.0)
    throw std::invalid_argument("sample_queries: perturb_std must be >= 0");

  QuerySet qs;
  qs.cdf_queries.resize(count);
  qs.quantile_queries.resize(count);
  const double bound = clip * scale;
  for (std::size_t k = 1; k <= count; ++k) {
    const double u = static_cast<double>(k) / (static_cast<double>(count) + 1.0);
    const double z = normal_quantile(u);
    double q = z * scale;
    double zp = z;
    if (perturb_std > 0.0) {
      q += rng.normal() * perturb_std * scale;
      zp += rng.normal() * perturb_std;
    }
    qs.cdf_queries[k - 1] = std::clamp(q, -bound, bound);
    qs.quantile_queries[k - 1] =
        std::clamp(normal_cdf(zp), kProbabilityFloor, 1.0 - kProbabilityFloor);
  }
  return qs;
}

DdlResult ddl_loss(std::span<const double> out, const SortedSamples& real,
                   const QuerySet& queries, bool with_grad) {
  if (out.empty()) throw std::invalid_argument("ddl_loss: empty output sample set");
  const SortedSamples sorted_out = SortedSamples::from(out);
  const std::size_t n_out = sorted_out.size();

  DdlResult res;
  std::vector<double> sorted_grad;
  if (with_grad) sorted_grad.assign(n_out, 0.0);

  // The signature hashes the ORIGINAL indices of each query's bracketing
  // samples plus the subgradient sign: a perturbed sample exchanging sorted
  // places with a neighbor keeps the sorted bracket positions but moves the
  // gradient to a different sample, and must register as a kink crossing.
  QueryGrad g;
  auto mix_brackets = [&](const QueryGrad& qg, double s, std::uint64_t salt) {
    std::uint64_t v = salt * 8ULL + static_cast<std::uint64_t>(s + 1.0);
    mix_signature(res.kink_signature, v);
    for (int i = 0; i < qg.count; ++i)
      mix_signature(res.kink_signature, sorted_out.permutation[qg.index[i]]);
  };
  for (double q : queries.cdf_queries) {
    const double f_out = ecdf_query_grad(sorted_out, q, g);
    const double f_real = ecdf_query(real, q);
    const double diff = f_out - f_real;
    res.cdf_term += std::abs(diff);
    const double s = sign_of(diff);
    mix_brackets(g, s, 0);
    if (with_grad && s != 0.0)
      for (int i = 0; i < g.count; ++i) sorted_grad[g.index[i]] += s * g.weight[i];
  }

  const double eps =
      1.0 / (2.0 * static_cast<double>(std::min(n_out, real.size())));
  for (double p : queries.quantile_queries) {
    const double pc = std::clamp(p, eps, 1.0 - eps);
    const double q_out = quantile_query_grad(sorted_out, pc, g);
    const double q_real = quantile_query(real, pc);
    const double diff = q_out - q_real;
    res.quantile_term += std::abs(diff);
    const double s = sign_of(diff);
    mix_brackets(g, s, 1);
    if (with_grad && s != 0.0)
      for (int i = 0; i < g.count; ++i) sorted_grad[g.index[i]] += s * g.weight[i];
  }

  res.total = res.cdf_term + res.quantile_term;
  if (with_grad) {
    res.grad.assign(out.size(), 0.0);
    for (std::size_t i = 0; i < n_out; ++i)
      res.grad[sorted_out.permutation[i]] = sorted_grad[i];
  }
  return res;
}

}  // namespace pnnp
