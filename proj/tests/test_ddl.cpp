#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pnnp/distribution_loss.hpp"
#include "pnnp/rng.hpp"
#include "pnnp/sorted_samples.hpp"
#include "pnnp/stats.hpp"

using namespace pnnp;

namespace {

/// Independent oracle: counting plus interpolation by linear scan, written
/// from the interpolation formula alone (no binary search, no shared code).
double ecdf_oracle(const std::vector<double>& unsorted, double q) {
  std::vector<double> v = unsorted;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  if (q < v.front()) return 0.0;
  if (q >= v.back()) return 1.0;
  std::size_t i = 0;  // 1-based smallest index with v[i] > q
  while (i < v.size() && !(v[i] > q)) ++i;
  const double qi = v[i], qim1 = v[i - 1];
  return ((static_cast<double>(i) + 1.0) - (qi - q) / (qi - qim1)) / n;
}

std::vector<double> random_samples(RandomStream& rng, std::size_t n, bool with_ties) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal() * 3.0;
  if (with_ties && n > 3) {
    v[1] = v[0];
    v[n / 2] = v[n / 2 - 1];
  }
  return v;
}

}  // namespace

TEST_CASE("ecdf interpolation on the worked three-sample example") {
  const std::vector<double> data = {-1.0, 0.0, 2.0};
  const SortedSamples s = SortedSamples::from(data);
  CHECK(ecdf_query(s, 1.0) == doctest::Approx(2.5 / 3.0).epsilon(1e-12));
  CHECK(ecdf_query(s, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(ecdf_query(s, -1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(ecdf_query(s, -1.5) == 0.0);
  CHECK(ecdf_query(s, 2.0) == 1.0);
  CHECK(ecdf_query(s, 5.0) == 1.0);
}

TEST_CASE("quantile interpolation on the worked example") {
  const std::vector<double> data = {-1.0, 0.0, 2.0};
  const SortedSamples s = SortedSamples::from(data);
  CHECK(quantile_query(s, 2.0 / 3.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(quantile_query(s, 5.0 / 6.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quantile_query(s, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(quantile_query(s, 0.2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS(quantile_query(s, 0.0));
  CHECK_THROWS(quantile_query(s, 1.1));
}

TEST_CASE("quantile inverts the ecdf strictly inside the support") {
  RandomStream rng(5);
  std::vector<double> data(64);
  for (double& v : data) v = rng.normal();
  const SortedSamples s = SortedSamples::from(data);
  const double lo = *std::min_element(data.begin(), data.end());
  const double hi = *std::max_element(data.begin(), data.end());
  for (int i = 0; i < 500; ++i) {
    const double q = lo + (hi - lo) * (0.001 + 0.998 * rng.u01());
    const double p = ecdf_query(s, q);
    CHECK(quantile_query(s, p) == doctest::Approx(q).epsilon(1e-9));
  }
}

TEST_CASE("ecdf is monotone with range [0,1]") {
  RandomStream rng(6);
  const std::vector<double> data = random_samples(rng, 40, true);
  const SortedSamples s = SortedSamples::from(data);
  double prev = -1.0;
  for (double q = -12.0; q <= 12.0; q += 0.05) {
    const double p = ecdf_query(s, q);
    CHECK(p >= prev);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("ecdf agrees with the counting oracle on random cases") {
  RandomStream rng(7);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t n = 1 + rng.next_u64() % 128;
    const std::vector<double> data = random_samples(rng, n, rep % 3 == 0);
    const SortedSamples s = SortedSamples::from(data);
    for (int k = 0; k < 5; ++k) {
      double q;
      if (k == 0)
        q = data[rng.next_u64() % n];  // exactly at a sample
      else
        q = rng.normal() * 4.0;
      const double got = ecdf_query(s, q);
      const double want = ecdf_oracle(data, q);
      CHECK(std::abs(got - want) <= 1e-12);
    }
  }
}

TEST_CASE("sample_queries degenerate and clipping contracts") {
  RandomStream rng(8);
  SUBCASE("zero perturbation gives the deterministic grid") {
    const std::size_t n = 33;
    const QuerySet qs = sample_queries(n, 2.0, 0.0, 6.0, rng);
    for (std::size_t k = 1; k <= n; ++k) {
      const double u = static_cast<double>(k) / (n + 1.0);
      CHECK(qs.cdf_queries[k - 1] ==
            doctest::Approx(2.0 * normal_quantile(u)).epsilon(1e-12));
      CHECK(qs.quantile_queries[k - 1] == doctest::Approx(u).epsilon(1e-9));
    }
  }
  SUBCASE("cdf queries always respect the clip") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RandomStream r(seed);
      const QuerySet qs = sample_queries(500, 3.0, 2.0, 6.0, r);
      for (double q : qs.cdf_queries) CHECK(std::abs(q) <= 6.0 * 3.0 + 1e-12);
      for (double p : qs.quantile_queries) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
      }
    }
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS(sample_queries(1, 1.0, 0.0, 6.0, rng));
    CHECK_THROWS(sample_queries(16, 1.0, 0.0, -1.0, rng));
    CHECK_THROWS(sample_queries(16, 0.0, 0.0, 6.0, rng));
  }
}

TEST_CASE("loss vanishes when out equals real") {
  RandomStream rng(9);
  const std::vector<double> data = random_samples(rng, 128, false);
  const SortedSamples real = SortedSamples::from(data);
  const QuerySet qs = sample_queries(200, stddev(data), 0.3, 6.0, rng);
  const DdlResult r = ddl_loss(data, real, qs);
  CHECK(r.total == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  for (double g : r.grad) CHECK(g == 0.0);
}

TEST_CASE("quantile loss of a pure shift is N times the shift") {
  RandomStream rng(10);
  std::vector<double> data = random_samples(rng, 256, false);
  const SortedSamples real = SortedSamples::from(data);
  const double c = 0.37;
  std::vector<double> shifted;
  for (double v : data) shifted.push_back(v + c);

  QuerySet qs = sample_queries(333, stddev(data), 0.3, 6.0, rng);
  qs.cdf_queries.clear();  // quantile term only
  const DdlResult r = ddl_loss(shifted, real, qs);
  CHECK(r.cdf_term == 0.0);
  CHECK(r.quantile_term == doctest::Approx(333.0 * c).epsilon(1e-9));
}

TEST_CASE("loss is invariant under permutations of out") {
  RandomStream rng(11);
  std::vector<double> out = random_samples(rng, 100, false);
  const std::vector<double> data = random_samples(rng, 90, false);
  const SortedSamples real = SortedSamples::from(data);
  const QuerySet qs = sample_queries(150, stddev(data), 0.5, 6.0, rng);
  const DdlResult r1 = ddl_loss(out, real, qs);
  std::reverse(out.begin(), out.end());
  std::swap(out[3], out[57]);
  const DdlResult r2 = ddl_loss(out, real, qs);
  CHECK(r1.total == doctest::Approx(r2.total).epsilon(1e-13));
}

TEST_CASE("per-query gradient touches at most two samples") {
  RandomStream rng(12);
  const std::vector<double> out = random_samples(rng, 64, false);
  const std::vector<double> data = random_samples(rng, 64, false);
  const SortedSamples real = SortedSamples::from(data);
  QuerySet qs;
  qs.cdf_queries = {0.123};
  DdlResult r = ddl_loss(out, real, qs);
  CHECK(std::count_if(r.grad.begin(), r.grad.end(),
                      [](double g) { return g != 0.0; }) <= 2);
  qs.cdf_queries.clear();
  qs.quantile_queries = {0.37};
  r = ddl_loss(out, real, qs);
  CHECK(std::count_if(r.grad.begin(), r.grad.end(),
                      [](double g) { return g != 0.0; }) <= 2);
}

TEST_CASE("analytic sample gradients match central differences") {
  RandomStream rng(13);
  std::vector<double> out = random_samples(rng, 64, false);
  const std::vector<double> data = random_samples(rng, 64, false);
  const SortedSamples real = SortedSamples::from(data);
  const double sigma = stddev(data);
  const QuerySet qs = sample_queries(128, sigma, 0.5, 6.0, rng);

  const DdlResult base = ddl_loss(out, real, qs);
  const double eps = 1e-4 * sigma;

  // The CDF term is rational in the bracketing samples, so the central
  // difference carries (eps/gap)^2 curvature error. A sample sitting in a
  // bracket narrower than 100*eps counts as a near-kink point and is skipped.
  std::vector<double> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  auto near_narrow_bracket = [&](double x) {
    for (double q : qs.cdf_queries) {
      const auto ub = std::upper_bound(sorted.begin(), sorted.end(), q);
      if (ub == sorted.begin() || ub == sorted.end()) continue;
      if (*ub == x || *(ub - 1) == x) {
        if (*ub - *(ub - 1) < 100.0 * eps) return true;
      }
    }
    return false;
  };

  double max_rel = 0.0;
  int checked = 0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (near_narrow_bracket(out[j])) continue;
    const double saved = out[j];
    out[j] = saved + eps;
    const DdlResult plus = ddl_loss(out, real, qs, false);
    out[j] = saved - eps;
    const DdlResult minus = ddl_loss(out, real, qs, false);
    out[j] = saved;
    if (plus.kink_signature != minus.kink_signature) continue;  // crossed a kink
    const double fd = (plus.total - minus.total) / (2.0 * eps);
    const double denom = std::max(std::abs(fd), std::abs(base.grad[j]));
    if (denom < 1e-9) continue;
    max_rel = std::max(max_rel, std::abs(fd - base.grad[j]) / denom);
    ++checked;
  }
  CHECK(checked > 30);
  CHECK(max_rel < 1e-4);
}
