#include <doctest.h>

#include <cmath>
#include <vector>

#include "pnnp/rng.hpp"
#include "pnnp/stats.hpp"

using namespace pnnp;

TEST_CASE("derive_seed separates streams") {
  const std::uint64_t a = derive_seed(42, "row");
  const std::uint64_t b = derive_seed(42, "col");
  const std::uint64_t c = derive_seed(43, "row");
  CHECK(a != b);
  CHECK(a != c);
  CHECK(derive_seed(42, "row") == a);
}

TEST_CASE("uniform and normal moments") {
  RandomStream rng(7);
  const std::size_t n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.u01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sn / n == doctest::Approx(0.0).epsilon(1.0).scale(0.01));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("poisson mean and variance across regimes") {
  for (double lam : {0.5, 4.0, 25.0, 200.0}) {
    RandomStream rng(derive_seed(11, "poisson"));
    const std::size_t n = 200000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(lam));
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double v = s2 / n - m * m;
    CHECK(m == doctest::Approx(lam).epsilon(0.02));
    CHECK(v == doctest::Approx(lam).epsilon(0.03));
  }
}

TEST_CASE("poisson zero mean is degenerate") {
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS(rng.poisson(-1.0));
}

TEST_CASE("normal quantile inverts the CDF") {
  for (double x : {-6.0, -2.5, -1.0, -0.3, 0.0, 0.7, 1.0, 3.0, 5.5}) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("normal cdf against quadrature") {
  // Simpson integration of the standard normal density on [-10, 1]
  const double a = -10.0, b = 1.0;
  const int n = 20000;
  const double h = (b - a) / n;
  auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < n; ++i) s += pdf(a + i * h) * (i % 2 ? 4.0 : 2.0);
  const double integral = s * h / 3.0;
  CHECK(normal_cdf(1.0) == doctest::Approx(integral).epsilon(1e-10));
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}

TEST_CASE("r_squared exact on affine data") {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v - 7.0);
  CHECK(r_squared(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-7.0).epsilon(1e-12));
}
