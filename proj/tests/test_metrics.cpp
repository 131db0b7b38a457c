#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "pnnp/distribution.hpp"
#include "pnnp/metrics.hpp"
#include "pnnp/rng.hpp"
#include "pnnp/stats.hpp"

using namespace pnnp;
namespace fs = std::filesystem;

namespace {

std::vector<double> gaussian_draws(double mu, double sigma, std::size_t n,
                                   std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = mu + sigma * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("kld of identical sample sets is zero") {
  const auto a = gaussian_draws(0, 1, 5000, 3);
  CHECK(kld(a, a, 0.1) == 0.0);
}

TEST_CASE("kld of two draws from the same gaussian is tiny") {
  const auto a = gaussian_draws(0, 1, 1000000, 5);
  const auto b = gaussian_draws(0, 1, 1000000, 6);
  CHECK(kld(a, b, 0.1) < 0.002);
}

TEST_CASE("kld matches the closed form for shifted gaussians") {
  // KL(N(0,1) || N(0.5,1)) = 0.5^2/2 = 0.125
  const auto a = gaussian_draws(0, 1, 1000000, 7);
  const auto b = gaussian_draws(0.5, 1, 1000000, 8);
  CHECK(kld(a, b, 0.1) == doctest::Approx(0.125).epsilon(0.15));
}

TEST_CASE("kld argument checks") {
  const auto a = gaussian_draws(0, 1, 100, 9);
  CHECK_THROWS(kld(a, a, -0.5));
  CHECK_THROWS(kld({}, a, 0.1));
}

TEST_CASE("qq_r2 identity and affine invariance") {
  const auto a = gaussian_draws(0, 2, 20000, 11);
  CHECK(*qq_r2(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> b;
  for (double v : a) b.push_back(2.0 * v + 3.0);
  CHECK(*qq_r2(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("qq_r2 degenerate input reported absent") {
  std::vector<double> flat(100, 1.25);
  const auto a = gaussian_draws(0, 1, 100, 12);
  CHECK(!qq_r2(flat, a).has_value());
  CHECK_THROWS(qq_r2(a, a, 5));
}

TEST_CASE("qq_r2 separates gaussian fit from the long-tailed mixture") {
  RandomStream rng(13);
  const GaussianMixture mix = GaussianMixture::long_tailed(2.0);
  std::vector<double> target(300000);
  for (double& v : target) v = mix.sample(rng);
  // gaussian baseline fitted to the target moments
  const auto baseline = gaussian_draws(mean(target), stddev(target), 300000, 14);
  CHECK(*qq_r2(target, baseline) < 0.99);
  // matched mixture draws agree
  std::vector<double> again(300000);
  for (double& v : again) v = mix.sample(rng);
  CHECK(*qq_r2(target, again) > 0.99);
}

TEST_CASE("gaussian probplot r2") {
  SUBCASE("exact gaussian quantile grid scores 1") {
    std::vector<double> v(500);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = normal_quantile((static_cast<double>(i) + 0.5) / v.size());
    CHECK(gaussian_probplot_r2(v) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("long-tailed mixture scores below 0.99 at 1e5 samples") {
    RandomStream rng(15);
    const GaussianMixture mix = GaussianMixture::long_tailed(1.0);
    std::vector<double> v(100000);
    for (double& x : v) x = mix.sample(rng);
    CHECK(gaussian_probplot_r2(v) < 0.99);
  }
  SUBCASE("too few samples rejected") {
    std::vector<double> v(10, 0.0);
    CHECK_THROWS(gaussian_probplot_r2(v));
  }
}

TEST_CASE("emit_report round trip and schema") {
  const auto a = gaussian_draws(0, 1, 20000, 21);
  const auto b = gaussian_draws(0.2, 1.1, 20000, 22);
  const DistributionReport rep = compare_distributions(a, b);

  const fs::path dir = fs::temp_directory_path() / "pnnp_report_test";
  emit_report(rep, dir.string());

  std::ifstream hist(dir / "hist.csv");
  std::string line;
  std::getline(hist, line);
  CHECK(line == "bin_center,density_a,density_b");
  std::size_t rows = 0;
  double da_sum = 0.0;
  while (std::getline(hist, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    da_sum += std::stod(cell);
    ++rows;
  }
  CHECK(rows == rep.bin_centers.size());
  CHECK(da_sum == doctest::Approx(1.0).epsilon(1e-9));  // densities sum to 1

  std::ifstream qq(dir / "qq.csv");
  std::getline(qq, line);
  CHECK(line == "u,quantile_a,quantile_b");

  std::ifstream summary(dir / "summary.csv");
  std::getline(summary, line);
  CHECK(line == "kld,qq_r2,probplot_r2,n_a,n_b");
  std::getline(summary, line);
  std::stringstream ss(line);
  std::string cell;
  std::getline(ss, cell, ',');
  // summary value equals an independent recomputation
  CHECK(std::stod(cell) == doctest::Approx(kld(a, b)).epsilon(1e-12));
  std::getline(ss, cell, ',');
  CHECK(std::stod(cell) == doctest::Approx(*rep.qq_r2).epsilon(1e-9));
}
