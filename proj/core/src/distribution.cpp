#include "pnnp/distribution.hpp"

#include <cmath>
#include <stdexcept>

#include "pnnp/stats.hpp"

namespace pnnp {

GaussianMixture::GaussianMixture(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw std::invalid_argument("mixture: needs at least one component");
  double wsum = 0.0;
  for (const auto& c : components_) {
    if (c.weight <= 0.0) throw std::invalid_argument("mixture: weights must be > 0");
    if (c.sigma < 0.0) throw std::invalid_argument("mixture: sigma must be >= 0");
    wsum += c.weight;
  }
  for (auto& c : components_) c.weight /= wsum;
}

GaussianMixture GaussianMixture::single(double mu, double sigma) {
  return GaussianMixture({{1.0, mu, sigma}});
}

GaussianMixture GaussianMixture::long_tailed(double sigma) {
  return GaussianMixture({{0.95, 0.0, sigma}, {0.05, 0.0, 5.0 * sigma}});
}

double GaussianMixture::cdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) {
    if (c.sigma == 0.0)
      p += c.weight * (x >= c.mu ? 1.0 : 0.0);
    else
      p += c.weight * normal_cdf((x - c.mu) / c.sigma);
  }
  return p;
}

double GaussianMixture::pdf(double x) const {
  double d = 0.0;
  for (const auto& c : components_) {
    if (c.sigma == 0.0) continue;
    const double z = (x - c.mu) / c.sigma;
    d += c.weight * std::exp(-0.5 * z * z) / (c.sigma * std::sqrt(2.0 * M_PI));
  }
  return d;
}

double GaussianMixture::sample(RandomStream& rng) const {
  double u = rng.u01();
  for (const auto& c : components_) {
    if (u < c.weight || &c == &components_.back())
      return c.mu + c.sigma * rng.normal();
    u -= c.weight;
  }
  return components_.back().mu;  // unreachable
}

double GaussianMixture::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("mixture quantile: p must be in (0,1)");
  // bracket: widest component covers the tails
  double lo = 0.0, hi = 0.0;
  for (const auto& c : components_) {
    lo = std::min(lo, c.mu - 40.0 * std::max(c.sigma, 1e-30));
    hi = std::max(hi, c.mu + 40.0 * std::max(c.sigma, 1e-30));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double GaussianMixture::mean() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.mu;
  return m;
}

double GaussianMixture::std_dev() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& c : components_)
    v += c.weight * (c.sigma * c.sigma + (c.mu - m) * (c.mu - m));
  return std::sqrt(v);
}

GaussianMixture GaussianMixture::scaled(double s) const {
  std::vector<Component> out = components_;
  for (auto& c : out) {
    c.mu *= s;
    c.sigma *= std::abs(s);
  }
  return GaussianMixture(std::move(out));
}

}  // namespace pnnp
