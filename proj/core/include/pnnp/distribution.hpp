#ifndef PNNP_DISTRIBUTION_HPP
#define PNNP_DISTRIBUTION_HPP

#include <string>
#include <vector>

#include "pnnp/rng.hpp"

namespace pnnp {

/// Parametric scalar distribution with an exact, evaluable CDF.
/// A Gaussian mixture covers every family used by the virtual sensor; a
/// single Gaussian is a one-component mixture.
class GaussianMixture {
 public:
  struct Component {
    double weight = 1.0;
    double mu = 0.0;
    double sigma = 1.0;
  };

  GaussianMixture() = default;
  explicit GaussianMixture(std::vector<Component> components);

  static GaussianMixture single(double mu, double sigma);

  /// The default long-tailed family: weight 0.95 at sigma, 0.05 at 5*sigma,
  /// both zero-mean.
  static GaussianMixture long_tailed(double sigma);

  double cdf(double x) const;
  double pdf(double x) const;
  double sample(RandomStream& rng) const;
  /// Inverse CDF by bisection on the exact CDF; p in (0,1).
  double quantile(double p) const;

  double mean() const;
  double std_dev() const;

  /// Mixture with every mu and sigma multiplied by s.
  GaussianMixture scaled(double s) const;

  const std::vector<Component>& components() const { return components_; }

 private:
  std::vector<Component> components_;
};

}  // namespace pnnp

#endif  // PNNP_DISTRIBUTION_HPP
