#ifndef PNNP_RNG_HPP
#define PNNP_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace pnnp {

/// Derive a child seed from a master seed and a stream label.
/// Same (seed, label) always yields the same child; different labels give
/// statistically independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// Deterministic random stream. All randomness in the toolkit flows through
/// this class so that results are reproducible across compilers and standard
/// libraries (std::normal_distribution et al. are implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Child stream for an independent sub-task.
  RandomStream fork(std::string_view label) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double u01();

  /// Uniform in (0, 1].
  double u01_open_low();

  /// Standard normal draw (Box-Muller, pairs cached).
  double normal();

  /// Poisson draw with the given mean. Exact sampler: multiplication method
  /// for small means, transformed rejection (PTRS) for large ones.
  std::int64_t poisson(double mean);

  void fill_normal(std::vector<double>& out, std::size_t count);

 private:
  std::uint64_t state_;
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace pnnp

#endif  // PNNP_RNG_HPP
