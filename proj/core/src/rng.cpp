#include "pnnp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pnnp {

namespace {

// splitmix64; also used to scramble label hashes into the master seed.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  std::uint64_t x = master ^ (0x6a09e667f3bcc909ULL + fnv1a(label));
  std::uint64_t s = splitmix64(x);
  s ^= splitmix64(x);
  return s;
}

RandomStream::RandomStream(std::uint64_t seed) : state_(seed), seed_(seed) {
  // warm up so that nearby seeds decorrelate immediately
  for (int i = 0; i < 4; ++i) splitmix64(state_);
}

RandomStream RandomStream::fork(std::string_view label) const {
  return RandomStream(derive_seed(seed_, label));
}

std::uint64_t RandomStream::next_u64() { return splitmix64(state_); }

double RandomStream::u01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::u01_open_low() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = u01_open_low();
  const double u2 = u01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  cached_normal_ = r * std::sin(kTwoPi * u2);
  has_cached_normal_ = true;
  return r * std::cos(kTwoPi * u2);
}

void RandomStream::fill_normal(std::vector<double>& out, std::size_t count) {
  out.resize(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = normal();
}

std::int64_t RandomStream::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean))
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // multiplication method (Knuth)
    const double enlam = std::exp(-mean);
    std::int64_t k = 0;
    double prod = u01();
    while (prod > enlam) {
      ++k;
      prod *= u01();
    }
    return k;
  }
  // PTRS transformed rejection (Hoermann 1993)
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = u01() - 0.5;
    const double v = u01_open_low();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        kf * loglam - mean - std::lgamma(kf + 1.0)) {
      return static_cast<std::int64_t>(kf);
    }
  }
}

}  // namespace pnnp
