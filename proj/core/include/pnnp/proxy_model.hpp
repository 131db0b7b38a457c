#ifndef PNNP_PROXY_MODEL_HPP
#define PNNP_PROXY_MODEL_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pnnp/rng.hpp"

namespace pnnp {

inline constexpr int kProxyChannels = 16;

/// Per-pixel (1x1) linear layer: out = W x + b applied to each pixel's
/// channel vector independently.
struct PixelLinear {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;  // out

  std::size_t parameter_count() const { return w.size() + b.size(); }
};

/// h + second(swish(first(h))); the second linear starts at zero so the
/// block is the identity at initialization.
struct ResidualBlock {
  PixelLinear first;
  PixelLinear second;
};

struct ProxyBranch {
  PixelLinear lift;  // 1 -> 16
  ResidualBlock block1;
  ResidualBlock block2;
  PixelLinear proj;  // 16 -> 1

  std::size_t parameter_count() const;
};

/// ISO-aware dual-branch per-pixel network:
///   out = g(iso) * dep(n1) + indep(n2),
/// with a learnable scalar gain LUT entry per calibrated ISO.
struct ProxyModel {
  ProxyBranch dep;
  ProxyBranch indep;
  std::vector<int> isos;         // ascending
  std::vector<double> gain_lut;  // aligned with isos
  std::uint64_t init_seed = 0;

  std::size_t parameter_count() const;
  int lut_index(int iso) const;  // -1 when absent
  /// Gain at any ISO; uncalibrated ISOs use log-log interpolation over the
  /// LUT (clamped at the ends) when interpolate is set, otherwise throw.
  double gain_at(int iso, bool interpolate) const;
};

/// Deterministic per seed. The LUT starts at the calibrated K(iso) exactly;
/// branch affine paths are normalized so dep(x) = x and indep(x) = 0.1*x at
/// init (residual projections start at zero), giving the dep branch
/// unit-variance output per unit gain.
ProxyModel init_model(const std::vector<int>& isos,
                      const std::map<int, double>& calibrated_gain,
                      std::uint64_t seed);

/// out_j = g(iso) * dep(n1_j) + indep(n2_j); strictly pointwise.
std::vector<double> forward(const ProxyModel& model, std::span<const double> n1,
                            std::span<const double> n2, int iso);

/// n1, n2 ~ N(0,1) from seeded streams, then forward.
std::vector<double> sample(const ProxyModel& model, std::size_t count, int iso,
                           std::uint64_t seed, bool interpolate_gain = false);

/// Flat parameter vector layout: dep branch tensors (lift W, lift b, block1
/// first W/b, block1 second W/b, block2 first W/b, block2 second W/b,
/// proj W/b), then the indep branch likewise, then LUT entries by ascending
/// ISO. pack/unpack are exact inverses.
std::vector<double> pack_parameters(const ProxyModel& model);
void unpack_parameters(ProxyModel& model, std::span<const double> flat);

/// Reverse-mode gradient of a scalar loss through the model.
/// grad_out[j] = dL/d out_j; returns dL/d theta in pack_parameters order.
/// Inputs receive no gradient.
std::vector<double> backward(const ProxyModel& model, std::span<const double> n1,
                             std::span<const double> n2, int iso,
                             std::span<const double> grad_out);

void save_model(const ProxyModel& model, const std::string& dir);
ProxyModel load_model(const std::string& dir);

}  // namespace pnnp

#endif  // PNNP_PROXY_MODEL_HPP
