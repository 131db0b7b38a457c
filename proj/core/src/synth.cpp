#include "pnnp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnnp/rng.hpp"
#include "pnnp/virtual_sensor.hpp"

namespace pnnp {

CalibrationProfile perturb_profile(const CalibrationProfile& profile,
                                   std::uint64_t seed) {
  CalibrationProfile out = profile;
  RandomStream maps(derive_seed(seed, "perturb/maps"));
  RandomStream scalars(derive_seed(seed, "perturb/scalars"));

  if (profile.frame.error_std.fpn_k > 0.0)
    for (float& v : out.frame.fpn_k.data)
      v += static_cast<float>(profile.frame.error_std.fpn_k * maps.normal());
  if (profile.frame.error_std.fpn_b > 0.0)
    for (float& v : out.frame.fpn_b.data)
      v += static_cast<float>(profile.frame.error_std.fpn_b * maps.normal());

  for (auto& [iso, v] : out.frame.ble)
    v += profile.frame.error_std.ble * scalars.normal();
  for (auto& [iso, v] : out.band.sigma_row) {
    const auto it = profile.band.error_std.sigma_row.find(iso);
    const double e = it != profile.band.error_std.sigma_row.end() ? it->second : 0.0;
    v = std::max(0.0, v + e * scalars.normal());
  }
  for (auto& [iso, v] : out.band.sigma_col) {
    const auto it = profile.band.error_std.sigma_col.find(iso);
    const double e = it != profile.band.error_std.sigma_col.end() ? it->second : 0.0;
    v = std::max(0.0, v + e * scalars.normal());
  }
  for (auto& [iso, v] : out.gain) {
    const auto it = profile.gain_error_std.find(iso);
    const double e = it != profile.gain_error_std.end() ? it->second : 0.0;
    v = std::max(1e-9, v + e * scalars.normal());
  }
  return out;
}

std::vector<double> synth_shot(std::span<const double> clean_electrons, int iso,
                               const CalibrationProfile& profile,
                               std::uint64_t seed) {
  for (double v : clean_electrons)
    if (v < 0.0)
      throw std::invalid_argument("synth_shot: irradiance must be >= 0");
  const double k = profile.gain_at(iso, true);
  RandomStream rng(derive_seed(seed, "synth/shot"));
  std::vector<double> out(clean_electrons.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = k * static_cast<double>(rng.poisson(clean_electrons[i]));
  return out;
}

Array2D synth_signal_independent(const ProxyModel& model,
                                 const CalibrationProfile& profile, int iso,
                                 std::size_t height, std::size_t width,
                                 std::uint64_t seed, bool perturb,
                                 const SynthComponents& components) {
  if (height != profile.frame.fpn_k.height || width != profile.frame.fpn_k.width)
    throw std::invalid_argument("synth_signal_independent: shape mismatch with FPN maps");

  CalibrationProfile snapshot;
  const CalibrationProfile* use = &profile;
  if (perturb) {
    snapshot = perturb_profile(profile, derive_seed(seed, "synth/perturb"));
    use = &snapshot;
  }

  Array2D out;
  out.height = height;
  out.width = width;
  out.data.assign(height * width, 0.0f);

  if (components.frame_wise) {
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t c = 0; c < width; ++c)
        out.at(r, c) += static_cast<float>(use->frame.shading_at(r, c, iso, true));
  }
  if (components.row) {
    RandomStream rng(derive_seed(seed, "synth/row"));
    const double sr = [&] {
      auto it = use->band.sigma_row.find(iso);
      if (it != use->band.sigma_row.end()) return it->second;
      throw std::invalid_argument("synth_signal_independent: sigma_row missing iso");
    }();
    for (std::size_t r = 0; r < height; ++r) {
      const double v = sr * rng.normal();
      for (std::size_t c = 0; c < width; ++c) out.at(r, c) += static_cast<float>(v);
    }
  }
  if (components.col) {
    RandomStream rng(derive_seed(seed, "synth/col"));
    const double sc = [&] {
      auto it = use->band.sigma_col.find(iso);
      if (it != use->band.sigma_col.end()) return it->second;
      throw std::invalid_argument("synth_signal_independent: sigma_col missing iso");
    }();
    for (std::size_t c = 0; c < width; ++c) {
      const double v = sc * rng.normal();
      for (std::size_t r = 0; r < height; ++r) out.at(r, c) += static_cast<float>(v);
    }
  }
  if (components.pixel) {
    const std::vector<double> noise =
        sample(model, height * width, iso, derive_seed(seed, "synth/pixel"), true);
    for (std::size_t i = 0; i < noise.size(); ++i)
      out.data[i] += static_cast<float>(noise[i]);
  }
  return out;
}

std::pair<RawFrame, RawFrame> synth_pair(const RawFrame& clean, double ratio,
                                         int iso, const ProxyModel& model,
                                         const CalibrationProfile& profile,
                                         std::uint64_t seed,
                                         const SynthPairOptions& options) {
  if (ratio <= 0.0) throw std::invalid_argument("synth_pair: ratio must be > 0");
  validate_frame(clean);

  const double k = profile.gain_at(iso, true);
  std::vector<double> electrons(clean.pixel_count());
  for (std::size_t i = 0; i < electrons.size(); ++i)
    electrons[i] = std::max(
        0.0, (static_cast<double>(clean.data[i]) - clean.black_level) / k / ratio);

  std::vector<double> acc(clean.pixel_count(), profile.black_level);
  if (options.shot) {
    const std::vector<double> shot = synth_shot(electrons, iso, profile, seed);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += shot[i];
  }
  const Array2D indep =
      synth_signal_independent(model, profile, iso, clean.height, clean.width,
                               seed, options.perturb, options.components);
  for (std::size_t i = 0; i < acc.size(); ++i)
    acc[i] += static_cast<double>(indep.data[i]);

  RawFrame noisy;
  noisy.height = clean.height;
  noisy.width = clean.width;
  noisy.iso = iso;
  noisy.black_level = profile.black_level;
  noisy.white_level = profile.white_level;
  noisy.bit_depth = profile.bit_depth;
  noisy.quantized = true;
  noisy.data.resize(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i)
    noisy.data[i] = static_cast<float>(quantize_dn(acc[i], profile.bit_depth));
  return {std::move(noisy), clean};
}

Array2D dark_shading_correction(const RawFrame& noisy,
                                const CalibrationProfile& profile) {
  if (noisy.height != profile.frame.fpn_k.height ||
      noisy.width != profile.frame.fpn_k.width)
    throw std::invalid_argument("dark_shading_correction: shape mismatch");
  Array2D out;
  out.height = noisy.height;
  out.width = noisy.width;
  out.data.resize(noisy.pixel_count());
  for (std::size_t r = 0; r < noisy.height; ++r)
    for (std::size_t c = 0; c < noisy.width; ++c)
      out.at(r, c) = static_cast<float>(
          static_cast<double>(noisy.at(r, c)) -
          profile.frame.shading_at(r, c, noisy.iso, true));
  return out;
}

}  // namespace pnnp
