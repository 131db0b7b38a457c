#ifndef PNNP_SYNTH_HPP
#define PNNP_SYNTH_HPP

#include <cstdint>
#include <utility>

#include "pnnp/calibration.hpp"
#include "pnnp/frame.hpp"
#include "pnnp/proxy_model.hpp"

namespace pnnp {

/// One perturbed snapshot of the calibrated parameters, drawn from the
/// recorded Gaussian error magnitudes: per-pixel draws for the FPN maps,
/// one draw per scalar (BLE, band sigmas, gain). Sigmas are floored at zero,
/// gains at a small positive value. Deterministic per seed.
CalibrationProfile perturb_profile(const CalibrationProfile& profile,
                                   std::uint64_t seed);

/// K(iso) * Poisson(clean) per pixel; clean is irradiance in electrons.
std::vector<double> synth_shot(std::span<const double> clean_electrons, int iso,
                               const CalibrationProfile& profile,
                               std::uint64_t seed);

struct SynthComponents {
  bool frame_wise = true;
  bool row = true;
  bool col = true;
  bool pixel = true;
};

/// Signal-independent noise field in DN (above black level): dark shading
/// plus row/column Gaussian draws plus proxy pixel noise, each from its own
/// seed stream. Gain-LUT interpolation is allowed here (inference path).
Array2D synth_signal_independent(const ProxyModel& model,
                                 const CalibrationProfile& profile, int iso,
                                 std::size_t height, std::size_t width,
                                 std::uint64_t seed, bool perturb,
                                 const SynthComponents& components = {});

struct SynthPairOptions {
  bool perturb = true;
  SynthComponents components;
  bool shot = true;
};

/// noisy = quantize(black + K*Poisson(clean_electrons/ratio) + indep field);
/// the clean frame is returned unchanged as the target.
std::pair<RawFrame, RawFrame> synth_pair(const RawFrame& clean, double ratio,
                                         int iso, const ProxyModel& model,
                                         const CalibrationProfile& profile,
                                         std::uint64_t seed,
                                         const SynthPairOptions& options = {});

/// noisy - (fpn_k*iso + fpn_b + ble(iso)); the inverse of the frame-wise
/// component of synthesis. BLE interpolation allowed. Result keeps the black
/// level pedestal and is real-valued.
Array2D dark_shading_correction(const RawFrame& noisy,
                                const CalibrationProfile& profile);

}  // namespace pnnp

#endif  // PNNP_SYNTH_HPP
