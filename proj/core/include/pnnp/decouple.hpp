#ifndef PNNP_DECOUPLE_HPP
#define PNNP_DECOUPLE_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "pnnp/calibration.hpp"
#include "pnnp/frame.hpp"

namespace pnnp {

/// Per-pixel least-squares line of the per-ISO temporal dark means over ISO
/// (slope = fpn_k, intercept = fpn_b, both above black level), then BLE as
/// the spatial mean of what the fitted shading leaves behind at each ISO.
/// Error magnitudes come from the pooled regression residuals.
/// Needs >= 2 ISOs and >= 2 frames per set.
FrameNoiseModel calibrate_frame_noise(const std::vector<FrameSet>& dark_sets);

/// frame - black_level - (fpn_k*iso + fpn_b + ble(iso)). Requires an exact
/// BLE entry for the frame's ISO.
Array2D remove_frame_noise(const RawFrame& frame, const FrameNoiseModel& model);

/// Estimate sigma_row/sigma_col at one ISO from frame-noise-free residuals
/// and append the entries (including probability-plot R^2 and estimator
/// error magnitudes) to the model. Row/column means leak 1/width (1/height)
/// of the pixel variance into the band estimate; that leakage is subtracted
/// and the result floored at zero.
void calibrate_band_noise(const std::vector<Array2D>& residuals, int iso,
                          BandNoiseModel& model);

/// Subtract every row mean and every column mean, adding the grand mean back
/// once. All row and column means of the result are zero.
Array2D remove_band_noise(const Array2D& residual);

/// Decoupled, high-bit-reconstructed i.i.d. pixel noise pool for one ISO.
struct PixelNoiseSamples {
  int iso = 0;
  std::vector<double> samples;  // DN, continuous after reconstruction
  double quant_step = 1.0;      // DN
};

struct ReconstructOptions {
  bool enabled = true;
  double kernel_sigma_factor = 0.6;  // kernel width in quantization steps
  double grid_step_factor = 0.125;   // density grid resolution in steps
  int min_cell_count = 100;          // below this, fall back to uniform dither
};

/// Redistribute each sample inside its quantization cell according to a
/// kernel-smoothed empirical density, removing the lattice artifacts of the
/// ADC. Every sample moves by at most quant_step/2; count is preserved.
PixelNoiseSamples high_bit_reconstruct(const std::vector<double>& samples,
                                       double quant_step, std::uint64_t seed,
                                       const ReconstructOptions& options = {});

/// Full pipeline: frame-wise removal, band-wise removal, pooling across
/// frames and pixels, then high-bit reconstruction, per ISO.
std::map<int, PixelNoiseSamples> decouple(
    const std::vector<FrameSet>& dark_sets, const FrameNoiseModel& frame_model,
    const BandNoiseModel& band_model, std::uint64_t seed,
    double quant_step = 1.0, const ReconstructOptions& options = {});

/// Flat-field acquisition at one irradiance level.
struct FlatSet {
  int iso = 0;
  double irradiance = 0.0;  // electrons per pixel
  std::vector<RawFrame> frames;
};

/// Photon-transfer gain estimation: halved variance of same-irradiance flat
/// difference pairs (cancels FPN and dark shading) regressed on the mean
/// signal above the dark level. Slope = K. Requires >= 2 irradiance levels
/// per ISO with >= 2 frames each.
void calibrate_gain(const std::vector<FlatSet>& flats,
                    const FrameNoiseModel& frame_model,
                    std::map<int, double>& gain_out,
                    std::map<int, double>& gain_error_out);

}  // namespace pnnp

#endif  // PNNP_DECOUPLE_HPP
