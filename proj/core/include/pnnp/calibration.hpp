#ifndef PNNP_CALIBRATION_HPP
#define PNNP_CALIBRATION_HPP

#include <map>
#include <optional>
#include <string>

#include "pnnp/container.hpp"

namespace pnnp {

/// Calibrated frame-wise (temporally stable) noise: per-pixel linear dark
/// shading over ISO plus the spatially flat black level error table.
struct FrameNoiseModel {
  Array2D fpn_k;  // DN per ISO unit
  Array2D fpn_b;  // DN
  std::map<int, double> ble;  // DN, per calibrated ISO
  double fit_residual_rms = 0.0;

  struct ErrorStd {
    double fpn_k = 0.0;  // per-pixel slope error
    double fpn_b = 0.0;  // per-pixel intercept error
    double ble = 0.0;
  } error_std;

  /// BLE at any ISO; uncalibrated ISOs use piecewise-linear interpolation
  /// over the calibrated table, clamped at the ends.
  double ble_at(int iso, bool interpolate) const;

  /// fpn_k*iso + fpn_b + ble(iso) at one pixel (above black level).
  double shading_at(std::size_t r, std::size_t c, int iso, bool interpolate_ble) const;
};

/// Calibrated band-wise (row/column) Gaussian noise per ISO.
struct BandNoiseModel {
  std::map<int, double> sigma_row;  // DN
  std::map<int, double> sigma_col;  // DN
  // probability-plot goodness of fit; absent when degenerate
  std::map<int, double> r2_row;
  std::map<int, double> r2_col;

  struct ErrorStd {
    std::map<int, double> sigma_row;
    std::map<int, double> sigma_col;
  } error_std;
};

/// Everything synthesis needs: sub-models, photon-transfer gain, and the
/// quantization geometry of the sensor.
struct CalibrationProfile {
  FrameNoiseModel frame;
  BandNoiseModel band;
  std::map<int, double> gain;            // K(iso), DN per electron
  std::map<int, double> gain_error_std;  // per ISO
  int bit_depth = 12;
  double black_level = 512.0;
  double white_level = 4095.0;

  /// K at any ISO; uncalibrated ISOs use log-log linear interpolation
  /// (gains grow linearly with ISO, so log-log interpolation is exact for a
  /// linear gain law), clamped at the table ends.
  double gain_at(int iso, bool interpolate) const;

  std::vector<int> isos() const;
};

void save_profile(const CalibrationProfile& profile, const std::string& dir);
CalibrationProfile load_profile(const std::string& dir);

}  // namespace pnnp

#endif  // PNNP_CALIBRATION_HPP
