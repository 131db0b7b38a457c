#ifndef PNNP_VIRTUAL_SENSOR_HPP
#define PNNP_VIRTUAL_SENSOR_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pnnp/container.hpp"
#include "pnnp/distribution.hpp"
#include "pnnp/frame.hpp"
#include "pnnp/rng.hpp"

namespace pnnp {

/// Parameter record for building a ground-truth sensor.
struct SensorSpec {
  std::size_t height = 128;
  std::size_t width = 128;
  int bit_depth = 12;
  double black_level = 512.0;
  double white_level = 4095.0;
  std::vector<int> isos = {100, 200, 400, 800};
  std::map<int, double> gain;       // K(iso), DN per electron
  double fpn_k_sigma = 0.002;       // spatial std of the per-ISO-unit FPN map
  double fpn_b_sigma = 0.5;         // spatial std of the offset FPN map, DN
  std::map<int, double> ble;        // DN
  std::map<int, double> sigma_row;  // DN
  std::map<int, double> sigma_col;  // DN
  // Pixel-wise noise in electron units; per-ISO distribution is this mixture
  // scaled by K(iso). Default: the long-tailed two-component family.
  std::vector<GaussianMixture::Component> pixel_components = {
      {0.95, 0.0, 2.0}, {0.05, 0.0, 10.0}};
};

/// The default 128x128, 4-ISO sensor used throughout the tests and as the
/// CLI fallback when no spec file is given.
///
/// The BLE table is orthogonal to the affine ISO trend by construction: a
/// spatially flat affine-in-ISO term is indistinguishable from the FPN maps,
/// so only a trend-free BLE keeps the FPN/BLE split identifiable.
SensorSpec default_sensor_spec();

/// Ground-truth synthetic sensor: realized FPN maps plus the parametric
/// noise tables of the spec it was built from.
struct GroundTruthSensor {
  SensorSpec spec;
  std::uint64_t seed = 0;
  Array2D fpn_k;  // DN per ISO unit
  Array2D fpn_b;  // DN

  double gain(int iso) const;
  double ble(int iso) const;
  double sigma_row(int iso) const;
  double sigma_col(int iso) const;
  /// Pixel-wise noise distribution in DN at the given ISO.
  GaussianMixture pixel_dist(int iso) const;
  /// True dark shading (above black level) at one pixel.
  double shading(std::size_t r, std::size_t c, int iso) const;
  bool has_iso(int iso) const;
};

/// Deterministic for a given (spec, seed). Requires at least 2 ISOs and a
/// 16x16 or larger geometry.
GroundTruthSensor build_sensor(const SensorSpec& spec, std::uint64_t seed);

/// Component toggles for captures; tests use these to isolate noise sources.
struct CaptureOptions {
  bool frame_wise = true;  // FPN + BLE
  bool row = true;
  bool col = true;
  bool pixel = true;
  bool quantize = true;
};

RawFrame capture_dark_frame(const GroundTruthSensor& sensor, int iso,
                            std::uint64_t seed,
                            const CaptureOptions& options = {});

/// Flat field: Poisson(irradiance) electrons per pixel scaled by K(iso), on
/// top of the full dark signal.
RawFrame capture_flat_frame(const GroundTruthSensor& sensor, int iso,
                            double irradiance, std::uint64_t seed,
                            const CaptureOptions& options = {});

/// Exact CDF of the true pixel-wise noise at the given ISO.
double true_pixel_cdf(const GroundTruthSensor& sensor, int iso, double q);

/// Round-half-to-even then clip to [0, 2^bit_depth - 1].
double quantize_dn(double value, int bit_depth);

void save_sensor(const GroundTruthSensor& sensor, const std::string& dir);
GroundTruthSensor load_sensor(const std::string& dir);

SensorSpec sensor_spec_from_json_file(const std::string& path);

}  // namespace pnnp

#endif  // PNNP_VIRTUAL_SENSOR_HPP
