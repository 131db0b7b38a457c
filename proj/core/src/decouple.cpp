#include "pnnp/decouple.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnnp/metrics.hpp"
#include "pnnp/rng.hpp"
#include "pnnp/stats.hpp"

namespace pnnp {

namespace {

void check_same_shape(const std::vector<FrameSet>& sets) {
  const RawFrame& first = sets.front().frames.front();
  for (const FrameSet& s : sets)
    for (const RawFrame& f : s.frames)
      if (f.height != first.height || f.width != first.width)
        throw std::invalid_argument("dark sets: shape mismatch across sets");
}

}  // namespace

FrameNoiseModel calibrate_frame_noise(const std::vector<FrameSet>& dark_sets) {
  if (dark_sets.size() < 2)
    throw std::invalid_argument(
        "calibrate_frame_noise: need >= 2 ISOs (frame-wise regression needs "
        ">= 2 points)");
  for (const FrameSet& s : dark_sets) {
    validate_frame_set(s);
    if (s.frames.size() < 2)
      throw std::invalid_argument("calibrate_frame_noise: need >= 2 frames per ISO");
  }
  check_same_shape(dark_sets);
  {
    std::vector<int> isos;
    for (const FrameSet& s : dark_sets) isos.push_back(s.iso);
    std::sort(isos.begin(), isos.end());
    if (std::adjacent_find(isos.begin(), isos.end()) != isos.end())
      throw std::invalid_argument("calibrate_frame_noise: duplicate ISO sets");
  }

  const std::size_t h = dark_sets.front().frames.front().height;
  const std::size_t w = dark_sets.front().frames.front().width;
  const std::size_t npix = h * w;
  const std::size_t niso = dark_sets.size();
  const double black = dark_sets.front().frames.front().black_level;

  // per-ISO temporal means, above black level
  std::vector<std::vector<double>> means(niso, std::vector<double>(npix, 0.0));
  std::vector<double> isos(niso);
  for (std::size_t s = 0; s < niso; ++s) {
    isos[s] = static_cast<double>(dark_sets[s].iso);
    const auto& frames = dark_sets[s].frames;
    for (const RawFrame& f : frames)
      for (std::size_t i = 0; i < npix; ++i)
        means[s][i] += static_cast<double>(f.data[i]);
    const double inv = 1.0 / static_cast<double>(frames.size());
    for (std::size_t i = 0; i < npix; ++i) means[s][i] = means[s][i] * inv - black;
  }

  // per-pixel least-squares line over ISO
  double sx = 0.0, sxx = 0.0;
  for (double x : isos) {
    sx += x;
    sxx += x * x;
  }
  const double n = static_cast<double>(niso);
  const double det = n * sxx - sx * sx;
  if (det <= 0.0)
    throw std::invalid_argument("calibrate_frame_noise: degenerate ISO design");

  FrameNoiseModel model;
  model.fpn_k.height = model.fpn_b.height = h;
  model.fpn_k.width = model.fpn_b.width = w;
  model.fpn_k.data.resize(npix);
  model.fpn_b.data.resize(npix);
  std::vector<double> slope(npix), intercept(npix);
  for (std::size_t i = 0; i < npix; ++i) {
    double sy = 0.0, sxy = 0.0;
    for (std::size_t s = 0; s < niso; ++s) {
      sy += means[s][i];
      sxy += isos[s] * means[s][i];
    }
    const double k = (n * sxy - sx * sy) / det;
    const double b = (sy - k * sx) / n;
    slope[i] = k;
    intercept[i] = b;
    model.fpn_k.data[i] = static_cast<float>(k);
    model.fpn_b.data[i] = static_cast<float>(b);
  }

  // BLE: spatial mean of what the fitted shading leaves behind at each ISO
  std::vector<std::vector<double>> resid(niso, std::vector<double>(npix));
  for (std::size_t s = 0; s < niso; ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < npix; ++i) {
      resid[s][i] = means[s][i] - (slope[i] * isos[s] + intercept[i]);
      acc += resid[s][i];
    }
    model.ble[dark_sets[s].iso] = acc / static_cast<double>(npix);
  }

  // pooled residual scatter after BLE removal -> observation noise of the
  // per-ISO temporal means; drives the regression error magnitudes
  double ss = 0.0;
  for (std::size_t s = 0; s < niso; ++s) {
    const double ble_s = model.ble.at(dark_sets[s].iso);
    for (std::size_t i = 0; i < npix; ++i) {
      const double r = resid[s][i] - ble_s;
      ss += r * r;
    }
  }
  model.fit_residual_rms = std::sqrt(ss / (static_cast<double>(npix) * n));
  double sigma_obs = 0.0;
  if (niso > 2)
    sigma_obs = std::sqrt(ss / (static_cast<double>(npix) * (n - 2.0)));
  const double sxx_centered = sxx - sx * sx / n;
  model.error_std.fpn_k = sigma_obs / std::sqrt(sxx_centered);
  model.error_std.fpn_b =
      sigma_obs * std::sqrt(1.0 / n + (sx / n) * (sx / n) / sxx_centered);
  model.error_std.ble = sigma_obs / std::sqrt(static_cast<double>(npix));
  return model;
}

Array2D remove_frame_noise(const RawFrame& frame, const FrameNoiseModel& model) {
  if (frame.height != model.fpn_k.height || frame.width != model.fpn_k.width)
    throw std::invalid_argument("remove_frame_noise: shape mismatch");
  if (!model.ble.count(frame.iso))
    throw std::invalid_argument("remove_frame_noise: iso " +
                                std::to_string(frame.iso) + " not calibrated");
  Array2D out;
  out.height = frame.height;
  out.width = frame.width;
  out.data.resize(frame.pixel_count());
  const double ble = model.ble.at(frame.iso);
  for (std::size_t r = 0; r < frame.height; ++r) {
    for (std::size_t c = 0; c < frame.width; ++c) {
      const double pred = static_cast<double>(model.fpn_k.at(r, c)) * frame.iso +
                          static_cast<double>(model.fpn_b.at(r, c)) + ble;
      out.at(r, c) =
          static_cast<float>(static_cast<double>(frame.at(r, c)) - frame.black_level - pred);
    }
  }
  return out;
}

Array2D remove_band_noise(const Array2D& residual) {
  const std::size_t h = residual.height, w = residual.width;
  if (residual.data.size() != h * w)
    throw std::invalid_argument("remove_band_noise: bad shape");
  std::vector<double> row_mean(h, 0.0), col_mean(w, 0.0);
  double grand = 0.0;
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const double v = residual.at(r, c);
      row_mean[r] += v;
      col_mean[c] += v;
      grand += v;
    }
  for (double& v : row_mean) v /= static_cast<double>(w);
  for (double& v : col_mean) v /= static_cast<double>(h);
  grand /= static_cast<double>(h * w);

  Array2D out;
  out.height = h;
  out.width = w;
  out.data.resize(h * w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      out.at(r, c) = static_cast<float>(static_cast<double>(residual.at(r, c)) -
                                        row_mean[r] - col_mean[c] + grand);
  return out;
}

namespace {

// pooled per-frame-centered band means and their unbiased variance
struct BandEstimate {
  double sigma = 0.0;
  double error = 0.0;
  bool has_r2 = false;
  double r2 = 0.0;
};

BandEstimate estimate_band(const std::vector<std::vector<double>>& per_frame_means,
                           double pixel_leak_var) {
  std::vector<double> centered;
  double ss = 0.0;
  std::size_t dof = 0;
  for (const auto& m : per_frame_means) {
    const double mu = mean(m);
    for (double v : m) {
      const double d = v - mu;
      centered.push_back(d);
      ss += d * d;
    }
    dof += m.size() - 1;
  }
  BandEstimate est;
  if (dof == 0) return est;
  const double var = ss / static_cast<double>(dof);
  const double band_var = std::max(0.0, var - pixel_leak_var);
  est.sigma = std::sqrt(band_var);
  est.error = est.sigma > 0.0
                  ? est.sigma / std::sqrt(2.0 * static_cast<double>(dof))
                  : 0.0;
  if (var > 0.0 && centered.size() >= 30) {
    const double r2 = gaussian_probplot_r2(centered);
    if (r2 >= 0.0) {
      est.has_r2 = true;
      est.r2 = r2;
    }
  }
  return est;
}

}  // namespace

void calibrate_band_noise(const std::vector<Array2D>& residuals, int iso,
                          BandNoiseModel& model) {
  if (residuals.empty())
    throw std::invalid_argument("calibrate_band_noise: no residual frames");
  const std::size_t h = residuals.front().height, w = residuals.front().width;
  if (h < 2)
    throw std::invalid_argument("calibrate_band_noise: cannot estimate row noise from single-row frames");
  if (w < 2)
    throw std::invalid_argument("calibrate_band_noise: cannot estimate column noise from single-column frames");

  std::vector<std::vector<double>> row_means, col_means;
  double pix_ss = 0.0;
  std::size_t pix_n = 0;
  for (const Array2D& f : residuals) {
    if (f.height != h || f.width != w)
      throw std::invalid_argument("calibrate_band_noise: shape mismatch");
    std::vector<double> rm(h, 0.0), cm(w, 0.0);
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c) {
        rm[r] += f.at(r, c);
        cm[c] += f.at(r, c);
      }
    for (double& v : rm) v /= static_cast<double>(w);
    for (double& v : cm) v /= static_cast<double>(h);
    row_means.push_back(std::move(rm));
    col_means.push_back(std::move(cm));

    // pixel variance from the band-removed frame, de-biased for the
    // projection (two-way centering removes (H+W-1)/(HW) of i.i.d. variance)
    Array2D pix = remove_band_noise(f);
    for (float v : pix.data) pix_ss += static_cast<double>(v) * v;
    pix_n += pix.data.size();
  }
  const double hd = static_cast<double>(h), wd = static_cast<double>(w);
  const double shrink = 1.0 - 1.0 / wd - 1.0 / hd + 1.0 / (hd * wd);
  const double pix_var = pix_n ? (pix_ss / static_cast<double>(pix_n)) / shrink : 0.0;

  const BandEstimate row = estimate_band(row_means, pix_var / wd);
  const BandEstimate col = estimate_band(col_means, pix_var / hd);
  model.sigma_row[iso] = row.sigma;
  model.sigma_col[iso] = col.sigma;
  model.error_std.sigma_row[iso] = row.error;
  model.error_std.sigma_col[iso] = col.error;
  if (row.has_r2) model.r2_row[iso] = row.r2;
  if (col.has_r2) model.r2_col[iso] = col.r2;
}

PixelNoiseSamples high_bit_reconstruct(const std::vector<double>& samples,
                                       double quant_step, std::uint64_t seed,
                                       const ReconstructOptions& options) {
  if (quant_step <= 0.0)
    throw std::invalid_argument("high_bit_reconstruct: quant_step must be > 0");
  if (samples.empty())
    throw std::invalid_argument("high_bit_reconstruct: empty sample pool");

  PixelNoiseSamples out;
  out.quant_step = quant_step;
  if (!options.enabled) {
    out.samples = samples;
    return out;
  }

  const double q = quant_step;
  const double step = q * options.grid_step_factor;
  double lo = samples[0], hi = samples[0];
  for (double v : samples) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  lo -= q;
  hi += q;
  const std::size_t nbins =
      static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;

  // raw fine histogram and its kernel-smoothed counterpart
  std::vector<double> raw(nbins, 0.0);
  for (double v : samples) {
    const std::size_t b = static_cast<std::size_t>((v - lo) / step);
    raw[std::min(b, nbins - 1)] += 1.0;
  }
  const double ksigma = options.kernel_sigma_factor * q;
  const int taps = static_cast<int>(std::ceil(3.0 * ksigma / step));
  std::vector<double> kernel(2 * taps + 1);
  double ksum = 0.0;
  for (int t = -taps; t <= taps; ++t) {
    const double x = t * step / ksigma;
    kernel[t + taps] = std::exp(-0.5 * x * x);
    ksum += kernel[t + taps];
  }
  for (double& v : kernel) v /= ksum;
  std::vector<double> smooth(nbins, 0.0);
  for (std::size_t b = 0; b < nbins; ++b) {
    if (raw[b] == 0.0) continue;
    for (int t = -taps; t <= taps; ++t) {
      const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(b) + t;
      if (j >= 0 && j < static_cast<std::ptrdiff_t>(nbins))
        smooth[j] += raw[b] * kernel[t + taps];
    }
  }

  // cumulative mass at grid edges; raw prefix counts for occupancy checks
  std::vector<double> cum(nbins + 1, 0.0), raw_cum(nbins + 1, 0.0);
  for (std::size_t b = 0; b < nbins; ++b) {
    cum[b + 1] = cum[b] + smooth[b];
    raw_cum[b + 1] = raw_cum[b] + raw[b];
  }

  auto grid_cdf = [&](double x, const std::vector<double>& c) {
    const double pos = (x - lo) / step;
    if (pos <= 0.0) return 0.0;
    if (pos >= static_cast<double>(nbins)) return c[nbins];
    const std::size_t b = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(b);
    return c[b] + frac * (c[b + 1] - c[b]);
  };
  auto grid_inverse = [&](double mass) {
    std::size_t loi = 0, hii = nbins;
    while (hii - loi > 1) {
      const std::size_t mid = (loi + hii) / 2;
      if (cum[mid] < mass)
        loi = mid;
      else
        hii = mid;
    }
    const double seg = cum[hii] - cum[loi];
    const double frac = seg > 0.0 ? (mass - cum[loi]) / seg : 0.5;
    return lo + (static_cast<double>(loi) + frac) * step;
  };

  RandomStream rng(seed);
  out.samples.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = samples[i];
    const double a = x - 0.5 * q, b = x + 0.5 * q;
    const double occupancy = grid_cdf(b, raw_cum) - grid_cdf(a, raw_cum);
    const double ma = grid_cdf(a, cum), mb = grid_cdf(b, cum);
    double y;
    if (occupancy < static_cast<double>(options.min_cell_count) || mb - ma <= 0.0) {
      y = x + (rng.u01() - 0.5) * q;
    } else {
      y = grid_inverse(ma + rng.u01() * (mb - ma));
      y = std::clamp(y, a, b);
    }
    out.samples[i] = y;
  }
  return out;
}

std::map<int, PixelNoiseSamples> decouple(
    const std::vector<FrameSet>& dark_sets, const FrameNoiseModel& frame_model,
    const BandNoiseModel& band_model, std::uint64_t seed, double quant_step,
    const ReconstructOptions& options) {
  std::map<int, PixelNoiseSamples> out;
  for (const FrameSet& set : dark_sets) {
    validate_frame_set(set);
    if (!band_model.sigma_row.count(set.iso))
      throw std::invalid_argument("decouple: band model missing iso " +
                                  std::to_string(set.iso));
    std::vector<double> pool;
    pool.reserve(set.frames.size() * set.frames.front().pixel_count());
    for (const RawFrame& f : set.frames) {
      const Array2D r1 = remove_frame_noise(f, frame_model);
      const Array2D r2 = remove_band_noise(r1);
      for (float v : r2.data) pool.push_back(static_cast<double>(v));
    }
    PixelNoiseSamples rec = high_bit_reconstruct(
        pool, quant_step, derive_seed(seed, "decouple/iso=" + std::to_string(set.iso)),
        options);
    rec.iso = set.iso;
    out[set.iso] = std::move(rec);
  }
  return out;
}

void calibrate_gain(const std::vector<FlatSet>& flats,
                    const FrameNoiseModel& frame_model,
                    std::map<int, double>& gain_out,
                    std::map<int, double>& gain_error_out) {
  std::map<int, std::vector<const FlatSet*>> by_iso;
  for (const FlatSet& f : flats) {
    if (f.frames.size() < 2)
      throw std::invalid_argument("calibrate_gain: need >= 2 frames per irradiance level");
    by_iso[f.iso].push_back(&f);
  }
  for (const auto& [iso, sets] : by_iso) {
    if (sets.size() < 2)
      throw std::invalid_argument("calibrate_gain: need >= 2 irradiance levels per iso");

    // mean dark level predicted by the frame model
    const RawFrame& probe = sets.front()->frames.front();
    double dark_level = probe.black_level;
    {
      double acc = 0.0;
      for (std::size_t r = 0; r < probe.height; ++r)
        for (std::size_t c = 0; c < probe.width; ++c)
          acc += frame_model.shading_at(r, c, iso, true);
      dark_level += acc / static_cast<double>(probe.pixel_count());
    }

    std::vector<double> mean_signal, var_signal;
    for (const FlatSet* set : sets) {
      double level_mean = 0.0, level_var = 0.0;
      std::size_t pairs = 0;
      for (std::size_t p = 0; p + 1 < set->frames.size(); p += 2) {
        const RawFrame& f1 = set->frames[p];
        const RawFrame& f2 = set->frames[p + 1];
        double m = 0.0;
        std::vector<double> diff(f1.pixel_count());
        for (std::size_t i = 0; i < f1.pixel_count(); ++i) {
          m += 0.5 * (static_cast<double>(f1.data[i]) + f2.data[i]);
          diff[i] = static_cast<double>(f1.data[i]) - f2.data[i];
        }
        level_mean += m / static_cast<double>(f1.pixel_count()) - dark_level;
        level_var += variance_population(diff) * 0.5;
        ++pairs;
      }
      mean_signal.push_back(level_mean / static_cast<double>(pairs));
      var_signal.push_back(level_var / static_cast<double>(pairs));
    }

    const LineFit fit = fit_line(mean_signal, var_signal);
    if (fit.slope <= 0.0)
      throw std::runtime_error("calibrate_gain: non-positive photon-transfer slope at iso " +
                               std::to_string(iso));
    gain_out[iso] = fit.slope;

    double ss = 0.0, sxx = 0.0;
    const double mx = mean(mean_signal);
    for (std::size_t i = 0; i < mean_signal.size(); ++i) {
      const double r = var_signal[i] - (fit.slope * mean_signal[i] + fit.intercept);
      ss += r * r;
      sxx += (mean_signal[i] - mx) * (mean_signal[i] - mx);
    }
    const double dof = static_cast<double>(mean_signal.size()) - 2.0;
    gain_error_out[iso] = dof > 0.0 ? std::sqrt(ss / dof / sxx) : 0.0;
  }
}

}  // namespace pnnp
