#include "pnnp/virtual_sensor.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pnnp {

namespace {

using json = nlohmann::ordered_json;

double table_at(const std::map<int, double>& table, int iso, const char* what) {
  auto it = table.find(iso);
  if (it == table.end())
    throw std::invalid_argument(std::string(what) + ": unknown iso " + std::to_string(iso));
  return it->second;
}

json table_to_json(const std::map<int, double>& table) {
  json out = json::object();
  for (const auto& [iso, v] : table) out[std::to_string(iso)] = v;
  return out;
}

std::map<int, double> table_from_json(const json& j) {
  std::map<int, double> out;
  for (auto it = j.begin(); it != j.end(); ++it)
    out[std::stoi(it.key())] = it.value().get<double>();
  return out;
}

}  // namespace

SensorSpec default_sensor_spec() {
  SensorSpec s;
  s.height = 128;
  s.width = 128;
  s.bit_depth = 12;
  s.black_level = 512.0;
  s.white_level = 4095.0;
  s.isos = {100, 200, 400, 800};
  for (int iso : s.isos) s.gain[iso] = iso / 200.0;
  s.fpn_k_sigma = 0.002;
  s.fpn_b_sigma = 0.5;
  // trend-free over the ISO design: sum and iso-weighted sum are both zero
  s.ble = {{100, 0.4}, {200, -0.4}, {400, -0.1}, {800, 0.1}};
  for (int iso : s.isos) {
    s.sigma_row[iso] = 0.30 * s.gain.at(iso);
    s.sigma_col[iso] = 0.25 * s.gain.at(iso);
  }
  s.pixel_components = {{0.95, 0.0, 2.0}, {0.05, 0.0, 10.0}};
  return s;
}

double GroundTruthSensor::gain(int iso) const { return table_at(spec.gain, iso, "gain"); }
double GroundTruthSensor::ble(int iso) const { return table_at(spec.ble, iso, "ble"); }
double GroundTruthSensor::sigma_row(int iso) const {
  return table_at(spec.sigma_row, iso, "sigma_row");
}
double GroundTruthSensor::sigma_col(int iso) const {
  return table_at(spec.sigma_col, iso, "sigma_col");
}

GaussianMixture GroundTruthSensor::pixel_dist(int iso) const {
  GaussianMixture base(spec.pixel_components);
  return base.scaled(gain(iso));
}

double GroundTruthSensor::shading(std::size_t r, std::size_t c, int iso) const {
  return fpn_k.at(r, c) * iso + fpn_b.at(r, c) + ble(iso);
}

bool GroundTruthSensor::has_iso(int iso) const {
  return spec.gain.count(iso) != 0;
}

GroundTruthSensor build_sensor(const SensorSpec& spec, std::uint64_t seed) {
  if (spec.height < 16 || spec.width < 16)
    throw std::invalid_argument("build_sensor: geometry must be at least 16x16");
  if (spec.isos.size() < 2)
    throw std::invalid_argument(
        "build_sensor: at least 2 ISO values required (frame-wise regression "
        "needs >= 2 points)");
  for (int iso : spec.isos) {
    if (!spec.gain.count(iso) || !spec.ble.count(iso) ||
        !spec.sigma_row.count(iso) || !spec.sigma_col.count(iso))
      throw std::invalid_argument("build_sensor: incomplete tables for iso " +
                                  std::to_string(iso));
    if (spec.sigma_row.at(iso) < 0.0 || spec.sigma_col.at(iso) < 0.0)
      throw std::invalid_argument("build_sensor: sigmas must be >= 0");
    if (spec.gain.at(iso) <= 0.0)
      throw std::invalid_argument("build_sensor: gains must be > 0");
  }

  GroundTruthSensor s;
  s.spec = spec;
  s.seed = seed;
  const std::size_t n = spec.height * spec.width;
  s.fpn_k.height = s.fpn_b.height = spec.height;
  s.fpn_k.width = s.fpn_b.width = spec.width;
  s.fpn_k.data.resize(n);
  s.fpn_b.data.resize(n);
  RandomStream rng(derive_seed(seed, "sensor/fpn"));
  RandomStream rng_b = rng.fork("b");
  for (std::size_t i = 0; i < n; ++i)
    s.fpn_k.data[i] = static_cast<float>(spec.fpn_k_sigma * rng.normal());
  for (std::size_t i = 0; i < n; ++i)
    s.fpn_b.data[i] = static_cast<float>(spec.fpn_b_sigma * rng_b.normal());
  return s;
}

double quantize_dn(double value, int bit_depth) {
  const double top = static_cast<double>((1u << bit_depth) - 1u);
  double q = std::nearbyint(value);  // round-half-to-even under FE_TONEAREST
  if (q < 0.0) q = 0.0;
  if (q > top) q = top;
  return q;
}

namespace {

RawFrame capture_common(const GroundTruthSensor& sensor, int iso,
                        std::uint64_t seed, const CaptureOptions& options,
                        double irradiance, bool with_shot) {
  if (!sensor.has_iso(iso))
    throw std::invalid_argument("capture: unknown iso " + std::to_string(iso));
  if (with_shot && irradiance < 0.0)
    throw std::invalid_argument("capture: irradiance must be >= 0");

  const SensorSpec& spec = sensor.spec;
  const std::size_t h = spec.height, w = spec.width;
  std::vector<double> acc(h * w, spec.black_level);

  if (options.frame_wise) {
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c < w; ++c)
        acc[r * w + c] += sensor.shading(r, c, iso);
  }
  if (options.row) {
    RandomStream rng(derive_seed(seed, "capture/row"));
    const double sr = sensor.sigma_row(iso);
    for (std::size_t r = 0; r < h; ++r) {
      const double v = sr * rng.normal();
      for (std::size_t c = 0; c < w; ++c) acc[r * w + c] += v;
    }
  }
  if (options.col) {
    RandomStream rng(derive_seed(seed, "capture/col"));
    const double sc = sensor.sigma_col(iso);
    for (std::size_t c = 0; c < w; ++c) {
      const double v = sc * rng.normal();
      for (std::size_t r = 0; r < h; ++r) acc[r * w + c] += v;
    }
  }
  if (options.pixel) {
    RandomStream rng(derive_seed(seed, "capture/pixel"));
    const GaussianMixture dist = sensor.pixel_dist(iso);
    for (double& v : acc) v += dist.sample(rng);
  }
  if (with_shot) {
    RandomStream rng(derive_seed(seed, "capture/shot"));
    const double k = sensor.gain(iso);
    for (double& v : acc)
      v += k * static_cast<double>(rng.poisson(irradiance));
  }

  RawFrame f;
  f.height = h;
  f.width = w;
  f.iso = iso;
  f.black_level = spec.black_level;
  f.white_level = spec.white_level;
  f.bit_depth = spec.bit_depth;
  f.quantized = options.quantize;
  f.data.resize(h * w);
  if (options.quantize) {
    for (std::size_t i = 0; i < acc.size(); ++i)
      f.data[i] = static_cast<float>(quantize_dn(acc[i], spec.bit_depth));
  } else {
    for (std::size_t i = 0; i < acc.size(); ++i)
      f.data[i] = static_cast<float>(acc[i]);
  }
  return f;
}

}  // namespace

RawFrame capture_dark_frame(const GroundTruthSensor& sensor, int iso,
                            std::uint64_t seed, const CaptureOptions& options) {
  return capture_common(sensor, iso, seed, options, 0.0, false);
}

RawFrame capture_flat_frame(const GroundTruthSensor& sensor, int iso,
                            double irradiance, std::uint64_t seed,
                            const CaptureOptions& options) {
  return capture_common(sensor, iso, seed, options, irradiance, true);
}

double true_pixel_cdf(const GroundTruthSensor& sensor, int iso, double q) {
  return sensor.pixel_dist(iso).cdf(q);
}

void save_sensor(const GroundTruthSensor& sensor, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_array(sensor.fpn_k, dir + "/fpn_k.pnnf");
  write_array(sensor.fpn_b, dir + "/fpn_b.pnnf");

  const SensorSpec& s = sensor.spec;
  json j;
  j["height"] = s.height;
  j["width"] = s.width;
  j["bit_depth"] = s.bit_depth;
  j["black_level"] = s.black_level;
  j["white_level"] = s.white_level;
  j["isos"] = s.isos;
  j["gain"] = table_to_json(s.gain);
  j["fpn_k_sigma"] = s.fpn_k_sigma;
  j["fpn_b_sigma"] = s.fpn_b_sigma;
  j["ble"] = table_to_json(s.ble);
  j["sigma_row"] = table_to_json(s.sigma_row);
  j["sigma_col"] = table_to_json(s.sigma_col);
  json comps = json::array();
  for (const auto& c : s.pixel_components)
    comps.push_back({{"weight", c.weight}, {"mu", c.mu}, {"sigma", c.sigma}});
  j["pixel_components"] = comps;
  j["seed"] = sensor.seed;
  j["fpn_k_container"] = "fpn_k.pnnf";
  j["fpn_b_container"] = "fpn_b.pnnf";

  std::ofstream out(dir + "/sensor.json", std::ios::trunc);
  if (!out) throw std::runtime_error("save_sensor: cannot write to " + dir);
  out << j.dump(2) << "\n";
}

namespace {

SensorSpec spec_from_json(const json& j) {
  SensorSpec s = default_sensor_spec();
  if (j.contains("height")) s.height = j.at("height").get<std::size_t>();
  if (j.contains("width")) s.width = j.at("width").get<std::size_t>();
  if (j.contains("bit_depth")) s.bit_depth = j.at("bit_depth").get<int>();
  if (j.contains("black_level")) s.black_level = j.at("black_level").get<double>();
  if (j.contains("white_level")) s.white_level = j.at("white_level").get<double>();
  if (j.contains("isos")) s.isos = j.at("isos").get<std::vector<int>>();
  if (j.contains("fpn_k_sigma")) s.fpn_k_sigma = j.at("fpn_k_sigma").get<double>();
  if (j.contains("fpn_b_sigma")) s.fpn_b_sigma = j.at("fpn_b_sigma").get<double>();
  if (j.contains("gain")) s.gain = table_from_json(j.at("gain"));
  if (j.contains("ble")) s.ble = table_from_json(j.at("ble"));
  if (j.contains("sigma_row")) s.sigma_row = table_from_json(j.at("sigma_row"));
  if (j.contains("sigma_col")) s.sigma_col = table_from_json(j.at("sigma_col"));
  if (j.contains("gain_per_iso")) {
    s.gain.clear();
    for (int iso : s.isos) s.gain[iso] = j.at("gain_per_iso").get<double>() * iso;
  }
  if (j.contains("pixel_components")) {
    s.pixel_components.clear();
    for (const auto& c : j.at("pixel_components"))
      s.pixel_components.push_back({c.at("weight").get<double>(),
                                    c.value("mu", 0.0),
                                    c.at("sigma").get<double>()});
  }
  // defaults keyed off the default ISO set need refreshing when isos differ
  for (int iso : s.isos) {
    if (!s.gain.count(iso)) s.gain[iso] = iso / 200.0;
    if (!s.ble.count(iso)) s.ble[iso] = 0.0;
    if (!s.sigma_row.count(iso)) s.sigma_row[iso] = 0.30 * s.gain.at(iso);
    if (!s.sigma_col.count(iso)) s.sigma_col[iso] = 0.25 * s.gain.at(iso);
  }
  return s;
}

}  // namespace

GroundTruthSensor load_sensor(const std::string& dir) {
  std::ifstream in(dir + "/sensor.json");
  if (!in) throw std::runtime_error("load_sensor: missing sensor.json in " + dir);
  json j = json::parse(in);
  GroundTruthSensor s;
  s.spec = spec_from_json(j);
  s.seed = j.value("seed", std::uint64_t{0});
  s.fpn_k = read_array(dir + "/" + j.value("fpn_k_container", std::string("fpn_k.pnnf")));
  s.fpn_b = read_array(dir + "/" + j.value("fpn_b_container", std::string("fpn_b.pnnf")));
  if (s.fpn_k.height != s.spec.height || s.fpn_k.width != s.spec.width ||
      s.fpn_b.height != s.spec.height || s.fpn_b.width != s.spec.width)
    throw std::runtime_error("load_sensor: FPN map shape mismatch");
  return s;
}

SensorSpec sensor_spec_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("sensor spec: cannot open " + path);
  return spec_from_json(json::parse(in));
}

}  // namespace pnnp
