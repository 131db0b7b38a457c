#include "pnnp/calibration.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace pnnp {

namespace {

using json = nlohmann::ordered_json;

double interp_table(const std::map<int, double>& table, int iso, bool interpolate,
                    bool log_log, const char* what) {
  if (table.empty()) throw std::invalid_argument(std::string(what) + ": empty table");
  auto exact = table.find(iso);
  if (exact != table.end()) return exact->second;
  if (!interpolate)
    throw std::invalid_argument(std::string(what) + ": iso " + std::to_string(iso) +
                                " not calibrated");
  auto hi = table.lower_bound(iso);
  if (hi == table.begin()) return hi->second;            // clamp low
  if (hi == table.end()) return std::prev(hi)->second;   // clamp high
  auto lo = std::prev(hi);
  if (log_log) {
    const double t = (std::log(static_cast<double>(iso)) - std::log(static_cast<double>(lo->first))) /
                     (std::log(static_cast<double>(hi->first)) - std::log(static_cast<double>(lo->first)));
    return std::exp(std::log(lo->second) + t * (std::log(hi->second) - std::log(lo->second)));
  }
  const double t = static_cast<double>(iso - lo->first) /
                   static_cast<double>(hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
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

double FrameNoiseModel::ble_at(int iso, bool interpolate) const {
  return interp_table(ble, iso, interpolate, false, "ble");
}

double FrameNoiseModel::shading_at(std::size_t r, std::size_t c, int iso,
                                   bool interpolate_ble) const {
  return fpn_k.at(r, c) * iso + fpn_b.at(r, c) + ble_at(iso, interpolate_ble);
}

double CalibrationProfile::gain_at(int iso, bool interpolate) const {
  return interp_table(gain, iso, interpolate, true, "gain");
}

std::vector<int> CalibrationProfile::isos() const {
  std::vector<int> out;
  for (const auto& [iso, v] : frame.ble) out.push_back(iso);
  return out;
}

void save_profile(const CalibrationProfile& profile, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_array(profile.frame.fpn_k, dir + "/fpn_k.pnnf");
  write_array(profile.frame.fpn_b, dir + "/fpn_b.pnnf");

  json j;
  j["bit_depth"] = profile.bit_depth;
  j["black_level"] = profile.black_level;
  j["white_level"] = profile.white_level;
  j["fpn_k_container"] = "fpn_k.pnnf";
  j["fpn_b_container"] = "fpn_b.pnnf";
  j["ble"] = table_to_json(profile.frame.ble);
  j["fit_residual_rms"] = profile.frame.fit_residual_rms;
  j["frame_error_std"] = {{"fpn_k", profile.frame.error_std.fpn_k},
                          {"fpn_b", profile.frame.error_std.fpn_b},
                          {"ble", profile.frame.error_std.ble}};
  j["sigma_row"] = table_to_json(profile.band.sigma_row);
  j["sigma_col"] = table_to_json(profile.band.sigma_col);
  j["r2_row"] = table_to_json(profile.band.r2_row);
  j["r2_col"] = table_to_json(profile.band.r2_col);
  j["band_error_std"] = {{"sigma_row", table_to_json(profile.band.error_std.sigma_row)},
                         {"sigma_col", table_to_json(profile.band.error_std.sigma_col)}};
  j["gain"] = table_to_json(profile.gain);
  j["gain_error_std"] = table_to_json(profile.gain_error_std);

  std::ofstream out(dir + "/profile.json", std::ios::trunc);
  if (!out) throw std::runtime_error("save_profile: cannot write to " + dir);
  out << j.dump(2) << "\n";
}

CalibrationProfile load_profile(const std::string& dir) {
  std::ifstream in(dir + "/profile.json");
  if (!in) throw std::runtime_error("load_profile: missing profile.json in " + dir);
  json j = json::parse(in);

  CalibrationProfile p;
  p.bit_depth = j.at("bit_depth").get<int>();
  p.black_level = j.at("black_level").get<double>();
  p.white_level = j.at("white_level").get<double>();
  p.frame.fpn_k = read_array(dir + "/" + j.value("fpn_k_container", std::string("fpn_k.pnnf")));
  p.frame.fpn_b = read_array(dir + "/" + j.value("fpn_b_container", std::string("fpn_b.pnnf")));
  p.frame.ble = table_from_json(j.at("ble"));
  p.frame.fit_residual_rms = j.value("fit_residual_rms", 0.0);
  if (j.contains("frame_error_std")) {
    p.frame.error_std.fpn_k = j["frame_error_std"].value("fpn_k", 0.0);
    p.frame.error_std.fpn_b = j["frame_error_std"].value("fpn_b", 0.0);
    p.frame.error_std.ble = j["frame_error_std"].value("ble", 0.0);
  }
  p.band.sigma_row = table_from_json(j.at("sigma_row"));
  p.band.sigma_col = table_from_json(j.at("sigma_col"));
  if (j.contains("r2_row")) p.band.r2_row = table_from_json(j.at("r2_row"));
  if (j.contains("r2_col")) p.band.r2_col = table_from_json(j.at("r2_col"));
  if (j.contains("band_error_std")) {
    p.band.error_std.sigma_row = table_from_json(j["band_error_std"].at("sigma_row"));
    p.band.error_std.sigma_col = table_from_json(j["band_error_std"].at("sigma_col"));
  }
  if (j.contains("gain")) p.gain = table_from_json(j.at("gain"));
  if (j.contains("gain_error_std")) p.gain_error_std = table_from_json(j.at("gain_error_std"));
  return p;
}

}  // namespace pnnp
