#include "pnnp/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pnnp {

std::uint64_t content_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["config_digest"] = manifest.config_digest;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.inputs;
  j["outputs"] = manifest.outputs;
  j["version"] = manifest.version;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << j.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(in);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::uint64_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.version = j.value("version", std::string());
  return m;
}

}  // namespace pnnp
