#ifndef PNNP_MANIFEST_HPP
#define PNNP_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace pnnp {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Stable FNV-1a digest of a byte string; used for config digests in run
/// manifests. Never derived from wall clock or environment.
std::uint64_t content_digest(const std::string& bytes);

/// Record of one CLI run. Output paths are stored relative to the manifest's
/// own directory so reruns into different directories stay byte-identical.
struct RunManifest {
  std::string command;
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // relative paths
  std::string version = kToolkitVersion;
};

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace pnnp

#endif  // PNNP_MANIFEST_HPP
