#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sheforge {

inline constexpr const char *kToolVersion = "sheforge 1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Record written next to every artifact. argv is the exact command line,
/// so replaying it regenerates the same bytes.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string inputs_json = "{}"; // parameter record as a JSON object
  std::vector<std::string> outputs;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = kDefaultSeed;
};

std::string manifest_to_json(const RunManifest &m);
RunManifest manifest_from_json(const std::string &text);
std::string manifest_path_for(const std::string &artifact);

} // namespace sheforge
