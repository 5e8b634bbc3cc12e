#include "sheforge/manifest.hpp"

#include "sheforge/error.hpp"

#include <json.hpp>

namespace sheforge {

std::string manifest_to_json(const RunManifest &m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["inputs"] = nlohmann::ordered_json::parse(m.inputs_json);
  j["outputs"] = m.outputs;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string &text) {
  RunManifest m;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.inputs_json = j.at("inputs").dump();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("bad manifest: ") + e.what());
  }
  return m;
}

std::string manifest_path_for(const std::string &artifact) { return artifact + ".manifest.json"; }

} // namespace sheforge
