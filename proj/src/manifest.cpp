#include "poselift/manifest.hpp"

#include <iomanip>
#include <sstream>

#include "poselift/io.hpp"

namespace poselift {

RunManifest::RunManifest(std::string command, nlohmann::json config_snapshot) {
  doc_["command"] = std::move(command);
  doc_["config"] = std::move(config_snapshot);
  doc_["timings_ms"] = nlohmann::json::object();
  doc_["outputs"] = nlohmann::json::array();
}

void RunManifest::set_library_hash(std::uint64_t hash) {
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << hash;
  doc_["library_hash"] = hex.str();
}

void RunManifest::set_seed(std::uint64_t seed) { doc_["seed"] = seed; }

void RunManifest::add_timing_ms(const std::string& stage, double ms) {
  doc_["timings_ms"][stage] = ms;
}

void RunManifest::add_output(const std::filesystem::path& path) {
  doc_["outputs"].push_back(path.string());
}

nlohmann::json RunManifest::to_json() const { return doc_; }

void RunManifest::write_for(const std::filesystem::path& output) const {
  std::filesystem::path manifest_path = output;
  manifest_path += ".manifest.json";
  write_json(manifest_path, doc_);
}

}  // namespace poselift
