#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace poselift {

// Reproducibility sidecar written next to every CLI output file. Timings are
// quarantined here so primary outputs stay byte-stable across runs.
class RunManifest {
 public:
  RunManifest(std::string command, nlohmann::json config_snapshot);

  void set_library_hash(std::uint64_t hash);
  void set_seed(std::uint64_t seed);
  void add_timing_ms(const std::string& stage, double ms);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  // Writes <output>.manifest.json.
  void write_for(const std::filesystem::path& output) const;

 private:
  nlohmann::json doc_;
};

}  // namespace poselift
