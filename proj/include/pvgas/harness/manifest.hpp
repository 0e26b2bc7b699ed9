#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace pvgas::harness {

inline constexpr const char* kToolVersion = "1.0.0";

std::string sha256_hex(const std::string& data);
/// Throws std::runtime_error if the file cannot be read.
std::string sha256_file(const std::string& path);
/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

struct ExperimentManifest {
  std::string experiment;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string config_text;  // canonical key = value lines
  std::string started;
  std::string finished;
  std::map<std::string, std::string> inputs;   // name -> sha256
  std::map<std::string, std::string> outputs;  // file name -> sha256
  std::map<std::string, std::string> summary;  // free-form scalar results
  int exit_code = 0;

  std::string to_json() const;
  static ExperimentManifest from_json(const std::string& text);
  void save_file(const std::string& path) const;
  static ExperimentManifest load_file(const std::string& path);
};

}  // namespace pvgas::harness
