#include "pvgas/harness/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "pvgas/rng.hpp"

namespace pvgas::harness {

namespace {

std::string digest(const void* data, std::size_t size) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, md, &len, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace

std::string sha256_hex(const std::string& data) { return digest(data.data(), data.size()); }

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return sha256_hex(ss.str());
}

std::string utc_timestamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string ExperimentManifest::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["tool_version"] = tool_version;
  j["seed"] = seed;
  j["rng"] = {{"algorithm", Rng::kAlgorithm},
              {"key", "master seed (64 bit)"},
              {"counter", "stream id (high 64 bits) and block index (low 64 bits)"},
              {"stream_derivation", "splitmix64 finalizer of a * golden + b"}};
  j["threads"] = threads;
  j["config_text"] = config_text;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::istringstream ls(config_text);
  for (std::string line; std::getline(ls, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) params[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["parameters"] = params;
  j["started"] = started;
  j["finished"] = finished;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["summary"] = summary;
  j["exit_code"] = exit_code;
  return j.dump(2) + "\n";
}

ExperimentManifest ExperimentManifest::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ExperimentManifest m;
  m.experiment = j.at("experiment").get<std::string>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.threads = j.value("threads", 1);
  m.config_text = j.at("config_text").get<std::string>();
  m.started = j.value("started", "");
  m.finished = j.value("finished", "");
  m.inputs = j.value("inputs", std::map<std::string, std::string>{});
  m.outputs = j.value("outputs", std::map<std::string, std::string>{});
  m.summary = j.value("summary", std::map<std::string, std::string>{});
  m.exit_code = j.value("exit_code", 0);
  return m;
}

void ExperimentManifest::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_json();
}

ExperimentManifest ExperimentManifest::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

}  // namespace pvgas::harness
