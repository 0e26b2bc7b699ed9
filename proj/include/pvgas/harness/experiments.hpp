#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pvgas/harness/config.hpp"

namespace pvgas::harness {

enum ExitCode : int { kOk = 0, kInvariantFailure = 1, kUsageError = 2, kNumericAbort = 3 };

/// Tidy result table written as results.csv (full-precision decimals).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string csv() const;
};

std::string cell(double v);
std::string cell(std::int64_t v);
std::string cell(std::size_t v);
std::string cell(int v);
std::string cell(bool v);

struct RunOptions {
  std::string subcommand;
  std::string config_text;  // contents of --config (may be empty: all defaults)
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: OpenMP default
  bool resume = false;
};

const std::vector<std::string>& subcommands();
/// Throws ConfigError for an unknown subcommand.
const Schema& schema_for(const std::string& subcommand);

/// Runs one experiment and writes results.csv, manifest.json and checkpoint.dat under out_dir.
/// Never throws; failures map to the exit codes above with a message on `log`.
int run(const RunOptions& options, std::ostream& out, std::ostream& log);

/// Re-runs the experiment recorded in a manifest and compares the new results.csv digest.
int replay(const std::string& manifest_path, const std::string& out_dir, int threads, std::ostream& out,
           std::ostream& log);

/// Append-only record of completed work units (ensemble members or chains) for --resume.
class Checkpoint {
 public:
  /// With `resume`, loads a matching checkpoint (same experiment and run key) if present;
  /// a checkpoint for a different run raises ConfigError. Otherwise starts empty.
  Checkpoint(std::string path, std::string experiment, std::string run_key, bool resume);

  bool done(std::size_t unit) const { return payloads_.count(unit) != 0; }
  const std::vector<double>& payload(std::size_t unit) const { return payloads_.at(unit); }
  std::size_t completed() const { return payloads_.size(); }
  void record(std::size_t unit, const std::vector<double>& payload);

 private:
  std::string path_;
  std::map<std::size_t, std::vector<double>> payloads_;
};

}  // namespace pvgas::harness
