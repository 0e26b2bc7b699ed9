#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pvgas/harness/experiments.hpp"

namespace {

std::string key_listing(const std::string& sub) {
  std::string s = "Config keys (key = value, '#' comments):\n";
  for (const auto& k : pvgas::harness::schema_for(sub)) {
    s += "  " + k.name + " = " + (k.default_value.empty() ? "(empty)" : k.default_value) + "  " + k.help + "\n";
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pvgas::harness;
  CLI::App app{"pvgas: point-vortex Gibbs ensembles, fluctuation fields and Gaussian limits"};
  app.require_subcommand(1);

  std::string config_path, out_dir, manifest_path;
  std::uint64_t seed = 1;
  int threads = 0;
  bool resume = false;

  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--seed", seed, "master seed (u64)");
    sub->add_option("--threads", threads, "OpenMP thread count")->check(CLI::NonNegativeNumber);
    sub->add_flag("--resume", resume, "continue from checkpoint.dat in the output directory");
    sub->footer(key_listing(name));
  }
  auto* rep = app.add_subcommand("replay", "re-run a manifest and check results.csv bit-for-bit");
  rep->add_option("--manifest", manifest_path, "manifest.json of the original run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", out_dir, "output directory for the re-run")->required();
  rep->add_option("--threads", threads, "OpenMP thread count")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  if (rep->parsed()) return replay(manifest_path, out_dir, threads, std::cout, std::cerr);

  RunOptions o;
  o.subcommand = app.get_subcommands().front()->get_name();
  o.out_dir = out_dir;
  o.seed = seed;
  o.threads = threads;
  o.resume = resume;
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "usage error: cannot read " << config_path << "\n";
      return kUsageError;
    }
    std::stringstream ss;
    ss << is.rdbuf();
    o.config_text = ss.str();
  }
  return run(o, std::cout, std::cerr);
}
