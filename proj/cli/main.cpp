#include "georank/georank.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian fixed-rank geometry checks"};
  app.require_subcommand(1, 1);
  std::string config_path, out_path;
  uint64_t seed = 0;
  bool no_timestamp = false;
  for (const char* name : {"check-gradients", "verify-sandwich", "flow-compare", "classify", "dims",
                           "bijection-roundtrip"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_path, "report path (default: config 'output', else stdout)");
    sub->add_flag("--no-timestamp", no_timestamp, "omit wall-clock fields from the report");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const bool has_seed = app.get_subcommands().front()->count("--seed") > 0;

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "georank: cannot read config " << config_path << "\n";
    return kExitUsage;
  }
  std::stringstream text;
  text << in.rdbuf();

  // the output path is a CLI concern; the library only sees the experiment fields
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "georank: parse error: " << e.what() << "\n";
    return kExitUsage;
  }
  const std::filesystem::path base = std::filesystem::absolute(config_path).parent_path();
  if (out_path.empty() && cfg.is_object() && cfg.contains("output")) {
    if (!cfg["output"].is_string()) {
      std::cerr << "georank: parse error: output must be a string\n";
      return kExitUsage;
    }
    out_path = (base / cfg["output"].get<std::string>()).string();
  }

  char* report = nullptr;
  int all_pass = 0;
  const georank_status st = georank_run(command.c_str(), text.str().c_str(), base.string().c_str(), seed,
                                        has_seed ? 1 : 0, no_timestamp ? 0 : 1, &report, &all_pass);
  if (st != GEORANK_OK) {
    std::cerr << "georank: " << georank_status_name(st) << " error: " << georank_last_error() << "\n";
    return kExitUsage;
  }
  const std::string body(report);
  georank_string_free(report);

  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << body)) {
      std::cerr << "georank: cannot write report " << out_path << "\n";
      return kExitUsage;
    }
  }
  if (!all_pass) {
    std::cerr << "georank: some checks failed\n";
    return kExitFail;
  }
  return 0;
}
