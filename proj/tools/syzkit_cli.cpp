#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "syzkit/cli.hpp"

namespace {

bool write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace syzkit::cli;

  CLI::App app{"syzkit: local models z0...zp = 1 + u1 + ... + uq"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  const std::pair<const char*, const char*> commands[] = {
      {"spine", "tropical spine cells and chamber raster"},
      {"amoeba", "untailored and tailored amoeba rasters"},
      {"critical", "critical manifolds of the potential vs the predicted catalog"},
      {"skeleton", "glued skeleton homology and Mayer-Vietoris check"},
      {"bside", "coordinate-ring identities"},
      {"figure", "SVG of the base plane (q = 2)"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--out", out_path, "write the result (SVG for figure) here instead of stdout");
    sub->add_option("--seed", seed, "overrides solver.seed");
    sub->add_flag("--quiet", quiet, "suppress the summary line on stderr");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  CommandResult result;
  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    result = run_command(command, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "syzkit " << command << ": " << e.what() << "\n";
    return 2;
  }

  const std::string env = dump(envelope(command, cfg, result));
  if (command == "figure") {
    if (out_path.empty()) {
      std::cout << result.svg;
    } else {
      if (!write_file(out_path, result.svg)) {
        std::cerr << "syzkit: cannot write " << out_path << "\n";
        return 2;
      }
      if (!quiet) std::cout << env;
    }
  } else if (out_path.empty()) {
    std::cout << env;
  } else if (!write_file(out_path, env)) {
    std::cerr << "syzkit: cannot write " << out_path << "\n";
    return 2;
  }
  if (!quiet) std::cerr << result.summary << (result.ok ? " [ok]" : " [FAIL]") << "\n";
  return result.ok ? 0 : 1;
}
