#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace syzkit::cli {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat run configuration. Text form is one `section.key = value` per line;
/// `[section]` headers prefix the keys that follow them.
struct RunConfig {
  // shape
  int p = 1;
  int q = 2;
  double L = 5.0;
  double eps = 0.5;
  double eps_pert = 1e-2;
  double chi_radius = 0.3;
  // solver
  std::uint64_t n_starts = 0;  // 0: 40 * 2^q
  std::optional<std::uint64_t> seed;
  double grad_tol = 1e-10;
  double accept_tol = 1e-7;
  double cluster_radius = 1e-3;
  double zero_rel_threshold = 1e-5;
  // raster
  double xi_min = -6.5;
  double xi_max = 2.0;
  int resolution = 0;  // 0: 200, 64, 16 for q = 1, 2, 3
  int search_grid = 32;
  // bside
  int bside_n = 1;
  int bside_m = 1;
  std::uint64_t bside_samples = 100;
  // output
  int figure_size = 480;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Every key, sorted, doubles at full precision; parse_config inverts it.
std::string serialize_config(const RunConfig& cfg);
nlohmann::json config_json(const RunConfig& cfg);

/// Round to 12 significant digits so serialized payloads are byte-stable.
nlohmann::json number(double v);
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

/// SOURCE_DATE_EPOCH as ISO-8601 UTC; the epoch itself when unset.
std::string timestamp();

struct CommandResult {
  nlohmann::json payload;
  bool ok = false;
  std::string summary;  // one line for humans
  std::string svg;      // figure only
};

CommandResult cmd_spine(const RunConfig& cfg);
CommandResult cmd_amoeba(const RunConfig& cfg);
CommandResult cmd_critical(const RunConfig& cfg);
CommandResult cmd_skeleton(const RunConfig& cfg);
CommandResult cmd_bside(const RunConfig& cfg);
CommandResult cmd_figure(const RunConfig& cfg);

CommandResult run_command(const std::string& name, const RunConfig& cfg);

/// {checksum, config, command, payload, timestamp, version}; checksum is
/// FNV-1a over the dumped payload.
nlohmann::json envelope(const std::string& command, const RunConfig& cfg, const CommandResult& r);
std::string dump(const nlohmann::json& j);

}  // namespace syzkit::cli
