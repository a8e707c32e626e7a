#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemokin/config.hpp"
#include "chemokin/diagnostics.hpp"
#include "chemokin/grid_profile.hpp"

namespace chemokin::experiment {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "1.0.0";

struct OutputFile {
  std::string name;
  std::string content;
};

/// One engine run: its resolved configuration, the profile it produced and
/// the files written for it.
struct RunRecord {
  std::string label;
  RunConfig config;
  GridProfile profile;
  std::optional<CurvatureEstimate> rho_dd;  ///< MC only, with bootstrap SE
  Json summary;                             ///< resolved parameters and run statistics
  std::vector<OutputFile> files;
};

/// Runs one configuration; writes `<label>.csv`.
RunRecord execute(const RunConfig& config, const std::string& label);

/// Resolved physics and engine parameters, including derived ones
/// (tau, mu_hat, alpha, beta, actual N, grids, seed, stride).
Json resolved_parameters(const RunConfig& config);

struct PresetRun {
  std::string label;
  RunConfig config;
};

struct Preset {
  std::string name;
  Scale scale = Scale::desk;
  std::vector<PresetRun> runs;
};

/// fig1a, fig1b, fig2, fig3a, fig3b, fig4, fig5, fig6, fig7.
std::vector<std::string> preset_names();

/// Throws ConfigError for an unknown name.
Preset make_preset(const std::string& name, Scale scale);

/// MC-free continuum grid used by presets at `scale` for a given beta.
GridSpec preset_grid(Scale scale, double beta);

struct Bundle {
  std::vector<RunRecord> runs;
  std::vector<OutputFile> tables;  ///< derived tables (overlay, bimodality, collapse, ...)
  Json derived = Json::object();
};

Bundle run_preset(const Preset& preset);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Manifest for a finished command. `command` carries the subcommand and
/// its arguments (preset name and scale, config path, ...).
Json make_manifest(const Json& command, const Bundle& bundle, double wall_seconds);

/// Every file of the bundle plus manifest.json into root/<UTC timestamp>-<digest>.
/// Files are staged in a hidden sibling directory and renamed into place, so
/// a failed command leaves nothing behind.
std::filesystem::path persist(const std::filesystem::path& root, const Json& command, const Bundle& bundle,
                              double wall_seconds);

/// sha256 of the command and every run's canonical configuration.
std::string identity_digest(const Json& command, const Bundle& bundle);

struct ReplayReport {
  bool identical = true;
  std::vector<std::string> mismatches;  ///< file names whose digest differs
};

/// Re-executes the runs recorded in a manifest and compares output digests.
ReplayReport replay(const Json& manifest);

struct SweepEntry {
  std::string config;  ///< file name
  bool ok = false;
  std::string error;
  std::string run_dir;  ///< relative to the sweep directory
  std::vector<std::string> digests;
};

/// Runs every *.conf in `config_dir` (sorted by name) with up to `width`
/// concurrent runs; each run persists into its own subdirectory of the
/// sweep directory created under `root`. Writes index.json there.
std::filesystem::path sweep(const std::filesystem::path& config_dir, const std::filesystem::path& root, int width,
                            std::vector<SweepEntry>* entries = nullptr);

}  // namespace chemokin::experiment
