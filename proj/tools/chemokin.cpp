#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "chemokin/config.hpp"
#include "chemokin/diagnostics.hpp"
#include "chemokin/error.hpp"
#include "chemokin/experiment.hpp"
#include "chemokin/io.hpp"

namespace fs = std::filesystem;
using namespace chemokin;
using experiment::Json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNumerical = 3, kPartialSweep = 4 };

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GridProfile read_profile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return read_profile_csv(in);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int single_run(EngineKind expected, const fs::path& config_path, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig config = parse_config(read_text(config_path));
  if (config.engine != expected) {
    throw ConfigError("key 'engine' is " + to_string(config.engine) + " but the subcommand runs " +
                      to_string(expected));
  }
  experiment::Bundle b;
  b.runs.push_back(experiment::execute(config, "profile"));
  const Json command = {{"kind", to_string(expected) + "-run"}, {"config_file", config_path.filename().string()}};
  const fs::path dir = experiment::persist(out, command, b, seconds_since(t0));
  std::cout << dir.string() << '\n' << b.runs.front().summary.dump(2) << '\n';
  return kOk;
}

int run_preset(const std::string& name, const std::string& scale_text, const fs::path& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scale scale = parse_scale(scale_text);
  const experiment::Preset preset = experiment::make_preset(name, scale);
  const experiment::Bundle b = experiment::run_preset(preset);
  const Json command = {{"kind", "preset"}, {"preset", name}, {"scale", to_string(scale)}};
  const fs::path dir = experiment::persist(out, command, b, seconds_since(t0));
  std::cout << dir.string() << '\n';
  if (!b.derived.empty()) std::cout << b.derived.dump(2) << '\n';
  return kOk;
}

int run_sweep(const fs::path& config_dir, int jobs, const fs::path& out) {
  std::vector<experiment::SweepEntry> entries;
  const fs::path dir = experiment::sweep(config_dir, out, jobs, &entries);
  std::cout << dir.string() << '\n';
  int failed = 0;
  for (const auto& e : entries) {
    if (!e.ok) {
      ++failed;
      std::cerr << e.config << ": " << e.error << '\n';
    }
  }
  return failed ? kPartialSweep : kOk;
}

int run_replay(const fs::path& manifest_path) {
  const Json manifest = Json::parse(read_text(manifest_path));
  const experiment::ReplayReport rep = experiment::replay(manifest);
  if (rep.identical) {
    std::cout << "identical\n";
    return kOk;
  }
  for (const auto& m : rep.mismatches) std::cerr << "differs: " << m << '\n';
  return kNumerical;
}

Density parse_density(const std::string& name) {
  if (name == "rho") return Density::rho;
  if (name == "rho_f") return Density::rho_f;
  if (name == "rho_g") return Density::rho_g;
  throw ConfigError("unknown column '" + name + "'");
}

/// Mean-normalised max |a - b| / max b over matching cells.
double profile_discrepancy(const GridProfile& a, const GridProfile& b) {
  if (a.rho.size() != b.rho.size()) throw ConfigError("profiles have different cell counts");
  const Eigen::ArrayXd na = a.rho / a.rho.mean();
  const Eigen::ArrayXd nb = b.rho / b.rho.mean();
  return (na - nb).abs().maxCoeff() / nb.maxCoeff();
}

int handle(const std::function<int()>& body) {
  try {
    return body();
  } catch (const CflError& e) {
    std::cerr << "step-size error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Json::exception& e) {
    std::cerr << "malformed manifest: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chemotactic kinetic model: Monte Carlo and continuum solvers"};
  app.require_subcommand(1);
  std::string out = "runs";
  app.add_option("--out", out, "Root directory for run outputs")->capture_default_str();

  std::string config_path;
  std::function<int()> action;
  for (const EngineKind kind : {EngineKind::mc, EngineKind::ks, EngineKind::exks}) {
    auto* sub = app.add_subcommand(to_string(kind) + "-run", "Run one " + to_string(kind) + " configuration");
    sub->add_option("config", config_path, "key=value configuration file")->required();
    sub->callback([&, kind] { action = [&, kind] { return single_run(kind, config_path, out); }; });
  }

  std::string preset_name;
  std::string scale = "desk";
  auto* preset = app.add_subcommand("preset", "Reproduce a figure setting");
  preset->add_option("name", preset_name, "fig1a fig1b fig2 fig3a fig3b fig4 fig5 fig6 fig7")->required();
  preset->add_option("--scale", scale, "smoke, desk or full")->capture_default_str();
  preset->callback([&] { action = [&] { return run_preset(preset_name, scale, out); }; });

  std::string sweep_dir;
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Run every *.conf in a directory");
  sweep->add_option("config-dir", sweep_dir)->required();
  sweep->add_option("--jobs", jobs, "Concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->callback([&] { action = [&] { return run_sweep(sweep_dir, jobs, out); }; });

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  replay->add_option("manifest", manifest_path)->required();
  replay->callback([&] { action = [&] { return run_replay(manifest_path); }; });

  auto* diag = app.add_subcommand("diag", "Diagnostics on profile CSV files");
  diag->require_subcommand(1);

  std::string profile_path;
  std::string column = "rho";
  auto* curvature = diag->add_subcommand("curvature", "Centre second derivative of a 1D profile");
  curvature->add_option("profile", profile_path)->required();
  curvature->add_option("--column", column, "rho, rho_f or rho_g")->capture_default_str();
  curvature->callback([&] {
    action = [&] {
      const GridProfile p = read_profile(profile_path);
      std::cout << format_number(center_second_derivative(density(p, parse_density(column)), p.geometry.dx()))
                << '\n';
      return kOk;
    };
  });

  std::vector<std::string> collapse_paths;
  std::vector<double> betas;
  auto* collapse = diag->add_subcommand("collapse", "Rescaled-axis collapse of profiles at several beta");
  collapse->add_option("profiles", collapse_paths)->required();
  collapse->add_option("--beta", betas, "One beta per profile")->required();
  collapse->callback([&] {
    action = [&] {
      if (betas.size() != collapse_paths.size()) throw ConfigError("need one --beta per profile");
      std::vector<ScaledProfile> ps;
      for (std::size_t i = 0; i < betas.size(); ++i) {
        const GridProfile p = read_profile(collapse_paths[i]);
        ps.push_back({betas[i], p.geometry, p.rho});
      }
      const PeakAlignment pa = peak_alignment(ps);
      Json j = {{"collapse_error", rescale_collapse(ps)},
                {"rescaled_peaks", pa.rescaled_peaks},
                {"max_peak_gap", pa.max_gap},
                {"aligned", pa.aligned}};
      std::cout << j.dump(2) << '\n';
      return kOk;
    };
  });

  int axis = 0;
  double value = 0.0;
  auto* slice = diag->add_subcommand("slice", "1D slice of a 2D profile, written as a 1D profile CSV");
  slice->add_option("profile", profile_path)->required();
  slice->add_option("--axis", axis, "0 fixes x1, 1 fixes x2")->capture_default_str();
  slice->add_option("--value", value, "Fixed coordinate")->capture_default_str();
  slice->callback([&] {
    action = [&] {
      write_profile_csv(std::cout, slice_2d(read_profile(profile_path), axis, value));
      return kOk;
    };
  });

  double dr = 0.0;
  auto* radial = diag->add_subcommand("radial", "Radial average of a 2D profile");
  radial->add_option("profile", profile_path)->required();
  radial->add_option("--dr", dr, "Bin width (default: cell width)");
  radial->callback([&] {
    action = [&] {
      const GridProfile p = read_profile(profile_path);
      const RadialProfile rp = radial_profile(p, dr > 0.0 ? dr : p.geometry.dx());
      std::cout << "r,rho,rho_f,rho_g\n";
      for (Eigen::Index i = 0; i < rp.r.size(); ++i) {
        std::cout << format_number(rp.r[i]) << ',' << format_number(rp.rho[i]) << ',' << format_number(rp.rho_f[i])
                  << ',' << format_number(rp.rho_g[i]) << '\n';
      }
      return kOk;
    };
  });

  double epsilon = 0.0;
  double tau = 0.0;
  auto* marker = diag->add_subcommand("marker", "Diffusion-layer width sqrt(epsilon tau)");
  marker->add_option("--epsilon", epsilon)->required();
  marker->add_option("--tau", tau)->required();
  marker->callback([&] {
    action = [&] {
      std::cout << format_number(diffusion_layer_marker(epsilon, tau)) << '\n';
      return kOk;
    };
  });

  std::string reference_path;
  auto* consistency = diag->add_subcommand("consistency", "Mean-normalised max difference of two 1D profiles");
  consistency->add_option("profile", profile_path)->required();
  consistency->add_option("reference", reference_path)->required();
  consistency->callback([&] {
    action = [&] {
      std::cout << format_number(profile_discrepancy(read_profile(profile_path), read_profile(reference_path)))
                << '\n';
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  return handle(action);
}
