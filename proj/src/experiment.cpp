#include "chemokin/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "chemokin/error.hpp"
#include "chemokin/io.hpp"
#include "chemokin/mc_engine.hpp"

namespace chemokin::experiment {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

Json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string label_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

Json resolved_parameters(const RunConfig& c) {
  const ModelParams& p = c.params;
  Json j;
  j["engine"] = to_string(c.engine);
  j["dim"] = p.dim;
  j["epsilon"] = number(p.epsilon);
  j["scaling"] = describe(c.scaling);
  j["tau"] = number(p.tau);
  j["alpha"] = number(c.alpha());
  j["beta"] = number(c.beta());
  j["nu"] = number(p.nu);
  j["mu_hat"] = number(p.mu_hat());
  j["delta"] = number(p.delta);
  j["chi"] = number(p.chi);
  j["L"] = number(p.domain_length);
  j["c_d"] = number(p.c_d());
  if (c.engine == EngineKind::mc) {
    const mc::McConfig& m = c.mc;
    j["N"] = m.n_particles;
    j["I"] = m.n_cells;
    j["dt"] = number(m.dt);
    j["t_end"] = number(m.t_end);
    j["avg_window"] = number(m.avg_window);
    j["snapshot_stride"] = m.snapshot_stride;
    j["bootstrap_blocks"] = m.bootstrap_blocks;
    j["seed"] = m.seed;
    j["steps"] = m.n_steps();
    j["snapshots"] = m.snapshot_steps().size();
    j["stop_probability_max"] = number(m.max_stop_probability());
    j["restart_probability"] = number(m.restart_probability());
  } else {
    j["I"] = c.grid.I;
    j["dx"] = number(p.domain_length / c.grid.I);
    j["t_end"] = number(c.grid.t_end);
    j["dt_requested"] = number(c.grid.dt);
    if (c.engine == EngineKind::exks) {
      j["K"] = c.grid.K;
      j["Y"] = number(c.grid.Y);
      j["dm"] = number(c.grid.dm());
    }
  }
  return j;
}

RunRecord execute(const RunConfig& config, const std::string& label) {
  RunRecord rec;
  rec.label = label;
  rec.config = config;
  Json s;
  const double dx = config.params.domain_length /
                    (config.engine == EngineKind::mc ? config.mc.n_cells : config.grid.I);
  switch (config.engine) {
    case EngineKind::mc: {
      const mc::McResult r = mc::run(config.mc);
      rec.profile = r.average;
      s["steps"] = r.steps;
      s["wall_seconds"] = r.wall_seconds;
      s["threads"] = mc::thread_count();
      s["snapshots"] = r.average.snapshots;
      s["tumbling_fraction"] = number(r.tumbling_fraction);
      s["particles"] = r.n_particles;
      if (config.params.dim == 1 && r.blocks.size() >= 2) {
        rec.rho_dd = center_second_derivative(r, Density::rho);
        s["rho_dd"] = number(rec.rho_dd->value);
        s["rho_dd_se"] = number(rec.rho_dd->standard_error);
      }
      break;
    }
    case EngineKind::ks: {
      const KsState st = ks_solve(config.params, config.alpha(), config.grid);
      rec.profile = ks_profile(st, config.params);
      s["steps"] = st.stats.steps;
      s["t"] = st.stats.t;
      s["dt"] = st.stats.dt;
      s["residual"] = number(st.stats.residual);
      s["max_mass_drift"] = st.stats.max_mass_drift;
      s["wall_seconds"] = st.stats.wall_seconds;
      break;
    }
    case EngineKind::exks: {
      const ExksState st = exks_solve(config.params, config.beta(), config.grid);
      rec.profile = exks_profile(st, config.params);
      s["steps"] = st.stats.steps;
      s["t"] = st.stats.t;
      s["dt"] = st.stats.dt;
      s["residual"] = number(st.stats.residual);
      s["max_mass_drift"] = st.stats.max_mass_drift;
      s["outer_band_fraction"] = number(exks_outer_band_fraction(st));
      s["wall_seconds"] = st.stats.wall_seconds;
      break;
    }
  }
  if (config.params.dim == 1) {
    if (!s.contains("rho_dd")) s["rho_dd"] = number(center_second_derivative(rec.profile.rho, dx));
    s["rho_f_dd"] = number(center_second_derivative(rec.profile.rho_f, dx));
    s["rho_g_dd"] = number(center_second_derivative(rec.profile.rho_g, dx));
  }
  s["mass"] = rec.profile.mass();
  rec.summary = s;
  rec.files.push_back({label + ".csv", profile_csv(rec.profile)});
  return rec;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

ModelParams base_params(double delta) { return {0.1, 1.0, 0.3, delta, 0.7, 10.0, 1}; }

RunConfig mc_config(ModelParams p, ScalingMode scaling, Scale scale, std::uint64_t seed) {
  RunConfig c;
  c.engine = EngineKind::mc;
  c.scaling = scaling;
  p.tau = resolve_tau(scaling, p.epsilon);
  c.params = p;
  c.mc = mc_profile(p, scale, seed);
  return c;
}

RunConfig continuum_config(EngineKind engine, ModelParams p, ScalingMode scaling, const GridSpec& grid) {
  RunConfig c;
  c.engine = engine;
  c.scaling = scaling;
  const auto* small = std::get_if<SmallAdaptation>(&scaling);
  p.tau = small && std::isinf(small->alpha) ? std::numeric_limits<double>::infinity()
                                             : resolve_tau(scaling, p.epsilon);
  c.params = p;
  c.grid = grid;
  return c;
}

GridSpec ks_grid(Scale scale) {
  GridSpec g;
  g.I = 100;
  g.t_end = scale == Scale::smoke ? 1.0 : 200.0;
  return g;
}

}  // namespace

GridSpec preset_grid(Scale scale, double beta) {
  GridSpec g;
  // I matches the MC cell count so profiles overlay cell by cell.
  g.I = 100;
  if (scale == Scale::smoke) {
    g.K = 40;
    g.t_end = 1.0;
    return g;
  }
  g.K = 800;
  g.t_end = 60.0 * std::max(1.0, beta);
  return g;
}

std::vector<std::string> preset_names() {
  return {"fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7"};
}

Preset make_preset(const std::string& name, Scale scale) {
  Preset pr;
  pr.name = name;
  pr.scale = scale;
  std::uint64_t seed = 1;
  const auto add = [&pr](std::string label, RunConfig c) { pr.runs.push_back({std::move(label), std::move(c)}); };

  if (name == "fig1a") {
    for (const double a : {0.25, 1.0, 4.0}) {
      const ModelParams p = base_params(1.25);
      add("mc_alpha" + label_number(a), mc_config(p, SmallAdaptation{a}, scale, seed++));
      add("ks_alpha" + label_number(a), continuum_config(EngineKind::ks, p, SmallAdaptation{a}, ks_grid(scale)));
    }
  } else if (name == "fig1b" || name == "fig2") {
    for (const double b : {0.2, 0.5, 1.0, 2.0}) {
      const ModelParams p = base_params(1.25);
      add("mc_beta" + label_number(b), mc_config(p, LargeAdaptation{b}, scale, seed++));
      add("exks_beta" + label_number(b),
          continuum_config(EngineKind::exks, p, LargeAdaptation{b}, preset_grid(scale, b)));
    }
  } else if (name == "fig3a" || name == "fig3b") {
    const bool tau_sweep = name == "fig3a";
    const std::vector<double> values = tau_sweep ? std::vector<double>{0.02, 0.05, 0.1, 1.0, 5.0, 10.0, 20.0}
                                                 : std::vector<double>{0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    for (const double v : values) {
      ModelParams p = base_params(1.25);
      double tau = 10.0;
      if (tau_sweep) {
        tau = v;
      } else {
        p.nu = v;
      }
      const std::string tag = (tau_sweep ? "tau" : "nu") + label_number(v);
      add("mc_" + tag, mc_config(p, DirectTau{tau}, scale, seed++));
      add("exks_" + tag,
          continuum_config(EngineKind::exks, p, DirectTau{tau}, preset_grid(scale, p.epsilon * tau)));
    }
  } else if (name == "fig4") {
    ModelParams p{0.1, 10.0, 0.3, 0.1, 0.9, 10.0, 2};
    add("mc_2d", mc_config(p, DirectTau{10.0}, scale, seed++));
  } else if (name == "fig5") {
    for (const double tau : {1.0, 5.0, 10.0}) {
      const ModelParams p = base_params(0.25);
      add("mc_tau" + label_number(tau), mc_config(p, DirectTau{tau}, scale, seed++));
      add("exks_tau" + label_number(tau),
          continuum_config(EngineKind::exks, p, DirectTau{tau}, preset_grid(scale, p.epsilon * tau)));
    }
  } else if (name == "fig6") {
    for (const double b : {0.5, 1.0, 2.0}) {
      const ModelParams p = base_params(0.25);
      add("exks_beta" + label_number(b),
          continuum_config(EngineKind::exks, p, LargeAdaptation{b}, preset_grid(scale, b)));
      add("mc_beta" + label_number(b), mc_config(p, LargeAdaptation{b}, scale, seed++));
    }
  } else if (name == "fig7") {
    for (const double b : {0.2, 0.5, 1.0}) {
      ModelParams p = base_params(0.25);
      add("exks_beta" + label_number(b),
          continuum_config(EngineKind::exks, p, LargeAdaptation{b}, preset_grid(scale, b)));
      for (const double eps : {0.2, 0.1, 0.05}) {
        p.epsilon = eps;
        add("mc_beta" + label_number(b) + "_eps" + label_number(eps),
            mc_config(p, LargeAdaptation{b}, scale, seed++));
      }
    }
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return pr;
}

namespace {

const RunRecord& find(const std::vector<RunRecord>& runs, const std::string& label) {
  for (const auto& r : runs) {
    if (r.label == label) return r;
  }
  throw std::logic_error("preset run '" + label + "' missing");
}

double l1_distance(const GridProfile& a, const GridProfile& b) {
  return (a.rho - b.rho).abs().sum() * a.geometry.dx();
}

/// Long-format overlay of MC and continuum densities on the shared cell centres.
OutputFile overlay_table(const std::string& file, const std::string& param, const std::vector<double>& values,
                         const std::vector<RunRecord>& runs, const std::string& mc_prefix,
                         const std::string& cont_prefix, Json& derived) {
  std::ostringstream os;
  os << param << ",x,rho_mc,rho_f_mc,rho_g_mc,rho_cont,rho_f_cont,rho_g_cont\n";
  Json l1 = Json::object();
  for (const double v : values) {
    const RunRecord& m = find(runs, mc_prefix + label_number(v));
    const RunRecord& c = find(runs, cont_prefix + label_number(v));
    const CellGeometry& g = m.profile.geometry;
    if (g.n != c.profile.geometry.n) throw ConfigError("overlay needs matching grids");
    for (int i = 0; i < g.n; ++i) {
      os << format_number(v) << ',' << format_number(g.center(i)) << ',' << format_number(m.profile.rho[i]) << ','
         << format_number(m.profile.rho_f[i]) << ',' << format_number(m.profile.rho_g[i]) << ','
         << format_number(c.profile.rho[i]) << ',' << format_number(c.profile.rho_f[i]) << ','
         << format_number(c.profile.rho_g[i]) << '\n';
    }
    l1[label_number(v)] = l1_distance(m.profile, c.profile);
  }
  derived["l1_mc_vs_continuum"] = l1;
  return {file, os.str()};
}

std::vector<BimodalityPoint> bimodality_points(const Preset& pr, const std::vector<RunRecord>& runs) {
  std::vector<BimodalityPoint> pts;
  for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
    const RunRecord& m = runs[i];
    const RunRecord& e = runs[i + 1];
    const double v = pr.name == "fig3a" ? m.config.params.tau : m.config.params.nu;
    for (const RunRecord* r : {&m, &e}) {
      BimodalityPoint pt;
      pt.param = v;
      pt.source = r->config.engine == EngineKind::mc ? Source::mc : Source::exks;
      pt.rho_dd = r->summary["rho_dd"].get<double>();
      pt.rho_g_dd = r->summary["rho_g_dd"].get<double>();
      pt.rho_f_dd = r->summary["rho_f_dd"].get<double>();
      if (r->rho_dd) pt.rho_dd_se = r->rho_dd->standard_error;
      pts.push_back(pt);
    }
  }
  return pts;
}

}  // namespace

Bundle run_preset(const Preset& pr) {
  Bundle b;
  for (const auto& run : pr.runs) b.runs.push_back(execute(run.config, run.label));
  Json& d = b.derived;

  if (pr.name == "fig1a") {
    b.tables.push_back(overlay_table("overlay.csv", "alpha", {0.25, 1.0, 4.0}, b.runs, "mc_alpha", "ks_alpha", d));
  } else if (pr.name == "fig1b" || pr.name == "fig2") {
    b.tables.push_back(
        overlay_table("overlay.csv", "beta", {0.2, 0.5, 1.0, 2.0}, b.runs, "mc_beta", "exks_beta", d));
  } else if (pr.name == "fig3a" || pr.name == "fig3b") {
    const auto pts = bimodality_points(pr, b.runs);
    b.tables.push_back({"bimodality.csv", bimodality_csv(pts)});
    Json se = Json::array();
    for (const auto& pt : pts) {
      if (pt.source == Source::mc) se.push_back({{"param", pt.param}, {"rho_dd_se", number(pt.rho_dd_se)}});
    }
    d["mc_rho_dd_standard_errors"] = se;
  } else if (pr.name == "fig4") {
    const GridProfile& p = b.runs.front().profile;
    b.tables.push_back({"slice_x1_0.csv", profile_csv(slice_2d(p, 0, 0.0))});
    const RadialProfile rp = radial_profile(p, p.geometry.dx());
    std::ostringstream os;
    os << "r,rho,rho_f,rho_g\n";
    for (Eigen::Index i = 0; i < rp.r.size(); ++i) {
      os << format_number(rp.r[i]) << ',' << format_number(rp.rho[i]) << ',' << format_number(rp.rho_f[i]) << ','
         << format_number(rp.rho_g[i]) << '\n';
    }
    b.tables.push_back({"radial.csv", os.str()});
  } else if (pr.name == "fig5") {
    std::ostringstream os;
    os << "tau,marker\n";
    for (const double tau : {1.0, 5.0, 10.0}) {
      os << format_number(tau) << ',' << format_number(diffusion_layer_marker(0.1, tau)) << '\n';
    }
    b.tables.push_back({"markers.csv", os.str()});
  } else if (pr.name == "fig6") {
    std::vector<ScaledProfile> exks;
    std::vector<ScaledProfile> mc;
    std::ostringstream os;
    os << "beta,source,x,x_rescaled,rho_normalized\n";
    for (const auto& r : b.runs) {
      const double beta = r.config.beta();
      const ScaledProfile sp{beta, r.profile.geometry, r.profile.rho};
      (r.config.engine == EngineKind::mc ? mc : exks).push_back(sp);
      const double peak = r.profile.rho.maxCoeff();
      const std::string src = r.config.engine == EngineKind::mc ? "MC" : "ExKS";
      for (int i = 0; i < sp.geometry.n; ++i) {
        const double x = sp.geometry.center(i);
        os << format_number(beta) << ',' << src << ',' << format_number(x) << ','
           << format_number(x / std::sqrt(beta)) << ',' << format_number(sp.rho[i] / peak) << '\n';
      }
    }
    b.tables.push_back({"collapse.csv", os.str()});
    const PeakAlignment pa = peak_alignment(exks);
    d["exks_collapse_error"] = rescale_collapse(exks);
    d["exks_rescaled_peaks"] = pa.rescaled_peaks;
    d["exks_peak_gap"] = pa.max_gap;
    d["exks_peaks_aligned"] = pa.aligned;
    d["mc_collapse_error"] = rescale_collapse(mc);
  } else if (pr.name == "fig7") {
    std::ostringstream os;
    os << "beta,epsilon,l1\n";
    for (const double beta : {0.2, 0.5, 1.0}) {
      const RunRecord& e = find(b.runs, "exks_beta" + label_number(beta));
      for (const double eps : {0.2, 0.1, 0.05}) {
        const RunRecord& m = find(b.runs, "mc_beta" + label_number(beta) + "_eps" + label_number(eps));
        os << format_number(beta) << ',' << format_number(eps) << ','
           << format_number(l1_distance(m.profile, e.profile)) << '\n';
      }
    }
    b.tables.push_back({"l1.csv", os.str()});
  }
  return b;
}

// ---------------------------------------------------------------------------
// Manifests and run directories

namespace {

Json file_entry(const OutputFile& f) {
  return {{"file", f.name}, {"sha256", sha256_hex(f.content)}, {"bytes", f.content.size()}};
}

std::string utc_stamp(const char* format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_bundle(const fs::path& dir, const Json& command, const Bundle& bundle, double wall_seconds) {
  fs::create_directories(dir);
  for (const auto& r : bundle.runs) {
    for (const auto& f : r.files) write_file(dir / f.name, f.content);
  }
  for (const auto& f : bundle.tables) write_file(dir / f.name, f.content);
  write_file(dir / "manifest.json", make_manifest(command, bundle, wall_seconds).dump(2) + "\n");
}

fs::path unique_dir(const fs::path& root, const std::string& base) {
  fs::path dir = root / base;
  for (int k = 1; fs::exists(dir); ++k) dir = root / (base + "-" + std::to_string(k));
  return dir;
}

}  // namespace

std::string identity_digest(const Json& command, const Bundle& bundle) {
  std::string text = command.dump();
  for (const auto& r : bundle.runs) text += "\n" + r.label + "\n" + canonical_text(r.config);
  return sha256_hex(text);
}

Json make_manifest(const Json& command, const Bundle& bundle, double wall_seconds) {
  Json m;
  m["artifact_version"] = kArtifactVersion;
  m["created_utc"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
  m["command"] = command;
  m["threads"] = mc::thread_count();
  m["wall_seconds"] = wall_seconds;
  Json runs = Json::array();
  Json outputs = Json::array();
  for (const auto& r : bundle.runs) {
    Json j;
    j["label"] = r.label;
    j["config"] = canonical_text(r.config);
    j["parameters"] = resolved_parameters(r.config);
    j["summary"] = r.summary;
    Json files = Json::array();
    for (const auto& f : r.files) {
      files.push_back(file_entry(f));
      outputs.push_back(file_entry(f));
    }
    j["outputs"] = files;
    runs.push_back(j);
  }
  m["runs"] = runs;
  Json tables = Json::array();
  for (const auto& f : bundle.tables) {
    tables.push_back(file_entry(f));
    outputs.push_back(file_entry(f));
  }
  m["tables"] = tables;
  m["derived"] = bundle.derived;
  m["outputs"] = outputs;
  return m;
}

fs::path persist(const fs::path& root, const Json& command, const Bundle& bundle, double wall_seconds) {
  fs::create_directories(root);
  const std::string base = utc_stamp("%Y%m%dT%H%M%SZ") + "-" + identity_digest(command, bundle).substr(0, 12);
  const fs::path final_dir = unique_dir(root, base);
  const fs::path staging = root / ("." + final_dir.filename().string() + ".partial");
  try {
    write_bundle(staging, command, bundle, wall_seconds);
    fs::rename(staging, final_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  return final_dir;
}

ReplayReport replay(const Json& manifest) {
  const Json& command = manifest.at("command");
  const std::string kind = command.at("kind").get<std::string>();
  Bundle b;
  if (kind == "preset") {
    const Preset pr = make_preset(command.at("preset").get<std::string>(),
                                  parse_scale(command.at("scale").get<std::string>()));
    const Json& runs = manifest.at("runs");
    if (runs.size() != pr.runs.size()) throw ConfigError("manifest does not match the preset definition");
    for (std::size_t i = 0; i < pr.runs.size(); ++i) {
      if (runs[i].at("config").get<std::string>() != canonical_text(pr.runs[i].config)) {
        throw ConfigError("manifest run '" + pr.runs[i].label + "' does not match the preset definition");
      }
    }
    b = run_preset(pr);
  } else {
    for (const auto& r : manifest.at("runs")) {
      b.runs.push_back(execute(parse_config(r.at("config").get<std::string>()), r.at("label").get<std::string>()));
    }
  }
  std::map<std::string, std::string> fresh;
  for (const auto& r : b.runs) {
    for (const auto& f : r.files) fresh[f.name] = sha256_hex(f.content);
  }
  for (const auto& f : b.tables) fresh[f.name] = sha256_hex(f.content);

  ReplayReport rep;
  for (const auto& o : manifest.at("outputs")) {
    const std::string name = o.at("file").get<std::string>();
    const auto it = fresh.find(name);
    if (it == fresh.end() || it->second != o.at("sha256").get<std::string>()) {
      rep.identical = false;
      rep.mismatches.push_back(name);
    }
  }
  return rep;
}

fs::path sweep(const fs::path& config_dir, const fs::path& root, int width, std::vector<SweepEntry>* entries_out) {
  if (!fs::is_directory(config_dir)) throw ConfigError("sweep: '" + config_dir.string() + "' is not a directory");
  if (width < 1) throw ConfigError("sweep parallelism must be >= 1");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(config_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".conf") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<std::string> texts;
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    texts.push_back(ss.str());
    all += f.filename().string() + "\n" + texts.back() + "\n";
  }

  fs::create_directories(root);
  const std::string base = utc_stamp("%Y%m%dT%H%M%SZ") + "-" + sha256_hex("sweep\n" + all).substr(0, 12);
  const fs::path final_dir = unique_dir(root, base);
  const fs::path staging = root / ("." + final_dir.filename().string() + ".partial");
  fs::create_directories(staging);

  std::vector<SweepEntry> entries(files.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      SweepEntry& e = entries[i];
      e.config = files[i].filename().string();
      const std::string sub = files[i].stem().string();
      const fs::path dir = staging / sub;
      try {
        const auto t0 = Clock::now();
        Bundle b;
        b.runs.push_back(execute(parse_config(texts[i]), "profile"));
        const Json command = {{"kind", to_string(b.runs.front().config.engine) + "-run"},
                              {"config_file", e.config}};
        write_bundle(dir, command, b, std::chrono::duration<double>(Clock::now() - t0).count());
        for (const auto& f : b.runs.front().files) e.digests.push_back(sha256_hex(f.content));
        e.run_dir = sub;
        e.ok = true;
      } catch (const std::exception& ex) {
        std::error_code ec;
        fs::remove_all(dir, ec);
        e.error = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(width), std::max<std::size_t>(1, files.size())));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  Json index;
  index["artifact_version"] = kArtifactVersion;
  index["created_utc"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
  index["config_dir"] = fs::absolute(config_dir).string();
  index["parallelism"] = width;
  Json list = Json::array();
  for (const auto& e : entries) {
    Json j = {{"config", e.config}, {"ok", e.ok}};
    if (e.ok) {
      j["run_dir"] = e.run_dir;
      j["sha256"] = e.digests;
    } else {
      j["error"] = e.error;
    }
    list.push_back(j);
  }
  index["runs"] = list;
  write_file(staging / "index.json", index.dump(2) + "\n");
  fs::rename(staging, final_dir);
  if (entries_out) *entries_out = entries;
  return final_dir;
}

}  // namespace chemokin::experiment
