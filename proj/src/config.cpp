#include "chemokin/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "chemokin/error.hpp"

namespace chemokin {

std::string to_string(EngineKind engine) {
  switch (engine) {
    case EngineKind::mc:
      return "mc";
    case EngineKind::ks:
      return "ks";
    case EngineKind::exks:
      return "exks";
  }
  return "?";
}

std::string to_string(Scale scale) {
  switch (scale) {
    case Scale::smoke:
      return "smoke";
    case Scale::desk:
      return "desk";
    case Scale::full:
      return "full";
  }
  return "?";
}

Scale parse_scale(std::string_view text) {
  if (text == "smoke") return Scale::smoke;
  if (text == "desk") return Scale::desk;
  if (text == "full") return Scale::full;
  throw ConfigError("unknown scale '" + std::string(text) + "' (expected smoke, desk or full)");
}

double RunConfig::alpha() const {
  if (const auto* s = std::get_if<SmallAdaptation>(&scaling)) return s->alpha;
  return params.tau / params.epsilon;
}

double RunConfig::beta() const {
  if (const auto* l = std::get_if<LargeAdaptation>(&scaling)) return l->beta;
  return params.epsilon * params.tau;
}

std::map<std::string, std::string> parse_pairs(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    while (tokens >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("malformed entry '" + token + "' (expected key=value)");
      std::string key = token.substr(0, eq);
      std::string value = token.substr(eq + 1);
      if (value.empty()) throw ConfigError("key '" + key + "' has an empty value");
      if (!out.emplace(key, value).second) throw ConfigError("key '" + key + "' given twice");
    }
  }
  return out;
}

namespace {

class Reader {
public:
  explicit Reader(std::map<std::string, std::string> pairs) : pairs_(std::move(pairs)) {}

  bool has(const std::string& key) const { return pairs_.count(key) != 0; }

  std::string text(const std::string& key) {
    const auto it = pairs_.find(key);
    if (it == pairs_.end()) throw ConfigError("missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  double number(const std::string& key) {
    const std::string v = text(key);
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || std::isnan(out)) {
      throw ConfigError("key '" + key + "' must be a number, got '" + v + "'");
    }
    return out;
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError("key '" + key + "' must be an integer");
    return static_cast<std::int64_t>(v);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("key '" + key + "' must be an unsigned integer");
    return out;
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("key '" + key + "' must be true or false");
  }

  void reject_unused() const {
    for (const auto& [key, value] : pairs_) {
      if (!used_.count(key)) throw ConfigError("unknown key '" + key + "'");
    }
  }

private:
  std::map<std::string, std::string> pairs_;
  std::set<std::string> used_;
};

std::string number_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int checked_int(std::int64_t v, const char* key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(std::string("key '") + key + "' is out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

mc::McConfig mc_profile(const ModelParams& params, Scale scale, std::uint64_t seed) {
  mc::McConfig c;
  c.params = params;
  c.seed = seed;
  c.snapshot_stride = 100;
  const double L2 = params.domain_length * params.domain_length;
  const bool one = params.dim == 1;
  c.n_cells = one ? 100 : 50;
  switch (scale) {
    case Scale::full:
      c.n_particles = one ? 720000 : 18000000;
      c.dt = 2e-4;
      c.t_end = 2.0 * L2 / params.epsilon;
      c.avg_window = 0.1 * L2 / params.epsilon;
      break;
    case Scale::desk:
      c.n_particles = one ? 100000 : 1000000;
      c.dt = 1e-3;
      c.t_end = 0.5 * L2 / params.epsilon;
      c.avg_window = 0.1 * L2 / params.epsilon;
      break;
    case Scale::smoke:
      c.n_particles = one ? 10000 : 25000;
      c.dt = 1e-3;
      c.t_end = 0.01 * L2 / params.epsilon;
      c.avg_window = 0.005 * L2 / params.epsilon;
      break;
  }
  // Keep both transition probabilities at or below one half.
  double limit = 0.5 * params.epsilon / (1.0 + params.chi);
  if (params.nu > 0.0) limit = std::min(limit, 0.5 * params.epsilon * params.nu);
  c.dt = std::min(c.dt, limit);
  return c;
}

RunConfig parse_config(std::string_view text) {
  Reader r(parse_pairs(text));
  RunConfig c;

  const std::string engine = r.text("engine");
  if (engine == "mc") {
    c.engine = EngineKind::mc;
  } else if (engine == "ks") {
    c.engine = EngineKind::ks;
  } else if (engine == "exks") {
    c.engine = EngineKind::exks;
  } else {
    throw ConfigError("key 'engine' must be mc, ks or exks, got '" + engine + "'");
  }

  ModelParams& p = c.params;
  p.dim = checked_int(r.integer("dim", 1), "dim");
  p.epsilon = r.number("epsilon");
  p.nu = r.number("nu");
  p.delta = r.number("delta");
  p.chi = r.number("chi");
  p.domain_length = r.number("L", 10.0);
  c.allow_chi_zero = r.flag("allow_chi_zero", false);

  const std::string scaling = r.has("scaling") ? r.text("scaling") : "direct";
  if (scaling == "direct") {
    c.scaling = DirectTau{r.number("tau")};
  } else if (scaling == "small") {
    c.scaling = SmallAdaptation{r.number("alpha")};
  } else if (scaling == "large") {
    c.scaling = LargeAdaptation{r.number("beta")};
  } else {
    throw ConfigError("key 'scaling' must be direct, small or large, got '" + scaling + "'");
  }

  // KS accepts alpha = inf (the beta -> 0 comparison target); tau is then unused.
  const auto* small = std::get_if<SmallAdaptation>(&c.scaling);
  const bool infinite_alpha = small && std::isinf(small->alpha) && small->alpha > 0.0;
  if (infinite_alpha && c.engine != EngineKind::ks) throw ConfigError("key 'alpha' may be inf only for engine=ks");
  p.tau = infinite_alpha ? std::numeric_limits<double>::infinity() : resolve_tau(c.scaling, p.epsilon);

  if (c.allow_chi_zero ? !(p.chi >= 0.0 && p.chi < 1.0) : !(p.chi > 0.0 && p.chi < 1.0)) {
    throw ConfigError(c.allow_chi_zero ? "key 'chi' must lie in [0, 1)"
                                       : "key 'chi' must lie in (0, 1); chi=0 needs allow_chi_zero=true");
  }
  ModelParams check = p;
  if (infinite_alpha) check.tau = 1.0;
  validate(check);

  if (c.engine == EngineKind::mc) {
    const mc::McConfig d = mc_profile(p, Scale::desk, 1);
    mc::McConfig& m = c.mc;
    m.params = p;
    m.seed = r.seed("seed", 1);
    m.n_particles = r.integer("N", d.n_particles);
    m.n_cells = checked_int(r.integer("I", d.n_cells), "I");
    m.dt = r.number("dt", d.dt);
    m.t_end = r.number("t_end", d.t_end);
    m.avg_window = r.number("avg_window", d.avg_window);
    m.snapshot_stride = checked_int(r.integer("snapshot_stride", d.snapshot_stride), "snapshot_stride");
    m.bootstrap_blocks = checked_int(r.integer("bootstrap_blocks", d.bootstrap_blocks), "bootstrap_blocks");
    // Round N up so the uniform start puts the same count in every cell.
    const std::int64_t cells = p.dim == 1 ? m.n_cells : std::int64_t{m.n_cells} * m.n_cells;
    if (m.n_particles > 0 && cells > 0) m.n_particles = (m.n_particles + cells - 1) / cells * cells;
    mc::validate(m);
  } else {
    if (p.dim != 1) throw ConfigError("key 'dim' must be 1 for the continuum solvers");
    GridSpec& g = c.grid;
    g.I = checked_int(r.integer("I", g.I), "I");
    g.dt = r.number("dt", g.dt);
    g.t_end = r.number("t_end", g.t_end);
    if (c.engine == EngineKind::exks) {
      g.K = checked_int(r.integer("K", g.K), "K");
      g.Y = r.number("Y", g.Y);
    }
    if (g.I < 4 || g.I % 2 != 0) throw ConfigError("key 'I' must be even and >= 4");
    if (c.engine == EngineKind::exks && g.K < 4) throw ConfigError("key 'K' must be >= 4");
    if (!(g.t_end >= 0.0) || std::isinf(g.t_end)) throw ConfigError("key 't_end' must be finite and >= 0");
    if (g.dt < 0.0 || std::isinf(g.dt)) throw ConfigError("key 'dt' must be finite and >= 0 (0 = automatic)");
  }
  r.reject_unused();
  return c;
}

std::string canonical_text(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  const ModelParams& p = c.params;
  kv["engine"] = to_string(c.engine);
  kv["dim"] = std::to_string(p.dim);
  kv["epsilon"] = number_text(p.epsilon);
  kv["nu"] = number_text(p.nu);
  kv["delta"] = number_text(p.delta);
  kv["chi"] = number_text(p.chi);
  kv["L"] = number_text(p.domain_length);
  kv["allow_chi_zero"] = c.allow_chi_zero ? "true" : "false";
  std::visit(
      [&kv](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DirectTau>) {
          kv["scaling"] = "direct";
          kv["tau"] = number_text(m.tau);
        } else if constexpr (std::is_same_v<T, SmallAdaptation>) {
          kv["scaling"] = "small";
          kv["alpha"] = number_text(m.alpha);
        } else {
          kv["scaling"] = "large";
          kv["beta"] = number_text(m.beta);
        }
      },
      c.scaling);
  if (c.engine == EngineKind::mc) {
    const mc::McConfig& m = c.mc;
    kv["seed"] = std::to_string(m.seed);
    kv["N"] = std::to_string(m.n_particles);
    kv["I"] = std::to_string(m.n_cells);
    kv["dt"] = number_text(m.dt);
    kv["t_end"] = number_text(m.t_end);
    kv["avg_window"] = number_text(m.avg_window);
    kv["snapshot_stride"] = std::to_string(m.snapshot_stride);
    kv["bootstrap_blocks"] = std::to_string(m.bootstrap_blocks);
  } else {
    kv["I"] = std::to_string(c.grid.I);
    kv["dt"] = number_text(c.grid.dt);
    kv["t_end"] = number_text(c.grid.t_end);
    if (c.engine == EngineKind::exks) {
      kv["K"] = std::to_string(c.grid.K);
      kv["Y"] = number_text(c.grid.Y);
    }
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

}  // namespace chemokin
