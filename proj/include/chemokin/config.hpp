#pragma once

#include <map>
#include <string>
#include <string_view>

#include "chemokin/continuum.hpp"
#include "chemokin/mc_engine.hpp"
#include "chemokin/model.hpp"

namespace chemokin {

enum class EngineKind { mc, ks, exks };
std::string to_string(EngineKind engine);

/// How large the MC runs are. Desk scale targets minutes per run; full scale
/// uses the published N, dt and horizon; smoke scale is for tests.
enum class Scale { smoke, desk, full };
std::string to_string(Scale scale);
Scale parse_scale(std::string_view text);

/// A fully resolved run. Every field is materialised, so canonical_text()
/// round-trips through parse_config() to an identical configuration.
struct RunConfig {
  EngineKind engine = EngineKind::mc;
  ModelParams params;
  ScalingMode scaling = DirectTau{1.0};
  bool allow_chi_zero = false;
  mc::McConfig mc;  ///< engine = mc (mc.params mirrors params)
  GridSpec grid;    ///< engine = ks | exks
  /// KS drift parameter alpha = tau / epsilon (may be +inf).
  double alpha() const;
  /// ExKS parameter beta = epsilon tau.
  double beta() const;
};

/// Flat key=value document: tokens separated by whitespace or newlines, `#`
/// starts a comment. Unknown or repeated keys, missing required keys and
/// constraint violations throw ConfigError naming the key.
///
/// Required: engine (mc|ks|exks), epsilon, nu, delta, chi and the scaling
/// parameter: tau for scaling=direct (default), alpha for small, beta for
/// large. chi must lie in (0, 1); chi=0 needs allow_chi_zero=true.
/// MC defaults follow the desk profile (N=1e5 in 1D and 1e6 in 2D, dt=1e-3,
/// t_end=0.5 L^2/eps, window 0.1 L^2/eps); N is rounded up to a multiple of
/// the cell count. Continuum defaults are I=100, K=200, Y=5, automatic dt,
/// t_end=25.
RunConfig parse_config(std::string_view text);

/// One key=value per line, sorted, with every default written out.
std::string canonical_text(const RunConfig& config);

/// Desk/full/smoke MC settings for `params` (N, cells, dt, horizon, window).
mc::McConfig mc_profile(const ModelParams& params, Scale scale, std::uint64_t seed);

/// Splits a document into key -> value; exposed for the sweep index.
std::map<std::string, std::string> parse_pairs(std::string_view text);

}  // namespace chemokin
