#include "chemokin/model.hpp"

#include <sstream>

namespace chemokin {

namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ConfigError(std::string("parameter '") + name + "' must be finite");
  }
}

void require_positive(double value, const char* name) {
  require_finite(value, name);
  if (!(value > 0.0)) {
    throw ConfigError(std::string("parameter '") + name + "' must be > 0");
  }
}

}  // namespace

void validate(const ModelParams& p) {
  require_positive(p.epsilon, "epsilon");
  require_positive(p.tau, "tau");
  require_finite(p.nu, "nu");
  if (p.nu < 0.0) throw ConfigError("parameter 'nu' must be >= 0");
  require_positive(p.delta, "delta");
  require_finite(p.chi, "chi");
  if (p.chi < 0.0 || p.chi >= 1.0) throw ConfigError("parameter 'chi' must lie in [0, 1)");
  require_positive(p.domain_length, "L");
  if (p.dim != 1 && p.dim != 2) throw ConfigError("parameter 'dim' must be 1 or 2");
}

double resolve_tau(const ScalingMode& mode, double epsilon) {
  if (!std::isfinite(epsilon) || !(epsilon > 0.0)) {
    throw ConfigError("epsilon must be finite and > 0 to resolve tau");
  }
  return std::visit(
      [epsilon](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DirectTau>) {
          require_positive(m.tau, "tau");
          return m.tau;
        } else if constexpr (std::is_same_v<T, SmallAdaptation>) {
          require_positive(m.alpha, "alpha");
          return m.alpha * epsilon;
        } else {
          require_positive(m.beta, "beta");
          return m.beta / epsilon;
        }
      },
      mode);
}

std::string describe(const ScalingMode& mode) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DirectTau>) {
          os << "direct(tau=" << m.tau << ")";
        } else if constexpr (std::is_same_v<T, SmallAdaptation>) {
          os << "small(alpha=" << m.alpha << ")";
        } else {
          os << "large(beta=" << m.beta << ")";
        }
      },
      mode);
  return os.str();
}

}  // namespace chemokin
