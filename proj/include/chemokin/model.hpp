#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "chemokin/error.hpp"

namespace chemokin {

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;

/// Nondimensional model parameters shared by every engine.
///
/// `nu == 0` selects the instantaneous-tumble model; `chi == 0` is admitted as
/// the no-chemotaxis control. Call validate() before handing the struct to an
/// engine (all engines do so themselves).
struct ModelParams {
  double epsilon = 0.1;        ///< mean run length
  double tau = 1.0;            ///< adaptation time
  double nu = 0.0;             ///< mean tumbling duration, 1/mu_hat
  double delta = 1.0;          ///< response stiffness
  double chi = 0.0;            ///< modulation amplitude, [0, 1)
  double domain_length = 10.0; ///< L
  int dim = 1;

  /// Rate of leaving the tumbling state; +inf when nu == 0.
  double mu_hat() const {
    return nu > 0.0 ? 1.0 / nu : std::numeric_limits<double>::infinity();
  }
  bool has_tumbling_phase() const { return nu > 0.0; }
  /// Velocity-average diffusion constant <v (x) v> = c_d I.
  double c_d() const { return 1.0 / dim; }
};

/// Throws ConfigError on any non-finite or out-of-range field.
void validate(const ModelParams& params);

// ---------------------------------------------------------------------------
// Response function and tumbling-rate modulation

/// F(X) = chi X / sqrt(1 + X^2). Odd, increasing, bounded by +-chi.
template <typename Scalar>
inline Scalar response_F(Scalar x, Scalar chi) {
  using std::sqrt;
  return chi * x / sqrt(Scalar(1) + x * x);
}

/// Lambda_delta(y) = 1 - F(y / delta), with y = M(S) - m.
template <typename Scalar>
inline Scalar lambda_response(Scalar y, Scalar delta, Scalar chi) {
  return Scalar(1) - response_F<Scalar>(y / delta, chi);
}

/// Coefficient-wise Lambda over an Eigen array expression.
template <typename Derived>
inline auto lambda_response(const Eigen::ArrayBase<Derived>& y, double delta, double chi) {
  const auto x = y.derived() / delta;
  return (1.0 - chi * x / (1.0 + x.square()).sqrt()).eval();
}

/// Lambda'(0) = -chi / delta.
inline double lambda_slope_at_zero(double delta, double chi) { return -chi / delta; }

// ---------------------------------------------------------------------------
// Adaptation-time scaling

struct DirectTau {
  double tau;
};
/// tau = alpha * epsilon (adaptation comparable to the run duration).
struct SmallAdaptation {
  double alpha;
};
/// tau = beta / epsilon (adaptation comparable to the diffusion time).
struct LargeAdaptation {
  double beta;
};

using ScalingMode = std::variant<DirectTau, SmallAdaptation, LargeAdaptation>;

double resolve_tau(const ScalingMode& mode, double epsilon);
std::string describe(const ScalingMode& mode);

// ---------------------------------------------------------------------------
// Prescribed chemoattractant field S = exp(-|x|), M(S) = log S = -|x|

/// M at a position; -|x| in 1D, -r in 2D.
inline double equilibrium_M(double x) { return -std::abs(x); }

template <int Dim>
inline double equilibrium_M(const Point<Dim>& x) {
  if constexpr (Dim == 1) {
    return -std::abs(x[0]);
  } else {
    return -x.norm();
  }
}

template <int Dim>
inline double chemo_S(const Point<Dim>& x) {
  return std::exp(equilibrium_M<Dim>(x));
}

/// grad M; the zero vector exactly at the singular point (x = 0 or r = 0).
template <int Dim>
inline Point<Dim> grad_M(const Point<Dim>& x) {
  if constexpr (Dim == 1) {
    const double s = x[0] > 0.0 ? -1.0 : (x[0] < 0.0 ? 1.0 : 0.0);
    return Point<1>(s);
  } else {
    const double r = x.norm();
    if (r == 0.0) return Point<Dim>::Zero();
    return -x / r;
  }
}

}  // namespace chemokin
