#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>

#include "chemokin/grid_profile.hpp"
#include "chemokin/model.hpp"

namespace chemokin {

/// Finite-volume grids for the 1D continuum solvers. Time is measured in the
/// continuum units (time parameter sigma = epsilon).
struct GridSpec {
  int I = 100;         ///< cells on [-L/2, L/2)
  int K = 200;         ///< internal-state cells on [-Y, Y]
  double Y = 5.0;      ///< internal-state half-width
  double dt = 0.0;     ///< <= 0 picks 0.9 of the stability limit
  double t_end = 25.0;

  double dm() const { return 2.0 * Y / K; }
  /// Centre of internal-state cell k.
  double m_center(int k) const { return -Y + (k + 0.5) * dm(); }
  /// Lower face of internal-state cell k (k = K gives +Y).
  double m_face(int k) const { return -Y + k * dm(); }
};

struct SolverStats {
  std::int64_t steps = 0;
  double t = 0.0;
  double dt = 0.0;
  /// sum_i |rho^{n+1}_i - rho^n_i| dx / dt over the last step.
  double residual = std::numeric_limits<double>::infinity();
  /// Largest |mass^{n+1} - mass^n| / mass^n seen over any single step.
  double max_mass_drift = 0.0;
  double wall_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// KS: (1 + nu) d_t rho = d_x c_d [d_x rho + kappa rho d_x M]

/// kappa = Lambda'(0) alpha / (1 + alpha); alpha = +inf gives Lambda'(0).
double ks_drift_coefficient(const ModelParams& params, double alpha);

struct KsState {
  CellGeometry geometry;
  Eigen::ArrayXd rho;
  SolverStats stats;
};

/// Explicit conservative scheme: centred diffusion, centred drift flux
/// kappa c_d (rho_i + rho_{i+1})/2 (M_{i+1} - M_i)/dx on cell-centre M.
/// The centred drift is positivity preserving for cell Peclet
/// |kappa| dx < 2, which the constructor enforces.
class KsSolver {
public:
  /// Starts from rho = 1. alpha must be > 0 or +inf.
  KsSolver(const ModelParams& params, double alpha, const GridSpec& grid);
  /// Continues from an existing state (same grid).
  KsSolver(const ModelParams& params, double alpha, const GridSpec& grid, KsState state);

  /// 0.9 of the largest positivity-preserving step.
  static double stable_dt(const ModelParams& params, double alpha, const GridSpec& grid);

  void step();
  /// Steps until stats.t >= t (last step not shortened).
  void advance_to(double t);
  const KsState& state() const { return state_; }
  double kappa() const { return kappa_; }

private:
  void init(const ModelParams& params, double alpha, const GridSpec& grid);

  KsState state_;
  double kappa_ = 0.0;
  double lambda_ = 0.0;        // c_d dt / ((1 + nu) dx^2)
  Eigen::ArrayXd drift_;       // kappa dx (M_{i+1} - M_i)/dx / 2 at face i+1/2
  Eigen::ArrayXd next_, flux_;
};

/// Runs from rho = 1 to grid.t_end.
KsState ks_solve(const ModelParams& params, double alpha, const GridSpec& grid);

// ---------------------------------------------------------------------------
// ExKS: d_t h = d_x[(c_d / Lambda) d_x (h / (1 + nu Lambda))] - d_m[((M - m)/beta) h]

struct ExksState {
  GridSpec grid;
  CellGeometry geometry;
  Eigen::ArrayXXd h;  ///< (I, K): h(i, k) at x_i, m_k
  SolverStats stats;
};

/// Uniform in x times the exact cell integrals of a triangle of unit area and
/// half-width 1.5 dm centred at m = 0; sum_k h(i, k) dm = 1 in every cell.
Eigen::ArrayXXd exks_initial_condition(const GridSpec& grid);

/// Centred x-diffusion on phi = h / (1 + nu Lambda(M_i - m_k)) with face
/// coefficient 1 / Lambda(M_{i+1/2} - m_k), donor-cell m-advection with face
/// velocity (M_i - m_{k+1/2}) / beta, periodic in x, zero flux at m = +-Y.
class ExksSolver {
public:
  ExksSolver(const ModelParams& params, double beta, const GridSpec& grid,
             std::optional<Eigen::ArrayXXd> init = std::nullopt);
  ExksSolver(const ModelParams& params, double beta, ExksState state);

  /// 0.9 / max over cells of the total outflow rate; below it every update is
  /// a convex combination, hence h stays nonnegative.
  static double stable_dt(const ModelParams& params, double beta, const GridSpec& grid);

  void step();
  void advance_to(double t);
  const ExksState& state() const { return state_; }

private:
  void setup(const ModelParams& params, double beta);

  ExksState state_;
  double dt_ = 0.0;
  Eigen::ArrayXXd weight_;    // 1 / (1 + nu Lambda(M_i - m_k))
  Eigen::ArrayXXd face_x_;    // c_d / Lambda(M_{i+1/2} - m_k) / dx^2, face i+1/2
  Eigen::ArrayXXd up_pos_;    // max(a, 0) / dm at interior m-face k+1/2, (I, K-1)
  Eigen::ArrayXXd up_neg_;    // min(a, 0) / dm
  Eigen::ArrayXXd phi_, div_;
  Eigen::ArrayXd rho_;
};

/// One explicit step; dt from state.grid (auto when <= 0).
ExksState exks_step(const ExksState& state, const ModelParams& params, double beta);

/// Runs from `init` (default exks_initial_condition) to grid.t_end.
ExksState exks_solve(const ModelParams& params, double beta, const GridSpec& grid,
                     std::optional<Eigen::ArrayXXd> init = std::nullopt);

/// rho_i = sum_k h(i, k) dm.
Eigen::ArrayXd exks_density(const ExksState& state);

struct SplitDensities {
  Eigen::ArrayXd rho_f;  ///< sum_k A0 dm, A0 = h / (1 + nu Lambda)
  Eigen::ArrayXd rho_g;  ///< sum_k nu Lambda A0 dm
};
SplitDensities exks_split_densities(const ExksState& state, const ModelParams& params);

/// Running-cell weighted mean of epsilon / Lambda(M_i - m_k).
Eigen::ArrayXd exks_run_length(const ExksState& state, const ModelParams& params);

/// Fraction of the total mass in the `bands` outermost m-cells at each end.
double exks_outer_band_fraction(const ExksState& state, int bands = 2);

/// rho, rho_f, rho_g and xi_bar of an ExKS state as a profile (xi+- missing).
GridProfile exks_profile(const ExksState& state, const ModelParams& params);

/// KS density as a profile; at y = 0 the split is rho_f = rho / (1 + nu)
/// and every run length is epsilon.
GridProfile ks_profile(const KsState& state, const ModelParams& params);

/// max |a - b| / max b between the steady ExKS density at beta_small and the
/// KS density with alpha = inf, each divided by its mean.
double ks_exks_consistency(const ModelParams& params, const GridSpec& grid, double beta_small);

}  // namespace chemokin
