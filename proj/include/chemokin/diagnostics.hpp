#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "chemokin/continuum.hpp"
#include "chemokin/grid_profile.hpp"
#include "chemokin/mc_engine.hpp"
#include "chemokin/model.hpp"

namespace chemokin {

// ---------------------------------------------------------------------------
// Centre curvature

/// (rho_{I/2+1} - rho_{I/2} - rho_{I/2-1} + rho_{I/2-2}) / dx^2 on a 1D
/// profile. Outer pairs are 2 dx apart, so on cell averages of a quadratic
/// a x^2 it returns 4a. Throws ConfigError unless the size is even and >= 4.
double center_second_derivative(const Eigen::ArrayXd& rho, double dx);

/// Stencil value of the time average together with its bootstrap standard
/// error over the contiguous blocks of an MC run.
struct CurvatureEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

enum class Density { rho, rho_f, rho_g };

const Eigen::ArrayXd& density(const GridProfile& profile, Density which);

/// Resamples the blocks with replacement `resamples` times; the seed makes
/// the estimate reproducible. Needs at least two blocks.
CurvatureEstimate center_second_derivative(const mc::McResult& result, Density which,
                                           int resamples = 2000, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Bimodality diagram

enum class Source { mc, exks };
std::string to_string(Source source);

struct BimodalityPoint {
  double param = 0.0;
  double rho_dd = 0.0;
  double rho_g_dd = 0.0;
  Source source = Source::exks;
  double rho_f_dd = 0.0;
  double rho_dd_se = kMissing;  ///< bootstrap SE (MC only)
};

enum class SweepParameter { tau, nu };
std::string to_string(SweepParameter parameter);

/// The swept value replaces tau or nu in `base`. MC points use `mc` with its
/// params replaced; ExKS points run at beta = epsilon tau on `exks`.
struct SweepPlan {
  SweepParameter parameter = SweepParameter::tau;
  std::vector<double> values;
  bool run_mc = false;
  mc::McConfig mc;
  bool run_exks = true;
  GridSpec exks;
};

/// One point per value per engine, ordered by value, MC before ExKS.
std::vector<BimodalityPoint> bimodality_sweep(const ModelParams& base, const SweepPlan& plan);

// ---------------------------------------------------------------------------
// Scaling collapse

struct ScaledProfile {
  double beta = 1.0;
  CellGeometry geometry;  ///< 1D
  Eigen::ArrayXd rho;
};

/// Each profile divided by its peak and placed on X = x / sqrt(beta) at the
/// cell centres; pairs are compared by piecewise-linear interpolation at every
/// node of either profile inside the common support. Returns the largest
/// pairwise L-inf distance (0 for fewer than two profiles). Throws ConfigError
/// when two rescaled supports do not overlap.
double rescale_collapse(const std::vector<ScaledProfile>& profiles);

/// Position of the right-hand maximum (x > 0) with parabolic refinement
/// through the neighbouring cells.
double peak_position(const Eigen::ArrayXd& rho, const CellGeometry& geometry);

struct PeakAlignment {
  std::vector<double> rescaled_peaks;  ///< peak_position / sqrt(beta)
  double max_gap = 0.0;                ///< largest pairwise |X_a - X_b|
  bool aligned = true;                 ///< every gap within the coarser rescaled cell width
};

PeakAlignment peak_alignment(const std::vector<ScaledProfile>& profiles);

// ---------------------------------------------------------------------------
// 2D views

/// The row or column of a 2D profile along x_axis = value (axis 0 fixes x1,
/// axis 1 fixes x2). A value on a cell face averages the two adjacent lines;
/// otherwise the containing line is taken. Missing xi values stay missing
/// unless only one side has data. Throws ConfigError outside [-L/2, L/2].
GridProfile slice_2d(const GridProfile& profile, int axis, double value);

struct RadialProfile {
  Eigen::ArrayXd r;    ///< bin centres
  Eigen::ArrayXd rho;  ///< mean over cells whose centre radius falls in the bin
  Eigen::ArrayXd rho_f;
  Eigen::ArrayXd rho_g;
};

/// Annular bins of width dr on cell-centre radii up to L/2.
RadialProfile radial_profile(const GridProfile& profile, double dr);

// ---------------------------------------------------------------------------

/// sqrt(epsilon tau).
double diffusion_layer_marker(double epsilon, double tau);

/// Per index j: min(max_{i<j} v_i, max_{k>j} v_k) - v_j, floored at 0 (0 at
/// both ends). A series is unimodal up to noise t when every depth is <= t;
/// a dip at j deeper than t separates two maxima.
Eigen::ArrayXd dip_depth(const Eigen::ArrayXd& values);

}  // namespace chemokin
