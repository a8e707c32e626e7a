#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>

namespace chemokin {

/// Quiet NaN marks a missing observable (empty classifier bin). Serialized as NA.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Uniform periodic cells on [-L/2, L/2)^dim. Cell i (1D) covers
/// [-L/2 + i dx, -L/2 + (i+1) dx); 2D cells are flattened as i1 + i2 * n.
struct CellGeometry {
  int dim = 1;
  int n = 100;
  double length = 10.0;

  double dx() const { return length / n; }
  int total() const { return dim == 1 ? n : n * n; }
  /// Cell-centre coordinate along one axis; exactly antisymmetric under i -> n-1-i.
  double center(int i) const { return (i + 0.5 - 0.5 * n) * dx(); }
  /// Half-open binning: a coordinate on a face goes to the upper cell.
  int axis_index(double x) const {
    const int i = static_cast<int>(std::floor((x + 0.5 * length) / dx()));
    return i < 0 ? 0 : (i >= n ? n - 1 : i);
  }
  /// Mean particles per cell used to normalise counts, N / n^dim.
  double mean_per_cell(std::int64_t n_particles) const {
    return static_cast<double>(n_particles) / total();
  }
};

/// Per-cell observables. In 2D the arrays are flattened as i1 + i2 * n.
struct GridProfile {
  CellGeometry geometry;
  Eigen::ArrayXd rho;
  Eigen::ArrayXd rho_f;
  Eigen::ArrayXd rho_g;
  Eigen::ArrayXd xi_plus;
  Eigen::ArrayXd xi_minus;
  Eigen::ArrayXd xi_bar;
  std::int64_t snapshots = 0;
  double window = 0.0;

  static GridProfile zeros(const CellGeometry& g) {
    GridProfile p;
    p.geometry = g;
    const int c = g.total();
    p.rho = Eigen::ArrayXd::Zero(c);
    p.rho_f = Eigen::ArrayXd::Zero(c);
    p.rho_g = Eigen::ArrayXd::Zero(c);
    p.xi_plus = Eigen::ArrayXd::Constant(c, kMissing);
    p.xi_minus = Eigen::ArrayXd::Constant(c, kMissing);
    p.xi_bar = Eigen::ArrayXd::Constant(c, kMissing);
    return p;
  }

  /// sum rho_i dx^dim; equals L^dim for a normalised profile.
  double mass() const {
    const double cell = geometry.dim == 1 ? geometry.dx() : geometry.dx() * geometry.dx();
    return rho.sum() * cell;
  }
};

}  // namespace chemokin
