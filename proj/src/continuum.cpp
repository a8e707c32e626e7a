#include "chemokin/continuum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "chemokin/error.hpp"

namespace chemokin {

namespace {

using Clock = std::chrono::steady_clock;

void validate_grid(const GridSpec& g, bool needs_m) {
  if (g.I < 4 || g.I % 2 != 0) throw ConfigError("grid I must be even and >= 4");
  if (needs_m) {
    if (g.K < 4) throw ConfigError("grid K must be >= 4");
    if (!std::isfinite(g.Y) || !(g.Y > 0.0)) throw ConfigError("grid Y must be finite and > 0");
  }
  if (!std::isfinite(g.t_end) || g.t_end < 0.0) throw ConfigError("t_end must be finite and >= 0");
  if (!std::isfinite(g.dt)) throw ConfigError("dt must be finite");
}

/// M at the face between cell i and cell i+1 (periodic: the last face sits at L/2).
double face_M(const CellGeometry& g, int i) {
  if (i == g.n - 1) return -0.5 * g.length;
  return equilibrium_M(0.5 * (g.center(i) + g.center(i + 1)));
}

double mass_drift(double before, double after) {
  return std::abs(after - before) / std::abs(before);
}

}  // namespace

// ---------------------------------------------------------------------------
// KS

double ks_drift_coefficient(const ModelParams& params, double alpha) {
  if (std::isnan(alpha) || !(alpha > 0.0)) throw ConfigError("alpha must be > 0 or inf");
  const double slope = lambda_slope_at_zero(params.delta, params.chi);
  if (std::isinf(alpha)) return slope;
  return slope * alpha / (1.0 + alpha);
}

double KsSolver::stable_dt(const ModelParams& params, double alpha, const GridSpec& grid) {
  validate(params);
  validate_grid(grid, false);
  const double dx = params.domain_length / grid.I;
  const double kappa = ks_drift_coefficient(params, alpha);
  const double peclet = std::abs(kappa) * dx;
  if (peclet >= 2.0) {
    throw CflError("KS cell Peclet |kappa| dx = " + std::to_string(peclet) + " must be < 2; refine I");
  }
  // Diagonal coefficient 1 - lambda (2 + |kappa| dx) >= 0.
  return 0.9 * (1.0 + params.nu) * dx * dx / (params.c_d() * (2.0 + peclet));
}

KsSolver::KsSolver(const ModelParams& params, double alpha, const GridSpec& grid) {
  state_.geometry = {1, grid.I, params.domain_length};
  state_.rho = Eigen::ArrayXd::Ones(grid.I);
  init(params, alpha, grid);
}

KsSolver::KsSolver(const ModelParams& params, double alpha, const GridSpec& grid, KsState state)
    : state_(std::move(state)) {
  if (state_.rho.size() != grid.I) throw ConfigError("KS state does not match grid");
  init(params, alpha, grid);
}

void KsSolver::init(const ModelParams& params, double alpha, const GridSpec& grid) {
  if (params.dim != 1) throw ConfigError("continuum solvers are one-dimensional");
  const double limit = stable_dt(params, alpha, grid) / 0.9;
  const double dt = grid.dt > 0.0 ? grid.dt : 0.9 * limit;
  if (dt > limit) {
    throw CflError("KS dt = " + std::to_string(dt) + " exceeds the stability limit " + std::to_string(limit));
  }
  kappa_ = ks_drift_coefficient(params, alpha);
  const CellGeometry& g = state_.geometry;
  const double dx = g.dx();
  lambda_ = params.c_d() * dt / ((1.0 + params.nu) * dx * dx);
  drift_.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    const int j = (i + 1) % g.n;
    // Zero across x = 0 and across the periodic seam, where |x| is equal on both sides.
    const double grad = (equilibrium_M(g.center(j)) - equilibrium_M(g.center(i))) / dx;
    drift_[i] = 0.5 * kappa_ * dx * grad;
  }
  state_.stats.dt = dt;
  next_.resize(g.n);
  flux_.resize(g.n);
}

void KsSolver::step() {
  const auto t0 = Clock::now();
  const int n = state_.geometry.n;
  const Eigen::ArrayXd& r = state_.rho;
  // flux_[i] is the outward flux (times dt/dx) through face i+1/2, positive to the right.
  for (int i = 0; i < n; ++i) {
    const int j = i + 1 == n ? 0 : i + 1;
    flux_[i] = -lambda_ * ((r[j] - r[i]) + drift_[i] * (r[i] + r[j]));
  }
  next_[0] = r[0] - (flux_[0] - flux_[n - 1]);
  for (int i = 1; i < n; ++i) next_[i] = r[i] - (flux_[i] - flux_[i - 1]);

  if (!next_.allFinite()) throw NumericalError("KS: non-finite density");
  if (next_.minCoeff() < -1e-12) throw NumericalError("KS: negative density");
  const double dx = state_.geometry.dx();
  const double before = r.sum() * dx;
  const double after = next_.sum() * dx;
  auto& s = state_.stats;
  s.max_mass_drift = std::max(s.max_mass_drift, mass_drift(before, after));
  s.residual = (next_ - r).abs().sum() * dx / s.dt;
  state_.rho.swap(next_);
  ++s.steps;
  s.t = static_cast<double>(s.steps) * s.dt;
  s.wall_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
}

void KsSolver::advance_to(double t) {
  while (state_.stats.t < t * (1.0 - 1e-14)) step();
}

KsState ks_solve(const ModelParams& params, double alpha, const GridSpec& grid) {
  KsSolver solver(params, alpha, grid);
  solver.advance_to(grid.t_end);
  return solver.state();
}

// ---------------------------------------------------------------------------
// ExKS

Eigen::ArrayXXd exks_initial_condition(const GridSpec& grid) {
  validate_grid(grid, true);
  const double dm = grid.dm();
  const double w = 1.5 * dm;
  // Antiderivative of the unit-area triangle max(0, 1 - |m|/w) / w.
  auto cdf = [w](double m) {
    const double s = std::clamp(m / w, -1.0, 1.0);
    return s <= 0.0 ? 0.5 * (1.0 + s) * (1.0 + s) : 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
  };
  Eigen::ArrayXd column(grid.K);
  for (int k = 0; k < grid.K; ++k) column[k] = (cdf(grid.m_face(k + 1)) - cdf(grid.m_face(k))) / dm;
  column /= column.sum() * dm;
  return column.transpose().replicate(grid.I, 1);
}

double ExksSolver::stable_dt(const ModelParams& params, double beta, const GridSpec& grid) {
  validate(params);
  validate_grid(grid, true);
  if (!std::isfinite(beta) || !(beta > 0.0)) throw ConfigError("beta must be finite and > 0");
  const CellGeometry g{1, grid.I, params.domain_length};
  const double dx = g.dx();
  const double dm = grid.dm();
  double worst = 0.0;
  for (int i = 0; i < grid.I; ++i) {
    const double M = equilibrium_M(g.center(i));
    const double m_left = face_M(g, (i + grid.I - 1) % grid.I);
    const double m_right = face_M(g, i);
    for (int k = 0; k < grid.K; ++k) {
      const double mk = grid.m_center(k);
      const double w = 1.0 / (1.0 + params.nu * lambda_response(M - mk, params.delta, params.chi));
      const double diff = params.c_d() * w / (dx * dx) *
                          (1.0 / lambda_response(m_left - mk, params.delta, params.chi) +
                           1.0 / lambda_response(m_right - mk, params.delta, params.chi));
      double adv = 0.0;
      if (k + 1 < grid.K) adv += std::max(M - grid.m_face(k + 1), 0.0) / beta;
      if (k > 0) adv += std::max(-(M - grid.m_face(k)), 0.0) / beta;
      worst = std::max(worst, diff + adv / dm);
    }
  }
  return 0.9 / worst;
}

ExksSolver::ExksSolver(const ModelParams& params, double beta, const GridSpec& grid,
                       std::optional<Eigen::ArrayXXd> init) {
  state_.grid = grid;
  state_.geometry = {1, grid.I, params.domain_length};
  state_.h = init ? std::move(*init) : exks_initial_condition(grid);
  setup(params, beta);
}

ExksSolver::ExksSolver(const ModelParams& params, double beta, ExksState state) : state_(std::move(state)) {
  setup(params, beta);
}

void ExksSolver::setup(const ModelParams& params, double beta) {
  if (params.dim != 1) throw ConfigError("continuum solvers are one-dimensional");
  const GridSpec& grid = state_.grid;
  const double limit = stable_dt(params, beta, grid) / 0.9;
  dt_ = grid.dt > 0.0 ? grid.dt : 0.9 * limit;
  if (dt_ > limit) {
    throw CflError("ExKS dt = " + std::to_string(dt_) + " exceeds the positivity limit " +
                   std::to_string(limit));
  }
  const int I = grid.I;
  const int K = grid.K;
  if (state_.h.rows() != I || state_.h.cols() != K) throw ConfigError("ExKS state does not match grid");
  if (!state_.h.allFinite() || state_.h.minCoeff() < 0.0) throw ConfigError("ExKS initial h must be finite and >= 0");

  const CellGeometry& g = state_.geometry;
  const double dx = g.dx();
  const double dm = grid.dm();
  weight_.resize(I, K);
  face_x_.resize(I, K);
  up_pos_.resize(I, K - 1);
  up_neg_.resize(I, K - 1);
  for (int k = 0; k < K; ++k) {
    const double mk = grid.m_center(k);
    for (int i = 0; i < I; ++i) {
      const double M = equilibrium_M(g.center(i));
      weight_(i, k) = 1.0 / (1.0 + params.nu * lambda_response(M - mk, params.delta, params.chi));
      face_x_(i, k) = params.c_d() / lambda_response(face_M(g, i) - mk, params.delta, params.chi) / (dx * dx);
    }
  }
  for (int k = 0; k + 1 < K; ++k) {
    const double mf = grid.m_face(k + 1);
    for (int i = 0; i < I; ++i) {
      const double a = (equilibrium_M(g.center(i)) - mf) / beta;
      up_pos_(i, k) = std::max(a, 0.0) / dm;
      up_neg_(i, k) = std::min(a, 0.0) / dm;
    }
  }
  phi_.resize(I, K);
  div_.resize(I, K);
  rho_ = exks_density(state_);
  state_.stats.dt = dt_;
}

void ExksSolver::step() {
  const auto t0 = Clock::now();
  const int I = state_.grid.I;
  const int K = state_.grid.K;
  Eigen::ArrayXXd& h = state_.h;

  // x-diffusion: div = -(face_{i+1/2} (phi_{i+1} - phi_i) - face_{i-1/2} (phi_i - phi_{i-1})).
  phi_ = h * weight_;
  for (int k = 0; k < K; ++k) {
    const double* p = &phi_(0, k);
    const double* f = &face_x_(0, k);
    double* d = &div_(0, k);
    double left = f[I - 1] * (p[0] - p[I - 1]);
    for (int i = 0; i < I; ++i) {
      const int j = i + 1 == I ? 0 : i + 1;
      const double right = f[i] * (p[j] - p[i]);
      d[i] = right - left;
      left = right;
    }
  }
  // m-advection, donor cell: G_{k+1/2} = a+ h_k + a- h_{k+1}.
  for (int k = 0; k + 1 < K; ++k) {
    const auto flux = (up_pos_.col(k) * h.col(k) + up_neg_.col(k) * h.col(k + 1)).eval();
    div_.col(k) -= flux;
    div_.col(k + 1) += flux;
  }
  h += dt_ * div_;

  if (!h.allFinite()) throw NumericalError("ExKS: non-finite h");
  if (h.minCoeff() < -1e-12) throw NumericalError("ExKS: negative mass beyond tolerance");

  const double dx = state_.geometry.dx();
  const Eigen::ArrayXd rho = exks_density(state_);
  auto& s = state_.stats;
  const double before = rho_.sum() * dx;
  const double after = rho.sum() * dx;
  s.max_mass_drift = std::max(s.max_mass_drift, mass_drift(before, after));
  s.residual = (rho - rho_).abs().sum() * dx / dt_;
  rho_ = rho;
  ++s.steps;
  s.t = static_cast<double>(s.steps) * dt_;
  s.wall_seconds += std::chrono::duration<double>(Clock::now() - t0).count();
}

void ExksSolver::advance_to(double t) {
  while (state_.stats.t < t * (1.0 - 1e-14)) step();
}

ExksState exks_step(const ExksState& state, const ModelParams& params, double beta) {
  ExksSolver solver(params, beta, state);
  solver.step();
  return solver.state();
}

ExksState exks_solve(const ModelParams& params, double beta, const GridSpec& grid,
                     std::optional<Eigen::ArrayXXd> init) {
  ExksSolver solver(params, beta, grid, std::move(init));
  solver.advance_to(grid.t_end);
  return solver.state();
}

Eigen::ArrayXd exks_density(const ExksState& state) {
  return state.h.rowwise().sum() * state.grid.dm();
}

namespace {

/// Lambda(M_i - m_k) over the grid.
Eigen::ArrayXXd lambda_grid(const ExksState& s, const ModelParams& p) {
  Eigen::ArrayXXd lam(s.grid.I, s.grid.K);
  for (int k = 0; k < s.grid.K; ++k) {
    for (int i = 0; i < s.grid.I; ++i) {
      lam(i, k) = lambda_response(equilibrium_M(s.geometry.center(i)) - s.grid.m_center(k), p.delta, p.chi);
    }
  }
  return lam;
}

}  // namespace

SplitDensities exks_split_densities(const ExksState& state, const ModelParams& params) {
  const Eigen::ArrayXXd lam = lambda_grid(state, params);
  const Eigen::ArrayXXd a0 = state.h / (1.0 + params.nu * lam);
  const double dm = state.grid.dm();
  return {a0.rowwise().sum() * dm, (params.nu * lam * a0).rowwise().sum() * dm};
}

Eigen::ArrayXd exks_run_length(const ExksState& state, const ModelParams& params) {
  const Eigen::ArrayXXd lam = lambda_grid(state, params);
  const Eigen::ArrayXXd a0 = state.h / (1.0 + params.nu * lam);
  const Eigen::ArrayXd num = (params.epsilon / lam * a0).rowwise().sum();
  const Eigen::ArrayXd den = a0.rowwise().sum();
  return (den > 0.0).select(num / den, kMissing);
}

double exks_outer_band_fraction(const ExksState& state, int bands) {
  const int K = state.grid.K;
  bands = std::clamp(bands, 0, K / 2);
  const double outer = state.h.leftCols(bands).sum() + state.h.rightCols(bands).sum();
  return outer / state.h.sum();
}

GridProfile exks_profile(const ExksState& state, const ModelParams& params) {
  GridProfile p = GridProfile::zeros(state.geometry);
  p.rho = exks_density(state);
  const SplitDensities split = exks_split_densities(state, params);
  p.rho_f = split.rho_f;
  p.rho_g = split.rho_g;
  p.xi_bar = exks_run_length(state, params);
  return p;
}

GridProfile ks_profile(const KsState& state, const ModelParams& params) {
  GridProfile p = GridProfile::zeros(state.geometry);
  p.rho = state.rho;
  p.rho_f = state.rho / (1.0 + params.nu);
  p.rho_g = state.rho * (params.nu / (1.0 + params.nu));
  p.xi_plus.setConstant(params.epsilon);
  p.xi_minus.setConstant(params.epsilon);
  p.xi_bar.setConstant(params.epsilon);
  return p;
}

double ks_exks_consistency(const ModelParams& params, const GridSpec& grid, double beta_small) {
  const KsState ks = ks_solve(params, std::numeric_limits<double>::infinity(), grid);
  const ExksState ex = exks_solve(params, beta_small, grid);
  const Eigen::ArrayXd a = exks_density(ex) / exks_density(ex).mean();
  const Eigen::ArrayXd b = ks.rho / ks.rho.mean();
  return (a - b).abs().maxCoeff() / b.maxCoeff();
}

}  // namespace chemokin
