#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "chemokin/grid_profile.hpp"
#include "chemokin/model.hpp"
#include "chemokin/rng.hpp"

namespace chemokin::mc {

enum class Phase : std::uint8_t { Running = 0, Tumbling = 1 };

/// One bacterium. The sensed value from the previous step is S(position):
/// positions are only ever read at step boundaries, so the engine recomputes
/// it instead of storing it.
template <int Dim>
struct Particle {
  Point<Dim> position = Point<Dim>::Zero();
  Point<Dim> direction = Point<Dim>::Zero();  ///< unit vector, kept while tumbling
  Phase phase = Phase::Running;
  double y = 0.0;  ///< M(S) - m

  Point<Dim> velocity() const {
    return phase == Phase::Running ? direction : Point<Dim>::Zero();
  }
  double sensed() const { return chemo_S<Dim>(position); }
};

struct McConfig {
  ModelParams params;
  std::int64_t n_particles = 100000;
  int n_cells = 100;  ///< per axis
  double dt = 1e-3;
  double t_end = 1.0;
  double avg_window = 0.1;
  int snapshot_stride = 100;
  std::uint64_t seed = 1;
  int bootstrap_blocks = 20;

  CellGeometry geometry() const { return {params.dim, n_cells, params.domain_length}; }
  std::int64_t n_steps() const;
  std::int64_t window_steps() const;
  /// Steps k (1-based) at which the ensemble is binned.
  std::vector<std::int64_t> snapshot_steps() const;
  /// dt (1 + chi) / epsilon, the largest run -> tumble probability.
  double max_stop_probability() const;
  /// dt mu_hat / epsilon; 0 when nu == 0 (no tumbling phase).
  double restart_probability() const;
};

/// Throws ConfigError (CflError for probability > 1).
void validate(const McConfig& config);

/// Structure-of-arrays particle storage; column l of `position` is particle l.
template <int Dim>
struct Ensemble {
  Eigen::Array<double, Dim, Eigen::Dynamic> position;
  Eigen::Array<double, Dim, Eigen::Dynamic> direction;
  Eigen::ArrayXd y;
  std::vector<Phase> phase;

  std::int64_t size() const { return static_cast<std::int64_t>(y.size()); }
  Particle<Dim> particle(std::int64_t l) const;
  void store(std::int64_t l, const Particle<Dim>& p);
};

// ---------------------------------------------------------------------------
// Per-particle operations. The engine's fused kernel draws exactly the same
// random words as these, so they double as a reference path in tests.

/// Equal count per cell, uniform within the cell, y = 0, all running.
template <int Dim>
Ensemble<Dim> init_ensemble(const McConfig& config);

/// Semi-implicit step of y' = (D_t S)/S - y/tau:
/// y = (y_prev + (s_now - s_prev)/s_prev) / (1 + dt/tau).
double update_internal(double y_prev, double s_prev, double s_now, double dt, double tau);

/// Same update written on M = log S; this is what the engine evaluates.
double update_internal_log(double y_prev, double m_prev, double m_now, double dt, double tau);

/// exp(z) - 1, exact to double precision for the step-sized |z| the engine sees.
inline double expm1_small(double z) {
  if (std::abs(z) > 1e-2) return std::expm1(z);
  return z * (1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 +
                                                                        z * (1.0 / 720 + z * (1.0 / 5040)))))));
}

/// Wrap one coordinate into [-L/2, L/2).
inline double wrap_periodic(double x, double length) {
  const double half = 0.5 * length;
  x = x >= half ? x - length : x;
  x = x < -half ? x + length : x;
  return x >= half ? -half : x;
}

template <int Dim>
Particle<Dim> advect(Particle<Dim> p, double dt, double length);

/// Counter layout shared by the kernel and `transition`.
namespace streams {
inline constexpr std::uint64_t kDecision = 0;              // word k%4 of block k/4
inline constexpr std::uint64_t kDirection = 1ull << 63;    // block k
inline constexpr std::uint64_t kInit = 1ull << 62;         // block 0
}  // namespace streams

/// Uniform decision word for particle l at step k.
inline std::uint32_t decision_word(const Philox4x32& rng, std::uint64_t l, std::uint64_t k) {
  return rng.draw(streams::kDecision | l, k >> 2)[k & 3];
}

/// Fresh uniform direction for particle l at step k.
template <int Dim>
Point<Dim> draw_direction(const Philox4x32& rng, std::uint64_t l, std::uint64_t k);

/// dt Lambda(y) / epsilon.
inline double stop_probability(double y, const ModelParams& p, double dt) {
  return dt / p.epsilon * lambda_response(y, p.delta, p.chi);
}

/// Run <-> tumble Markov step for particle l at step k. With nu == 0 a
/// stopping particle restarts immediately in a fresh direction.
template <int Dim>
Particle<Dim> transition(Particle<Dim> p, const Philox4x32& rng, std::uint64_t l, std::uint64_t k,
                         const ModelParams& params, double dt);

/// Single-snapshot observables: densities normalised by N / n^dim, and the
/// per-particle mean of epsilon / Lambda(y) over running particles split by
/// the sign of v . grad S. Particles on the singular point (grad M = 0) only
/// enter xi_bar.
template <int Dim>
GridProfile bin_profile(const Ensemble<Dim>& ensemble, const CellGeometry& geometry,
                        const ModelParams& params);

// ---------------------------------------------------------------------------

struct McResult {
  GridProfile average;              ///< time average over the window
  std::vector<GridProfile> blocks;  ///< contiguous-block averages of rho, rho_f, rho_g
  double tumbling_fraction = 0.0;   ///< time-averaged global fraction
  std::int64_t n_particles = 0;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
};

/// Stepper. One step is: move, bin (snapshot steps only), internal update,
/// transition. Binning sees post-move, post-update, pre-transition states;
/// the update does not change what is binned except y, which xi reads.
template <int Dim>
class Engine {
public:
  explicit Engine(const McConfig& config);

  /// Completes every step up to and including `step`.
  void advance_to(std::int64_t step);
  /// Advances to `step`, stops before its transition, and bins.
  GridProfile snapshot_at(std::int64_t step);
  McResult run();

  const Ensemble<Dim>& ensemble() const { return ensemble_; }
  std::int64_t step() const { return step_; }
  const McConfig& config() const { return config_; }

private:
  void advance_segment(std::int64_t last, bool hold_last_transition);

  McConfig config_;
  Philox4x32 rng_;
  Ensemble<Dim> ensemble_;
  std::int64_t step_ = 0;
  bool transition_pending_ = false;
};

/// Dispatches on config.params.dim.
McResult run(const McConfig& config);

/// Number of worker threads: CHEMOKIN_THREADS if set, else the OpenMP default.
int thread_count();
void set_thread_count(int n);

}  // namespace chemokin::mc
