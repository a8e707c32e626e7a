#include "chemokin/mc_engine.hpp"

#include <omp.h>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "chemokin/error.hpp"

namespace chemokin::mc {

// ---------------------------------------------------------------------------
// McConfig

std::int64_t McConfig::n_steps() const { return std::llround(t_end / dt); }

std::int64_t McConfig::window_steps() const { return std::llround(avg_window / dt); }

std::vector<std::int64_t> McConfig::snapshot_steps() const {
  std::vector<std::int64_t> steps;
  const std::int64_t last = n_steps();
  const std::int64_t first = last - window_steps();
  const std::int64_t stride = snapshot_stride;
  for (std::int64_t k = (first / stride + 1) * stride; k <= last; k += stride) {
    if (k > 0) steps.push_back(k);
  }
  return steps;
}

double McConfig::max_stop_probability() const {
  return dt * (1.0 + params.chi) / params.epsilon;
}

double McConfig::restart_probability() const {
  return params.has_tumbling_phase() ? dt * params.mu_hat() / params.epsilon : 0.0;
}

void validate(const McConfig& c) {
  validate(c.params);
  if (c.n_particles <= 0) throw ConfigError("n_particles must be > 0");
  if (c.n_cells <= 0) throw ConfigError("n_cells must be > 0");
  const std::int64_t cells = c.geometry().total();
  if (c.n_particles % cells != 0) {
    throw ConfigError("n_particles (" + std::to_string(c.n_particles) +
                      ") must be divisible by the cell count (" + std::to_string(cells) + ")");
  }
  if (!std::isfinite(c.dt) || !(c.dt > 0.0)) throw ConfigError("dt must be finite and > 0");
  if (!std::isfinite(c.t_end) || !(c.t_end > 0.0)) throw ConfigError("t_end must be finite and > 0");
  if (!std::isfinite(c.avg_window) || c.avg_window < 0.0) throw ConfigError("avg_window must be >= 0");
  if (c.avg_window > c.t_end) throw ConfigError("avg_window must not exceed t_end");
  if (c.snapshot_stride <= 0) throw ConfigError("snapshot_stride must be > 0");
  if (c.bootstrap_blocks <= 0) throw ConfigError("bootstrap_blocks must be > 0");
  if (c.max_stop_probability() > 1.0) {
    throw CflError("dt (1 + chi) / epsilon = " + std::to_string(c.max_stop_probability()) +
                   " exceeds 1; reduce dt");
  }
  if (c.restart_probability() > 1.0) {
    throw CflError("dt mu_hat / epsilon = " + std::to_string(c.restart_probability()) +
                   " exceeds 1; reduce dt");
  }
  if (c.snapshot_steps().empty()) {
    throw ConfigError("averaging window contains no snapshot step; widen avg_window or reduce snapshot_stride");
  }
}

// ---------------------------------------------------------------------------
// Ensemble

template <int Dim>
Particle<Dim> Ensemble<Dim>::particle(std::int64_t l) const {
  Particle<Dim> p;
  p.position = position.col(l).matrix();
  p.direction = direction.col(l).matrix();
  p.phase = phase[l];
  p.y = y[l];
  return p;
}

template <int Dim>
void Ensemble<Dim>::store(std::int64_t l, const Particle<Dim>& p) {
  position.col(l) = p.position.array();
  direction.col(l) = p.direction.array();
  phase[l] = p.phase;
  y[l] = p.y;
}

template <int Dim>
Point<Dim> draw_direction(const Philox4x32& rng, std::uint64_t l, std::uint64_t k) {
  const auto block = rng.draw(streams::kDirection | l, k);
  if constexpr (Dim == 1) {
    return Point<1>((block[0] >> 31) ? 1.0 : -1.0);
  } else {
    const double theta = 2.0 * std::numbers::pi * to_unit53(block[0], block[1]);
    return Point<2>(std::cos(theta), std::sin(theta));
  }
}

template <int Dim>
Ensemble<Dim> init_ensemble(const McConfig& config) {
  validate(config);
  const CellGeometry g = config.geometry();
  const std::int64_t n = config.n_particles;
  const std::int64_t per_cell = n / g.total();
  const Philox4x32 rng(config.seed);

  Ensemble<Dim> e;
  e.position.resize(Dim, n);
  e.direction.resize(Dim, n);
  e.y = Eigen::ArrayXd::Zero(n);
  e.phase.assign(static_cast<std::size_t>(n), Phase::Running);

  const double dx = g.dx();
  const double lo = -0.5 * g.length;
  for (std::int64_t l = 0; l < n; ++l) {
    const std::int64_t cell = l / per_cell;
    const auto u = rng.draw(streams::kInit | static_cast<std::uint64_t>(l), 0);
    const std::int64_t i1 = cell % g.n;
    e.position(0, l) = wrap_periodic(lo + (static_cast<double>(i1) + to_unit53(u[0], u[1])) * dx,
                                     g.length);
    if constexpr (Dim == 2) {
      const std::int64_t i2 = cell / g.n;
      e.position(1, l) = wrap_periodic(lo + (static_cast<double>(i2) + to_unit53(u[2], u[3])) * dx,
                                       g.length);
    }
    e.direction.col(l) = draw_direction<Dim>(rng, static_cast<std::uint64_t>(l), 0).array();
  }
  return e;
}

// ---------------------------------------------------------------------------
// Per-particle operations

double update_internal(double y_prev, double s_prev, double s_now, double dt, double tau) {
  if (!(s_prev > 0.0)) throw ConfigError("update_internal: s_prev must be > 0");
  return (y_prev + (s_now - s_prev) / s_prev) / (1.0 + dt / tau);
}

double update_internal_log(double y_prev, double m_prev, double m_now, double dt, double tau) {
  return (y_prev + expm1_small(m_now - m_prev)) * (1.0 / (1.0 + dt / tau));
}

template <int Dim>
Particle<Dim> advect(Particle<Dim> p, double dt, double length) {
  if (p.phase == Phase::Tumbling) return p;
  for (int a = 0; a < Dim; ++a) {
    p.position[a] = wrap_periodic(p.position[a] + p.direction[a] * dt, length);
  }
  return p;
}

template <int Dim>
Particle<Dim> transition(Particle<Dim> p, const Philox4x32& rng, std::uint64_t l, std::uint64_t k,
                         const ModelParams& params, double dt) {
  const double u = to_unit(decision_word(rng, l, k));
  if (p.phase == Phase::Running) {
    const double prob = stop_probability(p.y, params, dt);
    if (prob > 1.0) throw CflError("run -> tumble probability exceeds 1");
    if (u < prob) {
      if (params.has_tumbling_phase()) {
        p.phase = Phase::Tumbling;
      } else {
        p.direction = draw_direction<Dim>(rng, l, k);
      }
    }
  } else {
    const double prob = dt * params.mu_hat() / params.epsilon;
    if (prob > 1.0) throw CflError("tumble -> run probability exceeds 1");
    if (u < prob) {
      p.phase = Phase::Running;
      p.direction = draw_direction<Dim>(rng, l, k);
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Binning

namespace {

/// Running sums over snapshots; ordered serial accumulation keeps results
/// independent of thread count.
template <int Dim>
class Accumulator {
public:
  Accumulator(const CellGeometry& g, const ModelParams& params, std::int64_t n_particles, int blocks,
              std::int64_t expected_snapshots)
      : geometry_(g),
        params_(params),
        n_particles_(n_particles),
        expected_(expected_snapshots),
        n_blocks_(static_cast<int>(std::min<std::int64_t>(blocks, std::max<std::int64_t>(1, expected_snapshots)))) {
    const int c = g.total();
    running_ = Eigen::ArrayXd::Zero(c);
    tumbling_ = Eigen::ArrayXd::Zero(c);
    for (auto* a : {&plus_sum_, &plus_n_, &minus_sum_, &minus_n_, &all_sum_, &all_n_}) {
      *a = Eigen::ArrayXd::Zero(c);
    }
    block_running_.assign(n_blocks_, Eigen::ArrayXd::Zero(c));
    block_tumbling_.assign(n_blocks_, Eigen::ArrayXd::Zero(c));
    block_snapshots_.assign(n_blocks_, 0);
  }

  void add(const Ensemble<Dim>& e) {
    const int c = geometry_.total();
    Eigen::ArrayXd run = Eigen::ArrayXd::Zero(c);
    Eigen::ArrayXd tum = Eigen::ArrayXd::Zero(c);
    std::int64_t counted = 0;
    for (std::int64_t l = 0; l < e.size(); ++l) {
      int cell = geometry_.axis_index(e.position(0, l));
      if constexpr (Dim == 2) cell += geometry_.n * geometry_.axis_index(e.position(1, l));
      ++counted;
      if (e.phase[l] == Phase::Tumbling) {
        tum[cell] += 1.0;
        continue;
      }
      run[cell] += 1.0;
      const double xi = params_.epsilon / lambda_response(e.y[l], params_.delta, params_.chi);
      const Point<Dim> x = e.position.col(l).matrix();
      const double slope = e.direction.col(l).matrix().dot(grad_M<Dim>(x));
      all_sum_[cell] += xi;
      all_n_[cell] += 1.0;
      if (slope > 0.0) {
        plus_sum_[cell] += xi;
        plus_n_[cell] += 1.0;
      } else if (slope < 0.0) {
        minus_sum_[cell] += xi;
        minus_n_[cell] += 1.0;
      }
    }
    if (counted != n_particles_ || run.sum() + tum.sum() != static_cast<double>(n_particles_)) {
      throw NumericalError("particle count not conserved");
    }
    if (!plus_sum_.allFinite() || !minus_sum_.allFinite() || !all_sum_.allFinite()) {
      throw NumericalError("non-finite run-length observable");
    }
    running_ += run;
    tumbling_ += tum;
    const int b = static_cast<int>(std::min<std::int64_t>(
        n_blocks_ - 1, snapshots_ * n_blocks_ / std::max<std::int64_t>(1, expected_)));
    block_running_[b] += run;
    block_tumbling_[b] += tum;
    ++block_snapshots_[b];
    ++snapshots_;
  }

  GridProfile profile(double window) const {
    GridProfile p = densities(running_, tumbling_, snapshots_);
    p.window = window;
    const int c = geometry_.total();
    for (int i = 0; i < c; ++i) {
      p.xi_plus[i] = plus_n_[i] > 0 ? plus_sum_[i] / plus_n_[i] : kMissing;
      p.xi_minus[i] = minus_n_[i] > 0 ? minus_sum_[i] / minus_n_[i] : kMissing;
      if (plus_n_[i] > 0 && minus_n_[i] > 0) {
        p.xi_bar[i] = 0.5 * (p.xi_plus[i] + p.xi_minus[i]);
      } else {
        p.xi_bar[i] = all_n_[i] > 0 ? all_sum_[i] / all_n_[i] : kMissing;
      }
    }
    return p;
  }

  std::vector<GridProfile> blocks() const {
    std::vector<GridProfile> out;
    for (int b = 0; b < n_blocks_; ++b) {
      if (block_snapshots_[b] == 0) continue;
      out.push_back(densities(block_running_[b], block_tumbling_[b], block_snapshots_[b]));
    }
    return out;
  }

  double tumbling_fraction() const {
    return tumbling_.sum() / (static_cast<double>(n_particles_) * static_cast<double>(snapshots_));
  }

private:
  GridProfile densities(const Eigen::ArrayXd& run, const Eigen::ArrayXd& tum, std::int64_t snaps) const {
    GridProfile p = GridProfile::zeros(geometry_);
    const double norm = geometry_.mean_per_cell(n_particles_) * static_cast<double>(snaps);
    p.rho_f = run / norm;
    p.rho_g = tum / norm;
    p.rho = (run + tum) / norm;
    p.snapshots = snaps;
    return p;
  }

  CellGeometry geometry_;
  ModelParams params_;
  std::int64_t n_particles_;
  std::int64_t expected_;
  int n_blocks_;
  std::int64_t snapshots_ = 0;
  Eigen::ArrayXd running_, tumbling_;
  Eigen::ArrayXd plus_sum_, plus_n_, minus_sum_, minus_n_, all_sum_, all_n_;
  std::vector<Eigen::ArrayXd> block_running_, block_tumbling_;
  std::vector<std::int64_t> block_snapshots_;
};

}  // namespace

template <int Dim>
GridProfile bin_profile(const Ensemble<Dim>& ensemble, const CellGeometry& geometry,
                        const ModelParams& params) {
  Accumulator<Dim> acc(geometry, params, ensemble.size(), 1, 1);
  acc.add(ensemble);
  return acc.profile(0.0);
}

// ---------------------------------------------------------------------------
// Engine

namespace {

/// Bit j set iff w[j] <= limit[j].
template <int W>
std::uint64_t at_most_mask(const std::uint32_t* w, const std::uint32_t* limit) {
  static_assert(W <= 64);
#if defined(__AVX512F__)
  if constexpr (W % 16 == 0) {
    std::uint64_t mask = 0;
    for (int j = 0; j < W; j += 16) {
      const __m512i a = _mm512_loadu_si512(w + j);
      const __m512i b = _mm512_loadu_si512(limit + j);
      mask |= std::uint64_t{_mm512_cmple_epu32_mask(a, b)} << j;
    }
    return mask;
  }
#endif
  std::uint64_t mask = 0;
  for (int j = 0; j < W; ++j) mask |= std::uint64_t{w[j] <= limit[j]} << j;
  return mask;
}

/// Fused per-particle kernel. Particles do not interact between snapshots,
/// so each one runs its whole segment with state in registers.
template <int Dim>
struct SegmentKernel {
  const Philox4x32& rng;
  ModelParams params;
  double dt;
  double length;
  double decay;      // 1 / (1 + dt/tau)
  double stop_max;   // dt (1+chi) / eps
  double restart;    // dt mu_hat / eps
  bool instant;      // nu == 0

  /// Runs steps [first, last] for particle l. If `pending_transition`, the
  /// transition of step first-1 is executed before anything else. If
  /// `hold_last`, the transition of `last` is skipped.
  void operator()(Ensemble<Dim>& e, std::int64_t l, std::int64_t first, std::int64_t last,
                  bool pending_transition, bool hold_last) const {
    double x[Dim];
    double d[Dim];
    for (int a = 0; a < Dim; ++a) {
      x[a] = e.position(a, l);
      d[a] = e.direction(a, l);
    }
    bool tumbling = e.phase[l] == Phase::Tumbling;
    double y = e.y[l];
    const auto ul = static_cast<std::uint64_t>(l);

    std::uint64_t cached_block = ~std::uint64_t{0};
    Philox4x32::Block words{};

    auto do_transition = [&](std::uint64_t k) {
      if ((k >> 2) != cached_block) {
        cached_block = k >> 2;
        words = rng.draw(streams::kDecision | ul, cached_block);
      }
      const double u = to_unit(words[k & 3]);
      if (!tumbling) {
        if (u < stop_max && u < stop_probability(y, params, dt)) {
          if (instant) {
            set_direction(d, ul, k);
          } else {
            tumbling = true;
          }
        }
      } else if (u < restart) {
        tumbling = false;
        set_direction(d, ul, k);
      }
    };

    if (pending_transition) do_transition(static_cast<std::uint64_t>(first - 1));

    double m_old = field_M(x);
    for (std::int64_t k = first; k <= last; ++k) {
      if (!tumbling) {
        for (int a = 0; a < Dim; ++a) x[a] = wrap_periodic(x[a] + d[a] * dt, length);
      }
      const double m_new = field_M(x);
      y = (y + expm1_small(m_new - m_old)) * decay;
      m_old = m_new;
      if (k == last && hold_last) break;
      do_transition(static_cast<std::uint64_t>(k));
    }

    for (int a = 0; a < Dim; ++a) {
      e.position(a, l) = x[a];
      e.direction(a, l) = d[a];
    }
    e.phase[l] = tumbling ? Phase::Tumbling : Phase::Running;
    e.y[l] = y;
  }

  static double field_M(const double* x) {
    if constexpr (Dim == 1) {
      return -std::abs(x[0]);
    } else {
      return -std::sqrt(x[0] * x[0] + x[1] * x[1]);
    }
  }

  void set_direction(double* d, std::uint64_t l, std::uint64_t k) const {
    const Point<Dim> dir = draw_direction<Dim>(rng, l, k);
    for (int a = 0; a < Dim; ++a) d[a] = dir[a];
  }

  static constexpr int kLanes = 32;

  /// Same arithmetic as operator() for particles [l0, l0 + kLanes), with the
  /// lanes advanced in lockstep so moves, updates and draws vectorise.
  /// Transitions are rare (probability ~ dt/epsilon) and are resolved per lane.
  void tile(Ensemble<Dim>& e, std::int64_t l0, std::int64_t first, std::int64_t last,
            bool pending_transition, bool hold_last) const {
    constexpr int W = kLanes;
    double x[Dim][W];
    double d[Dim][W];
    double y[W];
    double m_old[W];
    double moving[W];
    for (int j = 0; j < W; ++j) {
      for (int a = 0; a < Dim; ++a) {
        x[a][j] = e.position(a, l0 + j);
        d[a][j] = e.direction(a, l0 + j);
      }
      y[j] = e.y[l0 + j];
      moving[j] = e.phase[l0 + j] == Phase::Running ? 1.0 : 0.0;
    }
    const auto ul0 = static_cast<std::uint64_t>(l0);
    // to_unit(w) < p  <=>  w <= ceil(p 2^32) - 1, so the screen stays in integers.
    // Both probabilities are positive whenever a lane can be in that phase.
    const auto word_limit = [](double p) {
      const double t = std::ceil(p * 0x1.0p32);
      return t < 1.0 ? std::uint32_t{0} : static_cast<std::uint32_t>(std::min(t, 0x1.0p32) - 1.0);
    };
    const std::uint32_t stop_limit = word_limit(stop_max);
    const std::uint32_t restart_limit = word_limit(restart);
    std::uint32_t limit[W];
    for (int j = 0; j < W; ++j) limit[j] = moving[j] != 0.0 ? stop_limit : restart_limit;
    std::uint64_t cached_block = ~std::uint64_t{0};
    std::uint32_t words[4][W];

    auto do_transition = [&](std::uint64_t k) {
      if ((k >> 2) != cached_block) {
        cached_block = k >> 2;
        rng.draw_lanes<W>(streams::kDecision | ul0, cached_block, words);
      }
      const std::uint32_t* w = words[k & 3];
      std::uint64_t candidates = at_most_mask<W>(w, limit);
      while (candidates != 0) {
        const int j = std::countr_zero(candidates);
        candidates &= candidates - 1;
        const std::uint64_t l = ul0 + static_cast<std::uint64_t>(j);
        if (moving[j] != 0.0) {
          if (to_unit(w[j]) < stop_probability(y[j], params, dt)) {
            if (instant) {
              set_lane_direction(d, j, l, k);
            } else {
              moving[j] = 0.0;
              limit[j] = restart_limit;
            }
          }
        } else if (restart > 0.0) {
          moving[j] = 1.0;
          limit[j] = stop_limit;
          set_lane_direction(d, j, l, k);
        }
      }
    };

    if (pending_transition) do_transition(static_cast<std::uint64_t>(first - 1));

    for (int j = 0; j < W; ++j) {
      double p[Dim];
      for (int a = 0; a < Dim; ++a) p[a] = x[a][j];
      m_old[j] = field_M(p);
    }
    double z[W];
    double m_new[W];
    for (std::int64_t k = first; k <= last; ++k) {
      double zmax = 0.0;
#pragma omp simd reduction(max : zmax)
      for (int j = 0; j < W; ++j) {
        for (int a = 0; a < Dim; ++a) {
          const double moved = wrap_periodic(x[a][j] + d[a][j] * dt, length);
          x[a][j] = moving[j] != 0.0 ? moved : x[a][j];
        }
        if constexpr (Dim == 1) {
          m_new[j] = -std::abs(x[0][j]);
        } else {
          m_new[j] = -std::sqrt(x[0][j] * x[0][j] + x[1][j] * x[1][j]);
        }
        z[j] = m_new[j] - m_old[j];
        zmax = std::max(zmax, std::abs(z[j]));
      }
      if (zmax > 1e-2) {
        for (int j = 0; j < W; ++j) y[j] = (y[j] + expm1_small(z[j])) * decay;
      } else {
#pragma omp simd
        for (int j = 0; j < W; ++j) {
          const double zz = z[j];
          const double em1 =
              zz * (1.0 + zz * (1.0 / 2 + zz * (1.0 / 6 + zz * (1.0 / 24 + zz * (1.0 / 120 +
                                                                                  zz * (1.0 / 720 + zz * (1.0 / 5040)))))));
          y[j] = (y[j] + em1) * decay;
        }
      }
      for (int j = 0; j < W; ++j) m_old[j] = m_new[j];
      if (k == last && hold_last) break;
      do_transition(static_cast<std::uint64_t>(k));
    }

    for (int j = 0; j < W; ++j) {
      for (int a = 0; a < Dim; ++a) {
        e.position(a, l0 + j) = x[a][j];
        e.direction(a, l0 + j) = d[a][j];
      }
      e.y[l0 + j] = y[j];
      e.phase[l0 + j] = moving[j] != 0.0 ? Phase::Running : Phase::Tumbling;
    }
  }

  void set_lane_direction(double (&d)[Dim][kLanes], int j, std::uint64_t l, std::uint64_t k) const {
    const Point<Dim> dir = draw_direction<Dim>(rng, l, k);
    for (int a = 0; a < Dim; ++a) d[a][j] = dir[a];
  }
};

}  // namespace

template <int Dim>
Engine<Dim>::Engine(const McConfig& config)
    : config_(config), rng_(config.seed), ensemble_(init_ensemble<Dim>(config)) {
  if (config.params.dim != Dim) throw ConfigError("engine dimension does not match params.dim");
}

template <int Dim>
void Engine<Dim>::advance_segment(std::int64_t last, bool hold_last_transition) {
  if (last < step_) throw ConfigError("cannot step backwards");
  if (last == step_) {
    if (transition_pending_ == hold_last_transition) return;
    if (!transition_pending_) throw ConfigError("step already completed");
  }
  const double tau = config_.params.tau;
  const SegmentKernel<Dim> kernel{rng_,
                                  config_.params,
                                  config_.dt,
                                  config_.params.domain_length,
                                  1.0 / (1.0 + config_.dt / tau),
                                  config_.max_stop_probability(),
                                  config_.restart_probability(),
                                  !config_.params.has_tumbling_phase()};
  const std::int64_t first = step_ + 1;
  const bool pending = transition_pending_;
  const std::int64_t n = ensemble_.size();

  // last == step_ leaves only the held transition of the current step.
  const std::int64_t stop = last == step_ ? step_ : last;
  const bool hold = last == step_ ? false : hold_last_transition;
  constexpr std::int64_t W = SegmentKernel<Dim>::kLanes;
  const std::int64_t tiles = n / W;
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < tiles; ++t) kernel.tile(ensemble_, t * W, first, stop, pending, hold);
  for (std::int64_t l = tiles * W; l < n; ++l) kernel(ensemble_, l, first, stop, pending, hold);
  step_ = last;
  transition_pending_ = hold_last_transition;
}

template <int Dim>
void Engine<Dim>::advance_to(std::int64_t step) {
  advance_segment(step, false);
}

template <int Dim>
GridProfile Engine<Dim>::snapshot_at(std::int64_t step) {
  advance_segment(step, true);
  return bin_profile<Dim>(ensemble_, config_.geometry(), config_.params);
}

template <int Dim>
McResult Engine<Dim>::run() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto snaps = config_.snapshot_steps();
  Accumulator<Dim> acc(config_.geometry(), config_.params, config_.n_particles,
                       config_.bootstrap_blocks, static_cast<std::int64_t>(snaps.size()));
  for (std::int64_t k : snaps) {
    if (k <= step_) continue;
    advance_segment(k, true);
    acc.add(ensemble_);
  }
  if (step_ < config_.n_steps() || transition_pending_) advance_segment(config_.n_steps(), false);

  McResult r;
  r.average = acc.profile(config_.avg_window);
  if (!r.average.rho.allFinite()) throw NumericalError("non-finite density");
  r.blocks = acc.blocks();
  r.tumbling_fraction = acc.tumbling_fraction();
  r.n_particles = config_.n_particles;
  r.steps = step_;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

McResult run(const McConfig& config) {
  validate(config);
  set_thread_count(thread_count());
  if (config.params.dim == 1) return Engine<1>(config).run();
  return Engine<2>(config).run();
}

int thread_count() {
  if (const char* env = std::getenv("CHEMOKIN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

// ---------------------------------------------------------------------------

template struct Ensemble<1>;
template struct Ensemble<2>;
template Ensemble<1> init_ensemble<1>(const McConfig&);
template Ensemble<2> init_ensemble<2>(const McConfig&);
template Point<1> draw_direction<1>(const Philox4x32&, std::uint64_t, std::uint64_t);
template Point<2> draw_direction<2>(const Philox4x32&, std::uint64_t, std::uint64_t);
template Particle<1> advect<1>(Particle<1>, double, double);
template Particle<2> advect<2>(Particle<2>, double, double);
template Particle<1> transition<1>(Particle<1>, const Philox4x32&, std::uint64_t, std::uint64_t,
                                   const ModelParams&, double);
template Particle<2> transition<2>(Particle<2>, const Philox4x32&, std::uint64_t, std::uint64_t,
                                   const ModelParams&, double);
template GridProfile bin_profile<1>(const Ensemble<1>&, const CellGeometry&, const ModelParams&);
template GridProfile bin_profile<2>(const Ensemble<2>&, const CellGeometry&, const ModelParams&);
template class Engine<1>;
template class Engine<2>;

}  // namespace chemokin::mc
