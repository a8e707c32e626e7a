#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "chemokin/error.hpp"
#include "chemokin/mc_engine.hpp"

using namespace chemokin;
using namespace chemokin::mc;

namespace {

ModelParams volcano(int dim = 1) { return {0.1, 10.0, 0.3, 1.25, 0.7, 10.0, dim}; }

McConfig small_config(int dim, std::int64_t n, int cells, double dt) {
  McConfig c;
  c.params = volcano(dim);
  c.n_particles = n;
  c.n_cells = cells;
  c.dt = dt;
  c.t_end = 100 * dt;
  c.avg_window = 50 * dt;
  c.snapshot_stride = 10;
  c.seed = 99;
  return c;
}

/// Steps every particle with the per-particle operations, one step at a time.
template <int Dim>
void reference_steps(Ensemble<Dim>& e, const McConfig& c, std::int64_t first, std::int64_t last) {
  const Philox4x32 rng(c.seed);
  for (std::int64_t l = 0; l < e.size(); ++l) {
    Particle<Dim> p = e.particle(l);
    for (std::int64_t k = first; k <= last; ++k) {
      const double m_prev = equilibrium_M<Dim>(p.position);
      p = advect<Dim>(p, c.dt, c.params.domain_length);
      p.y = update_internal_log(p.y, m_prev, equilibrium_M<Dim>(p.position), c.dt, c.params.tau);
      p = transition<Dim>(p, rng, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(k), c.params,
                          c.dt);
    }
    e.store(l, p);
  }
}

template <int Dim>
void expect_identical(const Ensemble<Dim>& a, const Ensemble<Dim>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::int64_t l = 0; l < a.size(); ++l) {
    for (int d = 0; d < Dim; ++d) {
      ASSERT_EQ(a.position(d, l), b.position(d, l)) << "particle " << l;
      ASSERT_EQ(a.direction(d, l), b.direction(d, l)) << "particle " << l;
    }
    ASSERT_EQ(a.y[l], b.y[l]) << "particle " << l;
    ASSERT_EQ(a.phase[l], b.phase[l]) << "particle " << l;
  }
}

}  // namespace

TEST(Init, EqualCountPerCell1D) {
  McConfig c = small_config(1, 100, 10, 1e-3);
  const auto e = init_ensemble<1>(c);
  std::vector<int> count(10, 0);
  for (std::int64_t l = 0; l < e.size(); ++l) {
    ++count[c.geometry().axis_index(e.position(0, l))];
    EXPECT_EQ(e.y[l], 0.0);
    EXPECT_EQ(e.phase[l], Phase::Running);
    EXPECT_EQ(std::abs(e.direction(0, l)), 1.0);
  }
  for (int n : count) EXPECT_EQ(n, 10);
}

TEST(Init, EqualCountPerCell2D) {
  McConfig c = small_config(2, 4 * 50 * 50, 50, 1e-3);
  const auto e = init_ensemble<2>(c);
  std::vector<int> count(2500, 0);
  const CellGeometry g = c.geometry();
  for (std::int64_t l = 0; l < e.size(); ++l) {
    ++count[g.axis_index(e.position(0, l)) + 50 * g.axis_index(e.position(1, l))];
    EXPECT_NEAR(e.direction.col(l).matrix().norm(), 1.0, 1e-15);
  }
  for (int n : count) EXPECT_EQ(n, 4);
}

TEST(Init, RejectsIndivisibleCount) {
  EXPECT_THROW(init_ensemble<1>(small_config(1, 101, 10, 1e-3)), ConfigError);
}

TEST(Advect, Kinematics) {
  Particle<1> p;
  p.position[0] = 4.9999;
  p.direction[0] = 1.0;
  EXPECT_NEAR(advect<1>(p, 2e-4, 10.0).position[0], -4.9999, 1e-12);

  p.phase = Phase::Tumbling;
  EXPECT_EQ(advect<1>(p, 0.7, 10.0).position[0], 4.9999);

  Particle<2> q;
  q.direction = Point<2>(1.0, 0.0);
  const Point<2> moved = advect<2>(q, 0.5, 10.0).position;
  EXPECT_EQ(moved[0], 0.5);
  EXPECT_EQ(moved[1], 0.0);
}

TEST(Advect, WrapIsHalfOpen) {
  EXPECT_EQ(wrap_periodic(5.0, 10.0), -5.0);
  EXPECT_EQ(wrap_periodic(-5.0, 10.0), -5.0);
  EXPECT_NEAR(wrap_periodic(-5.25, 10.0), 4.75, 1e-15);
  for (double x = -5.5; x < 5.5; x += 0.0173) {
    const double w = wrap_periodic(x, 10.0);
    EXPECT_GE(w, -5.0);
    EXPECT_LT(w, 5.0);
  }
}

TEST(InternalState, ClosedFormExamples) {
  EXPECT_EQ(update_internal(0.0, 0.3, 0.3, 2e-4, 10.0), 0.0);
  EXPECT_NEAR(update_internal(1.0, 0.3, 0.3, 2e-4, 10.0), 1.0 / 1.00002, 1e-15);
  const double s_prev = std::exp(-1.0);
  const double s_now = std::exp(-0.9998);
  const double expected = std::expm1(2e-4) / 1.00002;
  EXPECT_NEAR(update_internal(0.0, s_prev, s_now, 2e-4, 10.0), expected, 1e-15);
  // The commonly quoted 1.99998e-4 is only good to about four digits.
  EXPECT_NEAR(expected, 1.99998e-4, 1e-4 * 1.99998e-4);
  EXPECT_NEAR(update_internal_log(0.0, -1.0, -0.9998, 2e-4, 10.0), expected, 1e-16);
  EXPECT_THROW(update_internal(0.0, 0.0, 1.0, 1e-3, 1.0), ConfigError);
}

TEST(InternalState, Expm1SmallIsAccurate) {
  for (double z = -2e-2; z <= 2e-2; z += 1.3e-4) {
    EXPECT_NEAR(expm1_small(z), std::expm1(z), 4e-16 * std::abs(std::expm1(z)) + 1e-300);
  }
}

// Held-stationary particle under constant S: y_k = y0 (1 + dt/tau)^-k, whose
// distance from y0 exp(-t/tau) shrinks linearly with dt.
TEST(InternalState, FirstOrderConvergence) {
  const double tau = 2.0;
  const double t = 1.0;
  std::vector<double> err;
  for (double dt : {1e-2, 1e-3, 1e-4}) {
    double y = 1.0;
    const auto steps = std::llround(t / dt);
    for (std::int64_t k = 0; k < steps; ++k) y = update_internal(y, 0.5, 0.5, dt, tau);
    err.push_back(std::abs(y - std::exp(-t / tau)));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double order = std::log10(err[i - 1] / err[i]);
    EXPECT_NEAR(order, 1.0, 0.05);
  }
}

TEST(Transition, Probabilities) {
  ModelParams p = volcano();
  EXPECT_NEAR(stop_probability(0.0, p, 2e-4), 2e-3, 1e-18);
  McConfig c;
  c.params = p;
  c.dt = 2e-4;
  EXPECT_NEAR(c.restart_probability(), 6.6667e-3, 1e-7);
  p.chi = 0.0;
  EXPECT_EQ(stop_probability(-3.0, p, 2e-4), stop_probability(5.0, p, 2e-4));
}

TEST(Transition, RejectsProbabilityAboveOne) {
  McConfig c = small_config(1, 100, 10, 0.06);  // dt (1 + chi) / eps = 1.02
  EXPECT_THROW(validate(c), CflError);
  c.dt = 0.05;
  c.params.nu = 0.01;  // dt mu_hat / eps = 50
  EXPECT_THROW(validate(c), CflError);

  Particle<1> q;
  q.direction[0] = 1.0;
  q.y = -100.0;  // Lambda near 1 + chi
  EXPECT_THROW(transition<1>(q, Philox4x32(1), 0, 0, volcano(), 0.06), CflError);
}

TEST(Transition, EmpiricalStopRate) {
  const ModelParams p = volcano();
  const Philox4x32 rng(5);
  const double dt = 1e-2;
  const double y = 0.8;
  const int n = 400000;
  int stopped = 0;
  for (int l = 0; l < n; ++l) {
    Particle<1> q;
    q.direction[0] = 1.0;
    q.y = y;
    stopped += transition<1>(q, rng, l, 17, p, dt).phase == Phase::Tumbling;
  }
  const double prob = stop_probability(y, p, dt);
  EXPECT_NEAR(static_cast<double>(stopped) / n, prob, 4 * std::sqrt(prob * (1 - prob) / n));
}

TEST(Transition, InstantTumbleRedrawsDirection) {
  ModelParams p = volcano();
  p.nu = 0.0;
  const Philox4x32 rng(3);
  int flipped = 0;
  int stops = 0;
  for (int l = 0; l < 20000; ++l) {
    Particle<1> q;
    q.direction[0] = 1.0;
    const Particle<1> r = transition<1>(q, rng, l, 1, p, 0.05);
    EXPECT_EQ(r.phase, Phase::Running);
    if (to_unit(decision_word(rng, l, 1)) < stop_probability(0.0, p, 0.05)) {
      ++stops;
      flipped += r.direction[0] < 0;
    } else {
      EXPECT_EQ(r.direction[0], 1.0);
    }
  }
  EXPECT_GT(stops, 9000);
  EXPECT_NEAR(static_cast<double>(flipped) / stops, 0.5, 0.03);
}

TEST(Binning, NormalisationAndPartition) {
  McConfig c = small_config(1, 100000, 100, 1e-3);
  auto e = init_ensemble<1>(c);
  GridProfile g = bin_profile<1>(e, c.geometry(), c.params);
  EXPECT_EQ((g.rho * c.geometry().mean_per_cell(c.n_particles)).sum(), 100000.0);
  EXPECT_TRUE((g.rho == 1.0).all());
  EXPECT_DOUBLE_EQ(g.mass(), 10.0);

  for (auto& ph : e.phase) ph = Phase::Tumbling;
  g = bin_profile<1>(e, c.geometry(), c.params);
  EXPECT_TRUE((g.rho_f == 0.0).all());
  EXPECT_TRUE((g.rho_g == g.rho).all());
  EXPECT_TRUE(g.xi_bar.isNaN().all());
}

TEST(Binning, FaceGoesToUpperCell) {
  const CellGeometry g{1, 10, 10.0};
  EXPECT_EQ(g.axis_index(0.0), 5);
  EXPECT_EQ(g.axis_index(-5.0), 0);
  EXPECT_EQ(g.axis_index(-4.0), 1);
  EXPECT_EQ(g.axis_index(4.999999), 9);
}

TEST(Engine, MatchesPerParticleReference1D) {
  McConfig c = small_config(1, 70, 10, 1e-2);  // two lane tiles plus a scalar tail
  Engine<1> engine(c);
  Ensemble<1> ref = init_ensemble<1>(c);
  expect_identical(engine.ensemble(), ref);

  engine.advance_to(37);
  reference_steps(ref, c, 1, 37);
  expect_identical(engine.ensemble(), ref);

  engine.advance_to(400);
  reference_steps(ref, c, 38, 400);
  expect_identical(engine.ensemble(), ref);
}

TEST(Engine, MatchesPerParticleReference2D) {
  McConfig c = small_config(2, 9 * 9, 3, 1e-2);
  Engine<2> engine(c);
  Ensemble<2> ref = init_ensemble<2>(c);
  engine.advance_to(333);
  reference_steps(ref, c, 1, 333);
  expect_identical(engine.ensemble(), ref);
}

TEST(Engine, MatchesReferenceWithoutTumblingPhase) {
  McConfig c = small_config(1, 70, 10, 1e-2);
  c.params.nu = 0.0;
  Engine<1> engine(c);
  Ensemble<1> ref = init_ensemble<1>(c);
  engine.advance_to(250);
  reference_steps(ref, c, 1, 250);
  expect_identical(engine.ensemble(), ref);
}

TEST(Engine, SnapshotHoldsOnlyTheTransition) {
  McConfig c = small_config(1, 70, 10, 1e-2);
  Engine<1> a(c);
  Engine<1> b(c);
  a.snapshot_at(50);
  a.snapshot_at(50);  // idempotent
  a.snapshot_at(120);
  a.advance_to(120);
  a.advance_to(200);
  b.advance_to(200);
  expect_identical(a.ensemble(), b.ensemble());
  EXPECT_THROW(a.advance_to(150), ConfigError);
  EXPECT_THROW(a.snapshot_at(200), ConfigError);
}

TEST(Engine, SnapshotIsPreTransition) {
  McConfig c = small_config(1, 70, 10, 1e-2);
  Engine<1> engine(c);
  Ensemble<1> ref = init_ensemble<1>(c);
  engine.snapshot_at(60);
  reference_steps(ref, c, 1, 59);
  const Philox4x32 rng(c.seed);
  for (std::int64_t l = 0; l < ref.size(); ++l) {
    Particle<1> p = ref.particle(l);
    const double m_prev = equilibrium_M<1>(p.position);
    p = advect<1>(p, c.dt, c.params.domain_length);
    p.y = update_internal_log(p.y, m_prev, equilibrium_M<1>(p.position), c.dt, c.params.tau);
    ref.store(l, p);
  }
  expect_identical(engine.ensemble(), ref);
}

TEST(Engine, ThreadCountDoesNotChangeResults) {
  McConfig c = small_config(1, 3200, 100, 1e-3);
  c.t_end = 0.5;
  c.avg_window = 0.3;
  set_thread_count(1);
  const McResult a = run(c);
  set_thread_count(3);
  const McResult b = run(c);
  set_thread_count(thread_count());
  EXPECT_TRUE((a.average.rho == b.average.rho).all());
  EXPECT_TRUE((a.average.rho_g == b.average.rho_g).all());
  EXPECT_TRUE(((a.average.xi_bar == b.average.xi_bar) || (a.average.xi_bar.isNaN() && b.average.xi_bar.isNaN())).all());
  EXPECT_EQ(a.tumbling_fraction, b.tumbling_fraction);
}

TEST(Engine, ConservesParticlesAndMass) {
  McConfig c = small_config(2, 16 * 25 * 25, 25, 1e-2);
  c.t_end = 3.0;
  c.avg_window = 2.0;
  const McResult r = run(c);
  EXPECT_NEAR(r.average.mass(), 100.0, 1e-9);
  EXPECT_TRUE(((r.average.rho_f + r.average.rho_g - r.average.rho).abs() < 1e-12).all());
  for (const auto& b : r.blocks) EXPECT_NEAR(b.mass(), 100.0, 1e-9);
}

TEST(Engine, InstantTumbleHasNoTumblingDensity) {
  McConfig c = small_config(1, 10000, 100, 1e-3);
  c.params.nu = 0.0;
  c.t_end = 1.0;
  c.avg_window = 0.5;
  const McResult r = run(c);
  EXPECT_TRUE((r.average.rho_g == 0.0).all());
  EXPECT_EQ(r.tumbling_fraction, 0.0);
}

// Two-state chain with Lambda = 1 relaxes to nu / (1 + nu).
TEST(Engine, HomogeneousTumblingFraction) {
  McConfig c;
  c.params = volcano();
  c.params.chi = 0.0;
  c.n_particles = 20000;
  c.n_cells = 100;
  c.dt = 1e-3;
  c.t_end = 6.0;
  c.avg_window = 5.0;
  c.seed = 2024;
  const McResult r = run(c);
  const double p = 0.3 / 1.3;
  const double se = std::sqrt(p * (1 - p) / (static_cast<double>(c.n_particles) * r.average.snapshots));
  EXPECT_NEAR(r.tumbling_fraction, p, 3 * se);
}

TEST(Engine, HomogeneousDensityWithoutChemotaxis) {
  McConfig c = small_config(1, 100000, 100, 1e-3);
  c.params.chi = 0.0;
  c.t_end = 3.0;
  c.avg_window = 2.0;
  const McResult r = run(c);
  const double se = 1.0 / std::sqrt(c.geometry().mean_per_cell(c.n_particles));
  EXPECT_LT((r.average.rho - 1.0).abs().maxCoeff(), 5 * se);
}

namespace {

McResult volcano_run() {
  static const McResult r = [] {
    McConfig c;
    c.params = volcano();
    c.n_particles = 100000;
    c.n_cells = 100;
    c.dt = 1e-3;
    c.t_end = 10.0;
    c.avg_window = 8.0;
    c.seed = 77;
    return run(c);
  }();
  return r;
}

}  // namespace

// Per-cell standard errors come from the contiguous block averages.
TEST(Engine, MirrorSymmetry) {
  const McResult r = volcano_run();
  const int n = r.average.geometry.n;
  const auto nb = static_cast<double>(r.blocks.size());
  ASSERT_GE(nb, 10);
  Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(n);
  for (const auto& b : r.blocks) {
    mean += b.rho;
    sq += b.rho.square();
  }
  mean /= nb;
  const Eigen::ArrayXd se = ((sq / nb - mean.square()).max(0.0) / (nb - 1)).sqrt();
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double z = std::abs(r.average.rho[i] - r.average.rho[j]) / std::hypot(se[i], se[j]);
    EXPECT_LT(z, 5.0) << "cells " << i << ", " << j;
  }
}

TEST(Engine, ClimbingRunsAreLonger) {
  const McResult r = volcano_run();
  const CellGeometry& g = r.average.geometry;
  int checked = 0;
  for (int i = 0; i < g.n; ++i) {
    const double x = std::abs(g.center(i));
    if (x < 1.0 || x > 4.0) continue;
    EXPECT_GT(r.average.xi_plus[i], r.average.xi_minus[i]) << "x = " << g.center(i);
    ++checked;
  }
  EXPECT_EQ(checked, 60);
}

TEST(Engine, RejectsBadWindows) {
  McConfig c = small_config(1, 100, 10, 1e-3);
  c.avg_window = 2 * c.t_end;
  EXPECT_THROW(validate(c), ConfigError);
  c = small_config(1, 100, 10, 1e-3);
  c.snapshot_stride = 1000;
  EXPECT_THROW(validate(c), ConfigError);
}
