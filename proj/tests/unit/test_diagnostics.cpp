#include <gtest/gtest.h>

#include <cmath>

#include "chemokin/diagnostics.hpp"
#include "chemokin/error.hpp"
#include "chemokin/rng.hpp"

using namespace chemokin;

namespace {

/// Cell averages of a x^2 + b x + c on n cells of [-L/2, L/2).
Eigen::ArrayXd quadratic_cells(double a, double b, double c, int n, double L) {
  const double dx = L / n;
  Eigen::ArrayXd out(n);
  for (int i = 0; i < n; ++i) {
    const double lo = -0.5 * L + i * dx;
    const double hi = lo + dx;
    const auto F = [&](double x) { return a * x * x * x / 3.0 + b * x * x / 2.0 + c * x; };
    out[i] = (F(hi) - F(lo)) / dx;
  }
  return out;
}

GridProfile uniform_2d(int n, double value) {
  GridProfile p = GridProfile::zeros({2, n, 10.0});
  p.rho.setConstant(value);
  p.rho_f.setConstant(0.75 * value);
  p.rho_g.setConstant(0.25 * value);
  return p;
}

}  // namespace

TEST(Curvature, Constant) {
  EXPECT_EQ(center_second_derivative(Eigen::ArrayXd::Constant(100, 3.7), 0.1), 0.0);
}

TEST(Curvature, QuadraticCellAverages) {
  // The outer pairs are 2 dx apart: the stencil returns twice rho''.
  EXPECT_NEAR(center_second_derivative(quadratic_cells(1.0, 0.0, 0.0, 100, 10.0), 0.1), 4.0, 1e-9);
  EXPECT_NEAR(center_second_derivative(quadratic_cells(-0.5, 0.0, 0.0, 20, 2.0), 0.1), -2.0, 1e-9);
}

TEST(Curvature, TranslationInvariant) {
  const Eigen::ArrayXd base = quadratic_cells(0.3, 0.0, 0.0, 40, 4.0);
  const double ref = center_second_derivative(base, 0.1);
  for (const double shift : {-5.0, 0.5, 12.0}) {
    EXPECT_NEAR(center_second_derivative(base + shift, 0.1), ref, 1e-9);
  }
  const Eigen::ArrayXd ramp = quadratic_cells(0.0, 2.5, 1.0, 40, 4.0);
  EXPECT_NEAR(center_second_derivative(base + ramp, 0.1), ref, 1e-9);
}

TEST(Curvature, ShapeErrors) {
  EXPECT_THROW(center_second_derivative(Eigen::ArrayXd::Ones(2), 0.1), ConfigError);
  EXPECT_THROW(center_second_derivative(Eigen::ArrayXd::Ones(7), 0.1), ConfigError);
  EXPECT_NO_THROW(center_second_derivative(Eigen::ArrayXd::Ones(4), 0.1));
}

TEST(Curvature, BimodalityConsistencyOnRandomProfiles) {
  const Philox4x32 rng(5);
  int checked = 0;
  for (std::uint64_t trial = 0; trial < 2000; ++trial) {
    Eigen::ArrayXd f(8);
    Eigen::ArrayXd g(8);
    for (int i = 0; i < 8; ++i) {
      const auto w = rng.draw(trial, static_cast<std::uint64_t>(i));
      f[i] = to_unit(w[0]);
      g[i] = to_unit(w[1]);
    }
    const double fdd = center_second_derivative(f, 0.1);
    const double rdd = center_second_derivative(f + g, 0.1);
    if (fdd < 0.0 && rdd > 0.0) {
      EXPECT_GT(center_second_derivative(g, 0.1), 0.0);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Curvature, BootstrapStandardError) {
  mc::McResult r;
  r.average = GridProfile::zeros({1, 10, 1.0});
  // Block b adds b * (cell-average x^2 shape), so its stencil value is 4 b.
  const Eigen::ArrayXd shape = quadratic_cells(1.0, 0.0, 0.0, 10, 1.0);
  const int nb = 20;
  Eigen::ArrayXd values(nb);
  for (int b = 0; b < nb; ++b) {
    GridProfile p = GridProfile::zeros(r.average.geometry);
    p.rho = 1.0 + b * shape;
    r.blocks.push_back(p);
    values[b] = 4.0 * b;
    r.average.rho += p.rho / nb;
  }
  const CurvatureEstimate e = center_second_derivative(r, Density::rho, 20000, 3);
  EXPECT_NEAR(e.value, values.mean(), 1e-8);
  const double sd = std::sqrt((values - values.mean()).square().sum() / nb);
  EXPECT_NEAR(e.standard_error, sd / std::sqrt(nb), 0.03 * sd / std::sqrt(nb));
  // Reproducible for a fixed seed.
  EXPECT_EQ(center_second_derivative(r, Density::rho, 500, 9).standard_error,
            center_second_derivative(r, Density::rho, 500, 9).standard_error);
  r.blocks.resize(1);
  EXPECT_THROW(center_second_derivative(r, Density::rho), ConfigError);
}

TEST(Collapse, SingleProfileIsZero) {
  const CellGeometry g{1, 50, 10.0};
  EXPECT_EQ(rescale_collapse({{1.0, g, Eigen::ArrayXd::Ones(50)}}), 0.0);
  EXPECT_EQ(rescale_collapse({}), 0.0);
}

TEST(Collapse, RoundTripIsInterpolationError) {
  // f(x / sqrt(beta)) sampled on two grids collapses up to linear interpolation error.
  const auto f = [](double X) { return std::exp(-(std::abs(X) - 1.0) * (std::abs(X) - 1.0)); };
  ScaledProfile a{1.0, {1, 100, 10.0}, Eigen::ArrayXd(100)};
  ScaledProfile b{4.0, {1, 100, 20.0}, Eigen::ArrayXd(100)};
  for (int i = 0; i < 100; ++i) {
    a.rho[i] = f(a.geometry.center(i));
    b.rho[i] = 7.0 * f(b.geometry.center(i) / 2.0);
  }
  const double err = rescale_collapse({a, b});
  // |f''| <= 2 bounds the interpolation error by dx^2 / 4 with dx = 0.1.
  EXPECT_LT(err, 2.5e-3);
  EXPECT_GT(err, 0.0);
}

TEST(Collapse, DisjointSupportsThrow) {
  ScaledProfile a{1.0, {1, 10, 1.0}, Eigen::ArrayXd::Ones(10)};
  ScaledProfile b{1.0, {1, 10, 1.0}, Eigen::ArrayXd::Ones(10)};
  // A single cell has a one-point support, which cannot overlap an interval.
  ScaledProfile c{1.0, {1, 1, 1.0}, Eigen::ArrayXd::Ones(1)};
  EXPECT_NO_THROW(rescale_collapse({a, b}));
  EXPECT_THROW(rescale_collapse({a, c}), ConfigError);
  ScaledProfile bad{0.0, {1, 10, 1.0}, Eigen::ArrayXd::Ones(10)};
  EXPECT_THROW(rescale_collapse({a, bad}), ConfigError);
}

TEST(Collapse, PeakAlignment) {
  std::vector<ScaledProfile> ps;
  for (const double beta : {0.5, 1.0, 2.0}) {
    ScaledProfile p{beta, {1, 100, 10.0}, Eigen::ArrayXd(100)};
    for (int i = 0; i < 100; ++i) {
      const double X = p.geometry.center(i) / std::sqrt(beta);
      p.rho[i] = std::exp(-4.0 * (std::abs(X) - 0.5) * (std::abs(X) - 0.5));
    }
    ps.push_back(p);
  }
  const PeakAlignment pa = peak_alignment(ps);
  ASSERT_EQ(pa.rescaled_peaks.size(), 3u);
  for (const double X : pa.rescaled_peaks) EXPECT_NEAR(X, 0.5, 0.05);
  EXPECT_TRUE(pa.aligned);

  ps[2].rho = ps[0].rho;  // peak at 0.35 / sqrt(2)
  EXPECT_FALSE(peak_alignment(ps).aligned);
}

TEST(Collapse, ParabolicPeakRefinement) {
  const CellGeometry g{1, 100, 10.0};
  Eigen::ArrayXd rho(100);
  for (int i = 0; i < 100; ++i) rho[i] = -(std::abs(g.center(i)) - 1.23) * (std::abs(g.center(i)) - 1.23);
  EXPECT_NEAR(peak_position(rho, g), 1.23, 1e-12);
}

TEST(Slice, UniformFieldGivesConstantSlice) {
  const GridProfile s = slice_2d(uniform_2d(10, 2.0), 0, 0.0);
  EXPECT_EQ(s.geometry.dim, 1);
  EXPECT_EQ(s.rho.size(), 10);
  EXPECT_LT((s.rho - 2.0).abs().maxCoeff(), 1e-15);
  EXPECT_LT((s.rho_f + s.rho_g - s.rho).abs().maxCoeff(), 1e-15);
}

TEST(Slice, FaceAveragesAdjacentLinesAndCellTakesOne) {
  GridProfile p = uniform_2d(10, 0.0);
  for (int i2 = 0; i2 < 10; ++i2) {
    for (int i1 = 0; i1 < 10; ++i1) p.rho[i1 + i2 * 10] = 100.0 * i1 + i2;
  }
  // x1 = 0 is the face between columns 4 and 5.
  const GridProfile face = slice_2d(p, 0, 0.0);
  for (int j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(face.rho[j], 450.0 + j);
  const GridProfile cell = slice_2d(p, 0, 0.5);  // centre of column 5
  for (int j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(cell.rho[j], 500.0 + j);
  const GridProfile row = slice_2d(p, 1, -4.5);  // centre of row 0
  for (int j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(row.rho[j], 100.0 * j);
  const GridProfile seam = slice_2d(p, 0, 5.0);  // periodic face between columns 9 and 0
  EXPECT_DOUBLE_EQ(seam.rho[0], 450.0);
  EXPECT_THROW(slice_2d(p, 0, 5.5), ConfigError);
  EXPECT_THROW(slice_2d(p, 2, 0.0), ConfigError);
  EXPECT_THROW(slice_2d(GridProfile::zeros({1, 10, 10.0}), 0, 0.0), ConfigError);
}

TEST(Slice, MissingRunLengthsStayMissing) {
  GridProfile p = uniform_2d(4, 1.0);
  p.xi_bar[1 + 0 * 4] = 0.2;  // column 1 defined at row 0, column 2 missing
  const GridProfile s = slice_2d(p, 0, 0.0);
  EXPECT_DOUBLE_EQ(s.xi_bar[0], 0.2);
  EXPECT_TRUE(std::isnan(s.xi_bar[1]));
}

TEST(Radial, UniformIsFlat) {
  const RadialProfile r = radial_profile(uniform_2d(50, 1.5), 0.5);
  EXPECT_EQ(r.r.size(), 10);
  EXPECT_LT((r.rho - 1.5).abs().maxCoeff(), 1e-14);
  EXPECT_DOUBLE_EQ(r.r[0], 0.25);
  EXPECT_THROW(radial_profile(uniform_2d(50, 1.0), 0.0), ConfigError);
}

TEST(DiffusionLayer, Examples) {
  EXPECT_NEAR(diffusion_layer_marker(0.1, 10.0), 1.0, 1e-15);
  EXPECT_NEAR(diffusion_layer_marker(0.1, 0.1), 0.1, 1e-15);
  EXPECT_EQ(diffusion_layer_marker(0.1, 0.0), 0.0);
  EXPECT_THROW(diffusion_layer_marker(-0.1, 1.0), ConfigError);
}

TEST(Dip, UnimodalAndBimodal) {
  Eigen::ArrayXd uni(7);
  uni << 0, 1, 2, 5, 3, 1, 0;
  EXPECT_EQ(dip_depth(uni).maxCoeff(), 0.0);
  Eigen::ArrayXd bi(7);
  bi << 0, 3, 4, 2.5, 5, 1, 0;
  const Eigen::ArrayXd d = dip_depth(bi);
  EXPECT_DOUBLE_EQ(d[3], 1.5);
  EXPECT_EQ(d[0], 0.0);
  EXPECT_EQ(d[6], 0.0);
}

TEST(Sweep, ExksOrderingAndTumblingThreshold) {
  SweepPlan plan;
  plan.parameter = SweepParameter::nu;
  plan.values = {0.3, 0.0};
  plan.run_exks = true;
  plan.exks.I = 100;
  plan.exks.K = 100;
  plan.exks.t_end = 25.0;
  const ModelParams base{0.1, 10.0, 0.3, 1.25, 0.7, 10.0, 1};
  const auto pts = bimodality_sweep(base, plan);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].param, 0.0);
  EXPECT_EQ(pts[1].param, 0.3);
  EXPECT_EQ(pts[0].source, Source::exks);
  // No volcano without tumbling.
  EXPECT_LT(pts[0].rho_dd, 0.0);
  EXPECT_EQ(pts[0].rho_g_dd, 0.0);
  EXPECT_GT(pts[1].rho_dd, 0.0);
  EXPECT_GT(pts[1].rho_g_dd, 0.0);
  EXPECT_EQ(to_string(Source::mc), "MC");
  EXPECT_EQ(to_string(Source::exks), "ExKS");
}
