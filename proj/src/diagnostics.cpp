#include "chemokin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chemokin/error.hpp"
#include "chemokin/rng.hpp"

namespace chemokin {

double center_second_derivative(const Eigen::ArrayXd& rho, double dx) {
  const Eigen::Index n = rho.size();
  if (n < 4 || n % 2 != 0) throw ConfigError("centre stencil needs an even number of cells >= 4");
  if (!(dx > 0.0)) throw ConfigError("dx must be > 0");
  const Eigen::Index h = n / 2;
  return (rho[h + 1] - rho[h] - rho[h - 1] + rho[h - 2]) / (dx * dx);
}

const Eigen::ArrayXd& density(const GridProfile& profile, Density which) {
  switch (which) {
    case Density::rho_f:
      return profile.rho_f;
    case Density::rho_g:
      return profile.rho_g;
    case Density::rho:
      break;
  }
  return profile.rho;
}

CurvatureEstimate center_second_derivative(const mc::McResult& result, Density which, int resamples,
                                           std::uint64_t seed) {
  const auto nb = static_cast<int>(result.blocks.size());
  if (nb < 2) throw ConfigError("bootstrap needs at least two blocks");
  if (resamples < 2) throw ConfigError("bootstrap needs at least two resamples");
  const double dx = result.average.geometry.dx();

  // The stencil is linear, so a resample's value is the mean of block values.
  Eigen::ArrayXd block_value(nb);
  for (int b = 0; b < nb; ++b) block_value[b] = center_second_derivative(density(result.blocks[b], which), dx);

  const Philox4x32 rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int r = 0; r < resamples; ++r) {
    double acc = 0.0;
    for (int j = 0; j < nb; ++j) {
      const auto word = rng.draw(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(j))[0];
      const auto pick = static_cast<int>((static_cast<std::uint64_t>(word) * nb) >> 32);
      acc += block_value[pick];
    }
    const double v = acc / nb;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / resamples;
  const double var = std::max(0.0, (sum_sq / resamples - mean * mean) * resamples / (resamples - 1));
  return {center_second_derivative(density(result.average, which), dx), std::sqrt(var)};
}

std::string to_string(Source source) { return source == Source::mc ? "MC" : "ExKS"; }

std::string to_string(SweepParameter parameter) { return parameter == SweepParameter::tau ? "tau" : "nu"; }

std::vector<BimodalityPoint> bimodality_sweep(const ModelParams& base, const SweepPlan& plan) {
  std::vector<double> values = plan.values;
  std::sort(values.begin(), values.end());
  std::vector<BimodalityPoint> out;
  for (const double v : values) {
    ModelParams p = base;
    (plan.parameter == SweepParameter::tau ? p.tau : p.nu) = v;
    validate(p);
    if (plan.run_mc) {
      mc::McConfig c = plan.mc;
      c.params = p;
      const mc::McResult r = mc::run(c);
      const CurvatureEstimate rho = center_second_derivative(r, Density::rho);
      const double dx = r.average.geometry.dx();
      BimodalityPoint pt;
      pt.param = v;
      pt.source = Source::mc;
      pt.rho_dd = rho.value;
      pt.rho_dd_se = rho.standard_error;
      pt.rho_f_dd = center_second_derivative(r.average.rho_f, dx);
      pt.rho_g_dd = center_second_derivative(r.average.rho_g, dx);
      out.push_back(pt);
    }
    if (plan.run_exks) {
      const ExksState s = exks_solve(p, p.epsilon * p.tau, plan.exks);
      const GridProfile prof = exks_profile(s, p);
      const double dx = prof.geometry.dx();
      BimodalityPoint pt;
      pt.param = v;
      pt.source = Source::exks;
      pt.rho_dd = center_second_derivative(prof.rho, dx);
      pt.rho_f_dd = center_second_derivative(prof.rho_f, dx);
      pt.rho_g_dd = center_second_derivative(prof.rho_g, dx);
      out.push_back(pt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Curve {
  Eigen::ArrayXd X;  // increasing
  Eigen::ArrayXd v;
};

Curve rescaled(const ScaledProfile& p) {
  if (!(p.beta > 0.0)) throw ConfigError("collapse needs beta > 0");
  if (p.geometry.dim != 1 || p.rho.size() != p.geometry.n) throw ConfigError("collapse needs 1D profiles");
  const double peak = p.rho.maxCoeff();
  if (!(peak > 0.0)) throw ConfigError("collapse needs a positive peak");
  Curve c;
  c.X.resize(p.geometry.n);
  for (int i = 0; i < p.geometry.n; ++i) c.X[i] = p.geometry.center(i) / std::sqrt(p.beta);
  c.v = p.rho / peak;
  return c;
}

double interpolate(const Curve& c, double X) {
  const Eigen::Index n = c.X.size();
  if (X <= c.X[0]) return c.v[0];
  if (X >= c.X[n - 1]) return c.v[n - 1];
  const auto it = std::upper_bound(c.X.data(), c.X.data() + n, X);
  const auto j = static_cast<Eigen::Index>(it - c.X.data());
  const double f = (X - c.X[j - 1]) / (c.X[j] - c.X[j - 1]);
  return c.v[j - 1] + f * (c.v[j] - c.v[j - 1]);
}

}  // namespace

double rescale_collapse(const std::vector<ScaledProfile>& profiles) {
  std::vector<Curve> curves;
  curves.reserve(profiles.size());
  for (const auto& p : profiles) curves.push_back(rescaled(p));
  double worst = 0.0;
  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      const Curve& A = curves[a];
      const Curve& B = curves[b];
      const double lo = std::max(A.X[0], B.X[0]);
      const double hi = std::min(A.X[A.X.size() - 1], B.X[B.X.size() - 1]);
      if (!(lo < hi)) throw ConfigError("rescaled supports do not overlap");
      for (const Curve* c : {&A, &B}) {
        for (Eigen::Index i = 0; i < c->X.size(); ++i) {
          const double X = c->X[i];
          if (X < lo || X > hi) continue;
          worst = std::max(worst, std::abs(interpolate(A, X) - interpolate(B, X)));
        }
      }
    }
  }
  return worst;
}

double peak_position(const Eigen::ArrayXd& rho, const CellGeometry& geometry) {
  const int n = geometry.n;
  if (geometry.dim != 1 || rho.size() != n || n < 4) throw ConfigError("peak search needs a 1D profile");
  int im = n / 2;
  for (int i = n / 2; i < n; ++i) {
    if (rho[i] > rho[im]) im = i;
  }
  double shift = 0.0;
  if (im > 0 && im < n - 1) {
    const double curv = rho[im - 1] - 2.0 * rho[im] + rho[im + 1];
    if (curv < 0.0) shift = 0.5 * (rho[im - 1] - rho[im + 1]) / curv;
  }
  return geometry.center(im) + shift * geometry.dx();
}

PeakAlignment peak_alignment(const std::vector<ScaledProfile>& profiles) {
  PeakAlignment out;
  std::vector<double> width;
  for (const auto& p : profiles) {
    if (!(p.beta > 0.0)) throw ConfigError("peak alignment needs beta > 0");
    const double s = std::sqrt(p.beta);
    out.rescaled_peaks.push_back(peak_position(p.rho, p.geometry) / s);
    width.push_back(p.geometry.dx() / s);
  }
  for (std::size_t a = 0; a < profiles.size(); ++a) {
    for (std::size_t b = a + 1; b < profiles.size(); ++b) {
      const double gap = std::abs(out.rescaled_peaks[a] - out.rescaled_peaks[b]);
      out.max_gap = std::max(out.max_gap, gap);
      if (gap > std::max(width[a], width[b])) out.aligned = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double mean_defined(double a, double b) {
  if (std::isnan(a)) return b;
  if (std::isnan(b)) return a;
  return 0.5 * (a + b);
}

}  // namespace

GridProfile slice_2d(const GridProfile& profile, int axis, double value) {
  const CellGeometry& g = profile.geometry;
  if (g.dim != 2) throw ConfigError("slice needs a 2D profile");
  if (axis != 0 && axis != 1) throw ConfigError("slice axis must be 0 or 1");
  const double half = 0.5 * g.length;
  if (!std::isfinite(value) || value < -half || value > half) throw ConfigError("slice value outside the domain");

  const int n = g.n;
  const double u = (value + half) / g.dx();
  const double nearest = std::round(u);
  int lo;
  int hi;
  if (std::abs(u - nearest) <= 1e-9 * std::max(1.0, u)) {
    // On a face; the faces at -L/2 and L/2 are the same periodic face.
    hi = static_cast<int>(nearest) % n;
    lo = (hi + n - 1) % n;
  } else {
    lo = hi = std::clamp(static_cast<int>(std::floor(u)), 0, n - 1);
  }

  GridProfile out = GridProfile::zeros(CellGeometry{1, n, g.length});
  out.snapshots = profile.snapshots;
  out.window = profile.window;
  const auto flat = [&](int line, int j) { return axis == 0 ? line + j * n : j + line * n; };
  for (int j = 0; j < n; ++j) {
    const int a = flat(lo, j);
    const int b = flat(hi, j);
    out.rho[j] = 0.5 * (profile.rho[a] + profile.rho[b]);
    out.rho_f[j] = 0.5 * (profile.rho_f[a] + profile.rho_f[b]);
    out.rho_g[j] = 0.5 * (profile.rho_g[a] + profile.rho_g[b]);
    out.xi_plus[j] = mean_defined(profile.xi_plus[a], profile.xi_plus[b]);
    out.xi_minus[j] = mean_defined(profile.xi_minus[a], profile.xi_minus[b]);
    out.xi_bar[j] = mean_defined(profile.xi_bar[a], profile.xi_bar[b]);
  }
  return out;
}

RadialProfile radial_profile(const GridProfile& profile, double dr) {
  const CellGeometry& g = profile.geometry;
  if (g.dim != 2) throw ConfigError("radial profile needs a 2D profile");
  if (!(dr > 0.0)) throw ConfigError("dr must be > 0");
  const int bins = static_cast<int>(std::floor(0.5 * g.length / dr));
  if (bins < 1) throw ConfigError("dr exceeds L/2");
  RadialProfile out;
  out.r = Eigen::ArrayXd::LinSpaced(bins, 0.5 * dr, (bins - 0.5) * dr);
  out.rho = Eigen::ArrayXd::Zero(bins);
  out.rho_f = Eigen::ArrayXd::Zero(bins);
  out.rho_g = Eigen::ArrayXd::Zero(bins);
  Eigen::ArrayXd count = Eigen::ArrayXd::Zero(bins);
  for (int i2 = 0; i2 < g.n; ++i2) {
    for (int i1 = 0; i1 < g.n; ++i1) {
      const double r = std::hypot(g.center(i1), g.center(i2));
      const int b = static_cast<int>(r / dr);
      if (b >= bins) continue;
      const int c = i1 + i2 * g.n;
      out.rho[b] += profile.rho[c];
      out.rho_f[b] += profile.rho_f[c];
      out.rho_g[b] += profile.rho_g[c];
      count[b] += 1.0;
    }
  }
  const Eigen::ArrayXd safe = count.max(1.0);
  out.rho = (count > 0.0).select(out.rho / safe, kMissing);
  out.rho_f = (count > 0.0).select(out.rho_f / safe, kMissing);
  out.rho_g = (count > 0.0).select(out.rho_g / safe, kMissing);
  return out;
}

double diffusion_layer_marker(double epsilon, double tau) {
  if (!(epsilon > 0.0) || !(tau >= 0.0) || !std::isfinite(epsilon) || !std::isfinite(tau)) {
    throw ConfigError("diffusion layer needs epsilon > 0 and tau >= 0");
  }
  return std::sqrt(epsilon * tau);
}

Eigen::ArrayXd dip_depth(const Eigen::ArrayXd& values) {
  const Eigen::Index n = values.size();
  Eigen::ArrayXd left(n);
  Eigen::ArrayXd right(n);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(n);
  if (n < 3) return out;
  left[0] = values[0];
  for (Eigen::Index i = 1; i < n; ++i) left[i] = std::max(left[i - 1], values[i]);
  right[n - 1] = values[n - 1];
  for (Eigen::Index i = n - 2; i >= 0; --i) right[i] = std::max(right[i + 1], values[i]);
  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    out[j] = std::max(0.0, std::min(left[j - 1], right[j + 1]) - values[j]);
  }
  return out;
}

}  // namespace chemokin
