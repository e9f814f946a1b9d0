#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include <hyplab/heat.hpp>
#include <hyplab/kernels.hpp>
#include <hyplab/spectral_core.hpp>

#include "support.hpp"

using namespace hyplab;
using hyplab::testing::context;

TEST(ModelParams, DerivedQuantities) {
  ModelParams p;
  p.n = 5;
  p.sigma = 0.5;
  p.beta = 2.0;
  EXPECT_EQ(p.rho(), 2.0);
  EXPECT_EQ(p.lambda0(), 4.0);
  EXPECT_DOUBLE_EQ(p.gammaStar(), 2.0);
  EXPECT_DOUBLE_EQ(p.sobolevCritical(), 2.5);
}

TEST(ModelParams, RejectsOutOfRange) {
  ModelParams p;
  p.sigma = 1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p.sigma = 0.5;
  p.lambda = 1.01;
  EXPECT_THROW(p.validate(), DomainError);
  p.lambda = 0.0;
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), DomainError);
}

// reference values: |Gamma(i xi + rho)|^2 / |Gamma(i xi)|^2 in 30-digit arithmetic (mpmath)
TEST(PlancherelDensity, GammaQuotientOracle) {
  struct Row { int n; double xi, want; };
  const Row rows[] = {{2, 0.01, 0.00031405595188970949685}, {2, 0.3, 0.22090757985492807817},
                      {2, 1.0, 0.99627207622074994426},     {2, 7.5, 7.4999999999999999999},
                      {4, 0.01, 0.000078545393567616345163}, {4, 0.3, 0.075108577150675545105},
                      {4, 1.0, 1.2453400952759374303},      {4, 7.5, 423.75},
                      {5, 0.3, 0.0981},                     {5, 1.0, 2.0}};
  for (const auto& r : rows) EXPECT_NEAR(plancherel_density(r.n, r.xi) / r.want, 1.0, 1e-13) << r.n << " " << r.xi;
}

TEST(PlancherelDensity, ThreeDimensionsIsXiSquared) {
  for (double xi : {0.001, 0.5, 3.0, 40.0}) EXPECT_DOUBLE_EQ(plancherel_density(3, xi), xi * xi);
}

TEST(PlancherelDensity, LogLogSlopes) {
  for (int n : {2, 3, 4, 5, 6}) {
    auto slope = [&](double a, double b) { return std::log(plancherel_density(n, b) / plancherel_density(n, a)) / std::log(b / a); };
    EXPECT_NEAR(slope(1e-3, 1e-1), 2.0, 0.02) << n;
    EXPECT_NEAR(slope(1e2, 1e3), n - 1.0, 0.02) << n;
  }
  EXPECT_THROW(plancherel_density(3, -1.0), DomainError);
}

TEST(SphericalFunction, OriginAndClosedForm) {
  ModelParams p;
  for (int n : {2, 3, 4}) {
    p.n = n;
    EXPECT_EQ(spherical_function(p, 1.7, 0.0).value, 1.0);
  }
  p.n = 3;
  EXPECT_NEAR(spherical_function(p, 1.0, 1.0).value, std::sin(1.0) / std::sinh(1.0), 1e-10);
  for (double xi : {0.3, 2.0, 9.0})
    for (double r : {0.01, 0.5, 2.0, 6.0})
      EXPECT_NEAR(spherical_function(p, xi, r).value, std::sin(xi * r) / (xi * std::sinh(r)), 1e-9);
}

// 2F1((rho + i xi)/2, (rho - i xi)/2; n/2; -sinh^2 r) in 30-digit arithmetic (mpmath)
TEST(SphericalFunction, HypergeometricOracle) {
  struct Row { int n; double xi, r, want; };
  const Row rows[] = {{2, 0.5, 0.7, 0.94086814945921156906}, {2, 2.0, 1.5, -0.20986028017852813971},
                      {2, 0.0, 3.0, 0.62336752062420884022}, {2, 5.0, 0.3, 0.50939388474614914308},
                      {4, 0.5, 0.7, 0.85997181983114933068}, {4, 2.0, 1.5, 0.11839814229763526194},
                      {4, 0.0, 3.0, 0.1358725598161670511},  {4, 5.0, 0.3, 0.7251593041098923261}};
  ModelParams p;
  for (const auto& r : rows) {
    p.n = r.n;
    EXPECT_NEAR(spherical_function(p, r.xi, r.r).value, r.want, 1e-9) << r.n << " " << r.xi << " " << r.r;
    EXPECT_EQ(spherical_function(p, -r.xi, r.r).value, spherical_function(p, r.xi, r.r).value);
  }
}

TEST(SphericalFunction, EigenOdeResidual) {
  for (int n : {2, 4}) {
    const double rho = 0.5 * (n - 1);
    for (double xi : {0.0, 0.7, 3.0}) {
      std::vector<double> rs;
      const double h = 1e-3;
      for (double r = 1e-3 + 2 * h; r <= 10.0; r *= 1.6) rs.push_back(r);
      for (double r : rs) {
        auto v = detail::spherical_profile(n, xi, {r - 2 * h, r - h, r, r + h, r + 2 * h}, 1e-13);
        double d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h);
        double d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h);
        double res = d2 + (n - 1) / std::tanh(r) * d1 + (xi * xi + rho * rho) * v[2];
        // profile values carry ~1e-13, which the stencil turns into ~1e-7
        EXPECT_LT(std::abs(res), 1e-6) << n << " " << xi << " " << r;
      }
    }
  }
}

TEST(SphericalFunction, GroundFunctionBand) {
  ModelParams p;
  for (int n : {2, 3, 4}) {
    p.n = n;
    double lo = 1e300, hi = 0.0;
    for (double r = 1.0; r <= 30.0; r += 1.0) {
      double q = spherical_function(p, 0.0, r).value / ((1 + r) * std::exp(-0.5 * (n - 1) * r));
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 4.0) << n;
  }
}

TEST(Grids, VolumeAndPositivity) {
  const auto& ctx = context(3);
  const auto& g = *ctx.radial();
  for (std::size_t i = 1; i < g.size(); ++i) ASSERT_LT(g.nodes[i - 1], g.nodes[i]);
  for (double w : g.weights) ASSERT_GT(w, 0.0);
  // ball in H^3 of radius R: pi (sinh 2R - 2R), checked at R = 5 through the panel interpolant-free sum
  RadialFn one = RadialFn::sample(ctx.radial(), [](double r) { return r <= 5.0 ? 1.0 : 0.0; });
  EXPECT_NEAR(one.integral() / (M_PI * (std::sinh(10.0) - 10.0)), 1.0, 1e-12);
}

TEST(Grids, GridHashesDiffer) {
  const auto& a = context(3);
  const auto& b = context(3, hyplab::testing::Grid::Coarse);
  EXPECT_NE(a.radial()->hash(), b.radial()->hash());
  EXPECT_NE(a.spectral()->hash(), b.spectral()->hash());
}

TEST(Transform, RoundTripAndPlancherel) {
  for (int n : {2, 3, 4}) {
    const auto& ctx = context(n);
    for (auto f : {ctx.sample([](double r) { return std::exp(-r * r); }),
                   ctx.sample([](double r) { return std::exp(-4.0 * (r - 3) * (r - 3)) * std::cos(2 * r); })}) {
      EXPECT_LT(round_trip_error(ctx, f), 1e-6) << n;
      EXPECT_LT(plancherel_check(ctx, f).relError, 1e-6) << n;
    }
  }
}

TEST(Transform, ZeroFunction) {
  const auto& ctx = context(3);
  RadialFn z(ctx.radial());
  EXPECT_EQ(plancherel_check(ctx, z).relError, 0.0);
  EXPECT_EQ(round_trip_error(ctx, z), 0.0);
}

TEST(Transform, HeatKernelSpectrum) {
  for (int n : {2, 3}) {
    const auto& ctx = context(n);
    const double lam0 = 0.25 * (n - 1) * (n - 1);
    for (double t : {0.5, 2.0}) {
      RadialFn h = ctx.sample([&](double r) { return heat_exact(n, t, r); });
      SpectralFn H = ctx.forward(h);
      for (std::size_t j = 0; j < H.size(); j += 97) {
        double xi = ctx.spectral()->nodes[j];
        EXPECT_NEAR(H.values[j], std::exp(-t * (xi * xi + lam0)), 1e-8) << n << " " << t << " " << xi;
      }
      SpectralFn F(ctx.spectral());
      for (std::size_t j = 0; j < F.size(); ++j) {
        double xi = ctx.spectral()->nodes[j];
        F.values[j] = std::exp(-t * (xi * xi + lam0));
      }
      RadialFn back = ctx.inverse(F);
      for (std::size_t i = 0; i < back.size(); i += 53) {
        double r = ctx.radial()->nodes[i];
        double e = heat_exact(n, t, r);
        if (r > 12.0) break;
        // relative where the kernel is above the spectral floor
        EXPECT_LE(std::abs(back.values[i] - e), 1e-6 * e + 1e-12 * back.sup()) << n << " " << t << " " << r;
      }
    }
  }
}

TEST(Transform, LowFrequencyDecay) {
  const auto& ctx = context(3);
  SpectralFn F(ctx.spectral());
  for (std::size_t j = 0; j < F.size(); ++j) {
    double xi = ctx.spectral()->nodes[j];
    F.values[j] = xi <= 1.0 ? std::pow(1.0 - xi * xi, 4) : 0.0;
  }
  RadialFn f = ctx.inverse(F);
  // the multiplier vanishes to fourth order at xi = 1, so peaks of |f| follow e^{-rho r} r^{-5}
  std::vector<double> x, y;
  for (double a = 15.0; a < 30.0; a += 1.5) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (ctx.radial()->nodes[i] >= a && ctx.radial()->nodes[i] < a + 1.5) m = std::max(m, std::abs(f.values[i]));
    x.push_back(a + 0.75);
    y.push_back(std::log(m) + 5.0 * std::log(a + 0.75));
  }
  EXPECT_NEAR(fit_slope(x, y), -1.0, 0.05);
}

TEST(Transform, TruncationWarning) {
  const auto& ctx = context(3);
  RadialFn slow = ctx.sample([](double r) { return std::exp(-0.5 * r); });
  EXPECT_TRUE(ctx.forward(slow).truncationWarning);
  EXPECT_FALSE(ctx.forward(ctx.sample([](double r) { return std::exp(-r * r); })).truncationWarning);
}

TEST(Cache, RoundTripIsBitwise) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "hyplab_cache_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  GridSpec g = GridSpec::coarse();
  SpectralContext a(3, g, dir.string());
  EXPECT_FALSE(a.cache_hit());
  SpectralContext b(3, g, dir.string());
  EXPECT_TRUE(b.cache_hit());
  EXPECT_EQ(a.table(), b.table());
  EXPECT_EQ(a.spectral()->inversionConstant, b.spectral()->inversionConstant);
  // a different dimension does not pick up the n = 3 table
  SpectralContext c(2, g, dir.string());
  EXPECT_FALSE(c.cache_hit());
  fs::remove_all(dir);
}

TEST(PanelInterpolant, ExactForPolynomialsAtAndNearNodes) {
  const auto& ctx = context(3);
  RadialFn p = ctx.sample([](double r) { return 1.0 + r - 0.5 * r * r + r * r * r / 6.0; });
  for (std::size_t i : {0ul, 5ul, 86ul, 400ul}) {
    for (double dr : {0.0, 1e-12, 1e-9, 1e-4}) {
      double r = ctx.radial()->nodes[i] + dr, f, d1, d2;
      p.derivatives(r, f, d1, d2);
      EXPECT_NEAR(f, 1.0 + r - 0.5 * r * r + r * r * r / 6.0, 1e-9 * (1 + r * r * r));
      EXPECT_NEAR(d1, 1.0 - r + 0.5 * r * r, 1e-8 * (1 + r * r));
      EXPECT_NEAR(d2, -1.0 + r, 1e-6 * (1 + r));
    }
  }
}
