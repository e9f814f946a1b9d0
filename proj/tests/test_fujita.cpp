#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <hyplab/fraclap.hpp>
#include <hyplab/fujita.hpp>
#include <hyplab/kernels.hpp>

#include "support.hpp"

using namespace hyplab;
using hyplab::testing::context;
using hyplab::testing::Grid;
using hyplab::testing::sample;

namespace {

FujitaConfig base_config(const SpectralContext& ctx, double amp) {
  FujitaConfig c;
  c.params.n = 3;
  c.params.sigma = 0.5;
  c.params.beta = 1.0;
  c.params.gamma = 1.5;
  c.initialData = sample(ctx, [amp](double r) { return amp * std::exp(-r * r); });
  c.horizon = 20.0;
  return c;
}

double rel_l2(const RadialFn& a, const RadialFn& b) { return (a - b).l2() / b.l2(); }

}  // namespace

TEST(Semigroup, IdentityAndComposition) {
  const auto& ctx = context(3);
  auto g = sample(ctx, [](double r) { return std::exp(-r * r); });
  auto same = semigroup_apply(ctx, g, 0.5, 0.0);
  EXPECT_EQ(same.values, g.values);
  EXPECT_THROW(semigroup_apply(ctx, g, 0.5, -1.0), DomainError);

  auto p = frac_heat_kernel(ctx, 0.5, 0.5, Route::Spectral).profile;
  auto want = frac_heat_kernel(ctx, 0.5, 1.0, Route::Spectral).profile;
  auto got = semigroup_apply(ctx, p, 0.5, 0.5);
  double d = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) d = std::max(d, std::abs(got.values[i] - want.values[i]));
  EXPECT_LT(d / want.sup(), 1e-6);
}

TEST(Semigroup, SupNormDecayRate) {
  const auto& ctx = context(3);
  auto g = sample(ctx, [](double r) { return std::exp(-r * r); });
  std::vector<double> ts{5.0, 10.0, 20.0, 40.0};
  auto S = sup_norm_profile(ctx, g, 0.5, ts);
  std::vector<double> y;
  for (std::size_t k = 0; k < ts.size(); ++k) y.push_back(std::log(S[k]) + 1.5 * std::log(ts[k]));
  EXPECT_NEAR(fit_slope(ts, y), -1.0, 0.05);
}

TEST(MildSolver, LinearLimit) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 1.0);
  c.nonlinear = false;
  c.horizon = 3.0;
  double dev = 0.0;
  auto tr = run(ctx, c, [&](double t, const RadialFn& u) {
    dev = std::max(dev, rel_l2(u, semigroup_apply(ctx, c.initialData, 0.5, t)));
  });
  EXPECT_LT(dev, 1e-8);
  EXPECT_EQ(tr.verdict, Verdict::GlobalWithinHorizon);
}

TEST(MildSolver, ZeroDataStaysZero) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 0.0);
  auto tr = run(ctx, c);
  EXPECT_EQ(tr.verdict, Verdict::GlobalWithinHorizon);
  EXPECT_EQ(tr.final.sup(), 0.0);
  EXPECT_EQ(step_mild(ctx, c.initialData, 0.0, 0.1, c).sup(), 0.0);
}

TEST(MildSolver, RejectsBadConfig) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 1.0);
  c.initialData.values[3] = -1.0;
  EXPECT_THROW(run(ctx, c), DomainError);
  c = base_config(ctx, 1.0);
  c.params.gamma = 1.0;
  EXPECT_THROW(run(ctx, c), DomainError);
}

TEST(MildSolver, SecondOrderOnManufacturedSolution) {
  // u(t) = (2 + sin 2t) g is driven by the forcing that makes it exact
  const auto& ctx = context(3);
  auto g = sample(ctx, [](double r) { return std::exp(-r * r); });
  auto Lg = frac_laplacian_spectral(ctx, g, 0.5);
  FujitaConfig c = base_config(ctx, 1.0);
  c.horizon = 1.0;
  c.step.maxIncrease = 1e9;
  c.initialData = 2.0 * g;
  c.forcing = [&](double t) {
    double a = 2.0 + std::sin(2.0 * t), h = std::exp(t);
    RadialFn F = (2.0 * std::cos(2.0 * t)) * g + a * Lg;
    RadialFn N(g.grid);
    for (std::size_t i = 0; i < g.size(); ++i) N.values[i] = h * std::pow(a * g.values[i], 1.5);
    N.valueAtOrigin = h * std::pow(a * g.valueAtOrigin, 1.5);
    return F - N;
  };
  RadialFn want = (2.0 + std::sin(2.0)) * g;
  std::vector<double> lx, ly;
  for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
    c.step.dt0 = dt;
    auto tr = run(ctx, c);
    lx.push_back(std::log(dt));
    ly.push_back(std::log(rel_l2(tr.final, want)));
  }
  EXPECT_NEAR(fit_slope(lx, ly), 2.0, 0.2);
}

TEST(MildSolver, ComparisonPrinciple) {
  const auto& ctx = context(3);
  FujitaConfig lo = base_config(ctx, 0.5), hi = base_config(ctx, 1.0);
  for (auto* c : {&lo, &hi}) {
    c->horizon = 2.0;
    c->step.maxIncrease = 1e9;
  }
  std::vector<RadialFn> a, b;
  run(ctx, lo, [&](double, const RadialFn& u) { a.push_back(u); });
  run(ctx, hi, [&](double, const RadialFn& u) { b.push_back(u); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    double tol = 1e-12 * b[k].sup();
    for (std::size_t i = 0; i < a[k].size(); ++i) ASSERT_LE(a[k].values[i], b[k].values[i] + tol) << k << " " << i;
  }
}

TEST(Dichotomy, SubcriticalBlowsUp) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 1.0);
  auto tr = run(ctx, c);
  EXPECT_EQ(tr.verdict, Verdict::BlowUp);
  EXPECT_LT(tr.tStar, 20.0);
}

TEST(Dichotomy, SupercriticalSmallDataIsGlobal) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 1.0);
  c.params.gamma = 3.0;
  c.initialData = 1e-3 * frac_heat_kernel(ctx, 0.5, 1.0, Route::Spectral).profile;
  for (double& v : c.initialData.values) v = std::max(v, 0.0);
  auto tr = run(ctx, c);
  EXPECT_EQ(tr.verdict, Verdict::GlobalWithinHorizon);
  EXPECT_LT(tr.supNorm.back(), tr.supNorm.front());
  auto w = weissler_certificate(ctx, c);
  EXPECT_TRUE(w.certifiesGlobal);
  EXPECT_FALSE(w.divergent);
  EXPECT_LT(w.integralValue, w.bound);
}

TEST(Dichotomy, BlowUpTimeIsStable) {
  FujitaConfig c = base_config(context(3), 1.0);
  double t0 = run(context(3), c).tStar;
  c.step.dt0 *= 0.5;
  double t1 = run(context(3), c).tStar;
  FujitaConfig r = base_config(context(3, Grid::Refined), 1.0);
  double t2 = run(context(3, Grid::Refined), r).tStar;
  ASSERT_TRUE(std::isfinite(t0));
  EXPECT_NEAR(t1 / t0, 1.0, 0.05);
  EXPECT_NEAR(t2 / t0, 1.0, 0.05);
}

TEST(Certificates, WeisslerCases) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 1e-3);
  c.params.gamma = 2.5;
  EXPECT_TRUE(weissler_certificate(ctx, c).certifiesGlobal);
  // critical exponent with beta > 2/3 lambda0^sigma: the integrand is a convergent power
  c.params.gamma = c.params.gammaStar();
  auto crit = weissler_certificate(ctx, c);
  EXPECT_FALSE(crit.divergent);
  EXPECT_TRUE(std::isfinite(crit.integralValue));
  c.params.gamma = 1.5;
  EXPECT_TRUE(weissler_certificate(ctx, c).divergent);
  FujitaConfig z = base_config(ctx, 0.0);
  z.params.gamma = 3.0;
  auto wz = weissler_certificate(ctx, z);
  EXPECT_TRUE(wz.certifiesGlobal);
  EXPECT_EQ(wz.integralValue, 0.0);
}

TEST(Certificates, BlowupProbe) {
  const auto& ctx = context(3);
  FujitaConfig c = base_config(ctx, 1.0);
  auto grow = blowup_certificate(ctx, c, 5.0);
  EXPECT_EQ(grow.probeTimes, (std::vector<double>{5.0, 10.0, 20.0, 40.0}));
  EXPECT_TRUE(grow.monotoneGrowth);
  EXPECT_GT(grow.growthRate, 0.0);
  EXPECT_TRUE(blowup_certificate(ctx, c).monotoneGrowth);
  c.params.gamma = 3.0;
  auto dec = blowup_certificate(ctx, c, 5.0);
  EXPECT_TRUE(dec.decays);
  EXPECT_FALSE(dec.monotoneGrowth);
  FujitaConfig z = base_config(ctx, 0.0);
  auto bz = blowup_certificate(ctx, z, 5.0);
  for (double v : bz.probeValues) EXPECT_EQ(v, 0.0);
  EXPECT_FALSE(bz.monotoneGrowth);
}

TEST(Certificates, ZeroSupersolution) {
  const auto& ctx = context(3);
  auto rep = supersolution_check(ctx, RadialFn(ctx.radial()), 0.5, 1.5);
  EXPECT_TRUE(rep.certified);
  RadialFn neg = sample(ctx, [](double r) { return -std::exp(-r); });
  EXPECT_THROW(supersolution_check(ctx, neg, 0.5, 1.5), DomainError);
  EXPECT_EQ(rescale_supersolution(2.0 * sample(ctx, [](double r) { return std::exp(-r); })).sup(), 1.0);
}

TEST(Dichotomy, CoarseScanTracksFrontier) {
  const auto& ctx = context(3, Grid::Coarse);
  FujitaConfig c;
  c.params.n = 3;
  c.params.sigma = 0.5;
  c.initialData = sample(ctx, [](double r) { return 0.5 * std::exp(-r * r); });
  c.horizon = 30.0;
  std::vector<double> B{0.5, 0.8, 1.1, 1.4, 1.7, 2.0}, G{1.35, 1.65, 1.95, 2.25, 2.55, 2.85};
  auto rows = fujita_scan(ctx, c, B, G, 0.5);
  auto fr = frontier_deviation(rows, B, G, 1.0);
  EXPECT_LE(fr.maxCellDeviation, 1);
  for (const auto& r : rows)
    if (r.gamma < 1.0 + r.beta) EXPECT_TRUE(r.certifiedBlowup) << r.beta << " " << r.gamma;
}
