#ifndef HYPLAB_INEQUALITIES_HPP
#define HYPLAB_INEQUALITIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <tbb/parallel_for.h>

#include "fraclap.hpp"
#include "io.hpp"
#include "params.hpp"
#include "spectral_core.hpp"

namespace hyplab {

/** \brief Admissible Poincare-Sobolev exponents (2, 2n/(n - 2 sigma)]. */
inline double poincare_q_max(int n, double sigma) { return 2.0 * n / (n - 2.0 * sigma); }

/** \brief ||u||^2_{lambda,sigma} / ||u||_q^2. */
inline double poincare_quotient(const SpectralContext& ctx, const RadialFn& u, double q, double sigma,
                                double lambda) {
  if (!(q > 2.0 && q <= poincare_q_max(ctx.n(), sigma) * (1.0 + 1e-14)))
    throw DomainError("poincare_quotient: q must lie in (2, 2n/(n-2 sigma)]");
  double lq = u.lp_norm_pow(q);
  if (!(lq > 0.0)) throw DegenerateInputError("poincare_quotient: u vanishes");
  return shifted_norm_sq(ctx, u, lambda, sigma) / std::pow(lq, 2.0 / q);
}

struct QuotientSample {
  std::string testFnId;
  double q = 0.0, sigma = 0.0, lambda = 0.0;
  double quotient = 0.0;
};

struct TestFamily {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::string> ids;
  std::vector<RadialFn> members;
  std::uint64_t hash = 0;

  std::size_t size() const { return members.size(); }
  void add(std::string id, RadialFn f) {
    ids.push_back(std::move(id));
    members.push_back(std::move(f));
  }
  void rehash() {
    std::vector<double> all;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (char c : ids[i]) all.push_back(c);
      all.push_back(members[i].valueAtOrigin);
      all.insert(all.end(), members[i].values.begin(), members[i].values.end());
    }
    hash = hash_doubles(all, seed);
  }
};

namespace detail {
// top 53 bits, independent of the standard library's distribution code
inline double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }
}  // namespace detail

/**
 * \brief The 100-member family: 7 Gaussians of width 2^k (k = -3..3), 12
 * translated shells, 12 oscillatory bumps, 5 compact bumps, 4 exponentials
 * and 60 seeded random Gaussian combinations.
 */
inline TestFamily standard_test_family(const SpectralContext& ctx, std::uint64_t seed = 1) {
  auto g = ctx.radial();
  const double rho = 0.5 * (ctx.n() - 1);
  TestFamily fam;
  fam.name = "standard100";
  fam.seed = seed;
  auto add = [&](std::string id, auto&& f) { fam.add(std::move(id), RadialFn::sample(g, f)); };
  for (int k = -3; k <= 3; ++k) {
    double w = std::ldexp(1.0, k);
    add("gauss_w" + fmt17(w), [w](double r) { return std::exp(-r * r / (w * w)); });
  }
  for (double c : {1.0, 2.0, 4.0, 8.0})
    for (double w : {0.5, 1.0, 2.0})
      add("shell_c" + fmt17(c) + "_w" + fmt17(w), [c, w](double r) { return std::exp(-(r - c) * (r - c) / (w * w)); });
  for (double k : {1.0, 2.0, 4.0, 8.0})
    for (double w : {1.0, 2.0, 4.0})
      add("osc_k" + fmt17(k) + "_w" + fmt17(w), [k, w](double r) { return std::cos(k * r) * std::exp(-r * r / (w * w)); });
  for (double R : {0.5, 1.0, 2.0, 4.0, 8.0})
    add("compact_R" + fmt17(R), [R](double r) {
      double x = 1.0 - (r / R) * (r / R);
      return x > 0.0 ? x * x * x : 0.0;
    });
  for (double a : {1.0, 2.0, 3.0, 4.0}) {
    double rate = rho + a;
    add("exp_a" + fmt17(rate), [rate](double r) { return std::exp(-rate * r); });
  }
  std::mt19937_64 rng(seed);
  for (int m = 0; m < 60; ++m) {
    double c[3], w[3], a[3];
    for (int j = 0; j < 3; ++j) {
      c[j] = 6.0 * detail::unit_uniform(rng);
      w[j] = 0.3 + 2.7 * detail::unit_uniform(rng);
      a[j] = 2.0 * detail::unit_uniform(rng) - 1.0;
    }
    add("combo_" + std::to_string(m), [=](double r) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += a[j] * std::exp(-(r - c[j]) * (r - c[j]) / (w[j] * w[j]));
      return s;
    });
  }
  fam.rehash();
  return fam;
}

/** \brief All (member, q) quotients; evaluation is parallel, order is fixed. */
inline std::vector<QuotientSample> family_quotients(const SpectralContext& ctx, const TestFamily& fam,
                                                    const std::vector<double>& qs, double sigma, double lambda) {
  std::vector<QuotientSample> out(fam.size() * qs.size());
  tbb::parallel_for(std::size_t(0), fam.size(), [&](std::size_t i) {
    SpectralFn F = ctx.forward(fam.members[i]);
    double e = shifted_norm_sq(ctx, F, lambda, sigma);
    for (std::size_t k = 0; k < qs.size(); ++k) {
      double q = qs[k];
      if (!(q > 2.0 && q <= poincare_q_max(ctx.n(), sigma) * (1.0 + 1e-14)))
        throw DomainError("poincare_quotient: q must lie in (2, 2n/(n-2 sigma)]");
      double lq = fam.members[i].lp_norm_pow(q);
      if (!(lq > 0.0)) throw DegenerateInputError("poincare_quotient: member " + fam.ids[i] + " vanishes");
      out[i * qs.size() + k] = {fam.ids[i], q, sigma, lambda, e / std::pow(lq, 2.0 / q)};
    }
  });
  return out;
}

struct BestConstantEstimate {
  double minQuotient = std::numeric_limits<double>::infinity();
  std::string argmin;
  std::uint64_t familyHash = 0;
  std::vector<QuotientSample> samples;
};

/** \brief Minimum over the family: an empirical upper bound for the best constant, nothing sharper. */
inline BestConstantEstimate estimate_best_constant(const SpectralContext& ctx, const TestFamily& fam, double q,
                                                   double sigma, double lambda) {
  if (fam.size() == 0) throw StructuralError("estimate_best_constant: empty family");
  BestConstantEstimate est;
  est.familyHash = fam.hash;
  est.samples = family_quotients(ctx, fam, {q}, sigma, lambda);
  for (const auto& s : est.samples)
    if (s.quotient < est.minQuotient) {
      est.minQuotient = s.quotient;
      est.argmin = s.testFnId;
    }
  return est;
}

inline void write_quotient_csv(std::ostream& os, const TestFamily& fam, const std::vector<QuotientSample>& samples,
                               std::uint64_t configHash, std::uint64_t seed) {
  CsvWriter w(os, {"familyId", "fnId", "q", "sigma", "lambda", "quotient"}, configHash, seed);
  for (const auto& s : samples) {
    w.cell(fam.name + ":" + hex64(fam.hash)).cell(s.testFnId).cell(s.q).cell(s.sigma).cell(s.lambda).cell(s.quotient);
    w.end_row();
  }
}

struct ShiftOrderReport {
  double fracShiftNorm = 0.0;  ///< ||(Delta^sigma - lambda0^sigma)^{1/2} u||
  double powerShiftNorm = 0.0;  ///< ||(Delta - lambda0)^{sigma/2} u||
  double ratio = 0.0;  ///< powerShiftNorm / fracShiftNorm
  double reverseRatio = 0.0;
  double minMultiplierRatio = 0.0;  ///< min over nodes of xi^{2 sigma} / ((xi^2+lambda0)^sigma - lambda0^sigma)
};

/** \brief Both shifted norms of u; xi^{2 sigma} >= (xi^2+lambda0)^sigma - lambda0^sigma pointwise. */
inline ShiftOrderReport compare_shift_orders(const SpectralContext& ctx, const SpectralFn& U, double sigma) {
  const int n = ctx.n();
  const double lam0 = 0.25 * (n - 1) * (n - 1);
  ShiftOrderReport rep;
  double a = ctx.spectral_inner(U, U, [&](double x) { return shifted_multiplier(n, x, lam0, sigma); });
  double b = ctx.spectral_inner(U, U, [&](double x) { return std::pow(x, 2.0 * sigma); });
  if (!(a > 0.0)) throw DegenerateInputError("compare_shift_orders: u vanishes");
  rep.fracShiftNorm = std::sqrt(a);
  rep.powerShiftNorm = std::sqrt(b);
  rep.ratio = rep.powerShiftNorm / rep.fracShiftNorm;
  rep.reverseRatio = 1.0 / rep.ratio;
  rep.minMultiplierRatio = std::numeric_limits<double>::infinity();
  for (double x : ctx.spectral()->nodes)
    rep.minMultiplierRatio = std::min(rep.minMultiplierRatio, std::pow(x, 2.0 * sigma) / shifted_multiplier(n, x, lam0, sigma));
  return rep;
}

inline ShiftOrderReport compare_shift_orders(const SpectralContext& ctx, const RadialFn& u, double sigma) {
  return compare_shift_orders(ctx, ctx.forward(u), sigma);
}

/**
 * \brief Spectrum of the heat kernel at time t, e^{-t(xi^2 + lambda0)}; as t
 * grows it concentrates at xi = 0 where the two multipliers differ in order.
 */
inline SpectralFn heat_spectrum(const SpectralContext& ctx, double t) {
  const double lam0 = 0.25 * (ctx.n() - 1) * (ctx.n() - 1);
  SpectralFn F(ctx.spectral());
  for (std::size_t j = 0; j < F.size(); ++j) {
    double x = ctx.spectral()->nodes[j];
    F.values[j] = std::exp(-t * (x * x + lam0));
  }
  return F;
}

struct MultiplierBand {
  std::string name;
  double lambda = 0.0;
  double minRatio = 0.0, maxRatio = 0.0;
  bool bounded = false;
};

struct MultiplierEquivalenceReport {
  double sigma = 0.0;
  std::vector<MultiplierBand> bands;
  bool ok = false;
};

/**
 * \brief Ratio of (xi^2+lambda0)^sigma - lambda^sigma to its model: xi^{2 sigma}
 * for xi >= 1 (any lambda), xi^2 for xi <= 1 at lambda = lambda0, 1 for xi <= 1
 * at lambda < lambda0. Bounded means the ratio stays in a compact subset of (0, inf);
 * numerically, max/min below 1e3.
 */
inline MultiplierEquivalenceReport multiplier_equivalence_check(int n, const std::vector<double>& lambdas,
                                                                double sigma, const std::vector<double>& xi) {
  const double lam0 = 0.25 * (n - 1) * (n - 1);
  MultiplierEquivalenceReport rep;
  rep.sigma = sigma;
  rep.ok = true;
  for (double lam : lambdas) {
    if (lam < 0.0 || lam > lam0) throw DomainError("multiplier_equivalence_check: lambda must lie in [0, lambda0]");
    bool critical = lam == lam0;
    MultiplierBand hi{"high", lam, std::numeric_limits<double>::infinity(), 0.0, false};
    MultiplierBand lo{critical ? "low-critical" : "low-subcritical", lam, std::numeric_limits<double>::infinity(), 0.0,
                      false};
    for (double x : xi) {
      if (!(x > 0.0)) continue;
      double m = shifted_multiplier(n, x, lam, sigma);
      MultiplierBand& b = x >= 1.0 ? hi : lo;
      double model = x >= 1.0 ? std::pow(x, 2.0 * sigma) : (critical ? x * x : 1.0);
      double r = m / model;
      b.minRatio = std::min(b.minRatio, r);
      b.maxRatio = std::max(b.maxRatio, r);
    }
    for (MultiplierBand* b : {&hi, &lo}) {
      if (!std::isfinite(b->minRatio)) continue;  // no nodes in this band
      b->bounded = b->minRatio > 0.0 && std::isfinite(b->maxRatio) && b->maxRatio / b->minRatio < 1e3;
      rep.ok = rep.ok && b->bounded;
      rep.bands.push_back(*b);
    }
  }
  return rep;
}

}  // namespace hyplab

#endif  // HYPLAB_INEQUALITIES_HPP
