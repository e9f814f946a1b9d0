#ifndef HYPLAB_KERNELS_HPP
#define HYPLAB_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <tbb/parallel_for.h>

#include "heat.hpp"
#include "params.hpp"
#include "quadrature.hpp"
#include "spectral_core.hpp"
#include "subordinator.hpp"

namespace hyplab {

enum class KernelKind { Heat, FracHeat, Singular, Resolvent };
enum class Route { Spectral, Subordination };

inline const char* kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::Heat: return "heat";
    case KernelKind::FracHeat: return "frac_heat";
    case KernelKind::Singular: return "singular";
    case KernelKind::Resolvent: return "resolvent";
  }
  return "?";
}

/** \brief A (radius, time) box with the exponent the estimates predict there. */
struct Regime {
  std::string label;
  double rMin = 0.0, rMax = 0.0, tMin = 0.0, tMax = 0.0;
  double predictedExponent = 0.0;
};

struct KernelProfile {
  KernelKind kind = KernelKind::Heat;
  Route route = Route::Spectral;
  double t = 0.0, sigma = 1.0, lambda = 0.0;
  RadialFn profile;
  std::vector<Regime> regimes;
  double mass = std::numeric_limits<double>::quiet_NaN();
  /** \brief Spectral profiles carry an absolute roundoff floor; positivity is asserted above it. */
  double noiseFloor = 0.0;
  bool truncationWarning = false;

  bool positive_above_floor() const {
    if (!(profile.valueAtOrigin > 0.0)) return false;
    for (double v : profile.values)
      if (std::abs(v) > noiseFloor && !(v > 0.0)) return false;
    return true;
  }
};

struct EstimateReport {
  std::string kind, regime;
  double rMin = 0.0, rMax = 0.0, tMin = 0.0, tMax = 0.0;
  double measuredSlope = 0.0, predictedSlope = 0.0;
  double ratioMin = 0.0, ratioMax = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
};

inline void write_estimate_csv(std::ostream& os, const std::vector<EstimateReport>& reps) {
  os << "kind,regime,rMin,rMax,tMin,tMax,measuredSlope,predictedSlope,ratioMin,ratioMax\n";
  char buf[512];
  for (const auto& r : reps) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.kind.c_str(),
                  r.regime.c_str(), r.rMin, r.rMax, r.tMin, r.tMax, r.measuredSlope, r.predictedSlope, r.ratioMin,
                  r.ratioMax);
    os << buf;
  }
}

/** \brief Least-squares slope of y against x. */
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {

inline double logsumexp_acc(const std::vector<double>& w, const std::vector<double>& l) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : l) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (std::size_t k = 0; k < l.size(); ++k) acc += w[k] * std::exp(l[k] - m);
  return m + std::log(acc);
}

/** \brief Log-s Gauss rule used for all heat mixtures. */
inline Rule mixture_rule(double lo, double hi, double width = 0.2, int m = 8) {
  int panels = std::max(1, static_cast<int>(std::ceil(std::log(hi / lo) / width)));
  return log_rule(lo, hi, panels, m);
}

/** \brief Upper end of the s window for mixtures evaluated at radii up to rTop. */
inline double mixture_s_high(int n, double rTop) {
  double rho = 0.5 * (n - 1), lam0 = rho * rho;
  return 3.0 * rTop / (2.0 * rho) + 200.0 / lam0;
}

/**
 * \brief log int h_s(r) m(s) ds on the rule q, for every radius.
 * Nodes where e^{-r^2/4s} cannot contribute are skipped.
 */
inline std::vector<double> heat_mixture_log(int n, const std::vector<double>& radii, const Rule& q,
                                            const std::vector<double>& logm) {
  if (!has_exact_heat(n)) throw DomainError("heat mixtures need the exact heat kernel (n = 2, 3)");
  const double rho = 0.5 * (n - 1);
  std::vector<double> out(radii.size());
  tbb::parallel_for(std::size_t(0), radii.size(), [&](std::size_t i) {
    double r = radii[i];
    double sMin = r * r / (4.0 * (rho * r + 900.0));
    std::vector<double> w, l;
    w.reserve(q.x.size());
    l.reserve(q.x.size());
    for (std::size_t k = 0; k < q.x.size(); ++k) {
      if (q.x[k] < sMin || !std::isfinite(logm[k])) continue;
      w.push_back(q.w[k]);
      l.push_back(logm[k] + log_heat_exact(n, q.x[k], r));
    }
    out[i] = l.empty() ? -std::numeric_limits<double>::infinity() : logsumexp_acc(w, l);
  });
  return out;
}

inline std::vector<double> with_origin(const RadialGrid& g) {
  std::vector<double> r{0.0};
  r.insert(r.end(), g.nodes.begin(), g.nodes.end());
  return r;
}

inline RadialFn from_log_values(std::shared_ptr<const RadialGrid> g, const std::vector<double>& lv) {
  RadialFn f(g);
  f.valueAtOrigin = std::exp(lv[0]);
  for (std::size_t i = 0; i < g->size(); ++i) f.values[i] = std::exp(lv[i + 1]);
  return f;
}

inline double log_eta(const Subordinator& S, double t, double s) {
  if (S.sigma() == 0.5) return Subordinator::log_density_half(t, s);
  return S.log_density(t, s);
}

inline double spectral_floor(const RadialFn& f) { return 1e-13 * f.sup(); }

}  // namespace detail

/** \brief Two-sided envelopes, kappa = 1; phi_0 is replaced by (1+r)e^{-rho r}. */
enum class EstimateRegime { SmallScale, LargeTimeNear, FarField, Excluded };

inline EstimateRegime classify_regime(double sigma, double t, double r, double kappa = 1.0) {
  if (t + r <= kappa) return EstimateRegime::SmallScale;
  if (r <= std::sqrt(t)) return EstimateRegime::LargeTimeNear;
  if (r >= std::pow(t, 1.0 / sigma)) return EstimateRegime::FarField;
  return EstimateRegime::Excluded;
}

inline const char* regime_name(EstimateRegime g) {
  switch (g) {
    case EstimateRegime::SmallScale: return "small_scale";
    case EstimateRegime::LargeTimeNear: return "large_time_near";
    case EstimateRegime::FarField: return "far_field";
    case EstimateRegime::Excluded: return "excluded";
  }
  return "?";
}

inline double log_frac_heat_envelope(int n, double sigma, double t, double r, EstimateRegime g) {
  double rho = 0.5 * (n - 1), lam0 = rho * rho;
  double lphi0 = std::log1p(r) - rho * r;
  switch (g) {
    case EstimateRegime::SmallScale:
      return std::log(t) - (n + 2.0 * sigma) * std::log(std::pow(t, 0.5 / sigma) + r);
    case EstimateRegime::LargeTimeNear: {
      double a = 1.0 / (2.0 - 2.0 * sigma);
      return lphi0 + a * std::log(t) - (1.5 + a) * std::log(t + r) - std::pow(lam0, sigma) * t;
    }
    case EstimateRegime::FarField:
      return lphi0 + std::log(t) - (2.0 + sigma) * std::log(t + r) - rho * r;
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

/** \brief h_t as the inverse transform of e^{-t(xi^2+rho^2)}. */
inline KernelProfile heat_kernel(const SpectralContext& ctx, double t) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be > 0");
  const double rho = 0.5 * (ctx.n() - 1);
  SpectralFn F(ctx.spectral());
  for (std::size_t j = 0; j < F.size(); ++j) {
    double x = ctx.spectral()->nodes[j];
    F.values[j] = std::exp(-t * (x * x + rho * rho));
  }
  double xm = ctx.spectral()->xiMax;
  F.truncationWarning = std::exp(-t * xm * xm) > 1e-12;
  KernelProfile k;
  k.kind = KernelKind::Heat;
  k.t = t;
  k.profile = ctx.inverse(F);
  k.noiseFloor = detail::spectral_floor(k.profile);
  k.truncationWarning = F.truncationWarning;
  // the volume growth amplifies spectral noise in the tail, so only the exact kernels give a mass
  k.mass = has_exact_heat(ctx.n()) ? heat_mass(ctx.n(), t) : std::numeric_limits<double>::quiet_NaN();
  k.regimes.push_back({"gaussian_tail", 5.0, 15.0, t, t, -rho});
  return k;
}

/** \brief log P_t^sigma(r) = log int h_s(r) eta_t(s) ds at arbitrary radii. */
inline std::vector<double> frac_heat_log_values(int n, double sigma, double t, const std::vector<double>& radii) {
  if (!(t > 0.0)) throw DomainError("frac_heat: t must be > 0");
  Subordinator S(sigma);
  double rTop = 0.0;
  for (double r : radii) rTop = std::max(rTop, r);
  double ts = std::pow(t, 1.0 / sigma);
  double lo = 0.5 * ts * S.x_low();
  double hi = std::max(detail::mixture_s_high(n, rTop), 10.0 * lo);
  Rule q = detail::mixture_rule(lo, hi);
  std::vector<double> lm(q.x.size());
  for (std::size_t k = 0; k < q.x.size(); ++k) lm[k] = detail::log_eta(S, t, q.x[k]);
  return detail::heat_mixture_log(n, radii, q, lm);
}

inline double frac_heat_value(int n, double sigma, double t, double r) {
  return std::exp(frac_heat_log_values(n, sigma, t, {r})[0]);
}

/** \brief ||P_t^sigma||_1 = int eta_t(s) ||h_s||_1 ds from the exact representation. */
inline double frac_heat_mass(int n, double sigma, double t) {
  Subordinator S(sigma);
  double ts = std::pow(t, 1.0 / sigma);
  double xlo = 0.5 * S.x_low(), xhi = 1e12;
  Rule q = log_rule(xlo, xhi, static_cast<int>(std::ceil(4.0 * std::log(xhi / xlo))), 10);
  std::vector<double> part(q.x.size());
  tbb::parallel_for(std::size_t(0), q.x.size(), [&](std::size_t i) {
    double s = ts * q.x[i];
    double e = std::exp(detail::log_eta(S, t, s));
    part[i] = e == 0.0 ? 0.0 : q.w[i] * ts * e * heat_mass(n, s);
  });
  double m = 0.0;
  for (double v : part) m += v;
  return m + S.tail(xhi);
}

/** \brief P_t^sigma by the spectral multiplier or by subordination. */
inline KernelProfile frac_heat_kernel(const SpectralContext& ctx, double sigma, double t, Route route) {
  if (!(t > 0.0)) throw DomainError("frac_heat_kernel: t must be > 0");
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("frac_heat_kernel: sigma must lie in (0,1)");
  const int n = ctx.n();
  const double rho = 0.5 * (n - 1);
  KernelProfile k;
  k.kind = KernelKind::FracHeat;
  k.route = route;
  k.t = t;
  k.sigma = sigma;
  if (route == Route::Spectral) {
    SpectralFn F(ctx.spectral());
    for (std::size_t j = 0; j < F.size(); ++j) {
      double x = ctx.spectral()->nodes[j];
      F.values[j] = std::exp(-t * std::pow(x * x + rho * rho, sigma));
    }
    double xm = ctx.spectral()->xiMax;
    k.truncationWarning = std::exp(-t * std::pow(xm * xm + rho * rho, sigma)) > 1e-12;
    k.profile = ctx.inverse(F);
    k.noiseFloor = detail::spectral_floor(k.profile);
  } else {
    auto lv = frac_heat_log_values(n, sigma, t, detail::with_origin(*ctx.radial()));
    k.profile = detail::from_log_values(ctx.radial(), lv);
  }
  k.mass = has_exact_heat(n) ? frac_heat_mass(n, sigma, t) : std::numeric_limits<double>::quiet_NaN();
  k.regimes.push_back({"far_field", std::max(1.0, std::pow(t, 1.0 / sigma)), ctx.radial()->rMax, t, t, -2.0 * rho});
  return k;
}

struct RouteReport {
  double maxRelDev = 0.0;
  double atRadius = 0.0;
};

/** \brief Spectral vs subordination P_t on r <= rLimit; values under the spectral floor are compared absolutely. */
inline RouteReport cross_validate_routes(const SpectralContext& ctx, double sigma, double t, double rLimit = 10.0,
                                         double tol = 1e-4, bool raise = true) {
  KernelProfile a = frac_heat_kernel(ctx, sigma, t, Route::Spectral);
  KernelProfile b = frac_heat_kernel(ctx, sigma, t, Route::Subordination);
  RouteReport rep;
  auto upd = [&](double va, double vb, double r) {
    double d = std::abs(va - vb) / std::max(std::abs(vb), 1e3 * a.noiseFloor);
    if (d > rep.maxRelDev) {
      rep.maxRelDev = d;
      rep.atRadius = r;
    }
  };
  upd(a.profile.valueAtOrigin, b.profile.valueAtOrigin, 0.0);
  for (std::size_t i = 0; i < a.profile.size(); ++i) {
    double r = ctx.radial()->nodes[i];
    if (r > rLimit) break;
    upd(a.profile.values[i], b.profile.values[i], r);
  }
  if (raise && rep.maxRelDev > tol)
    throw ConsistencyError("frac_heat_kernel: spectral and subordination routes disagree (" +
                           std::to_string(rep.maxRelDev) + " at r = " + std::to_string(rep.atRadius) + ")");
  return rep;
}

struct EstimateSample {
  double t = 0.0, r = 0.0;
};

/** \brief Sample sweeps covering the three validated regimes. */
inline std::vector<EstimateSample> default_estimate_samples(double sigma) {
  std::vector<EstimateSample> out;
  for (double t : {1e-3, 3e-3, 1e-2})
    for (double lr = std::log(0.05); lr <= std::log(0.5) + 1e-9; lr += std::log(10.0) / 8.0)
      out.push_back({t, std::exp(lr)});
  for (double t : {5.0, 10.0, 20.0, 40.0})
    for (double r : {0.0, 0.5, 1.0, 2.0}) out.push_back({t, r});
  for (double t : {0.5, 1.0, 2.0})
    for (double r = std::max(3.0, std::pow(t, 1.0 / sigma)); r <= 20.0 + 1e-9; r += 1.0) out.push_back({t, r});
  return out;
}

/**
 * \brief One report per regime: band of P/envelope and the slope of the
 * envelope-normalized log kernel in the regime's natural variable.
 */
inline std::vector<EstimateReport> validate_frac_heat_estimates(int n, double sigma,
                                                                const std::vector<EstimateSample>& samples) {
  const double rho = 0.5 * (n - 1), lam0 = rho * rho;
  struct Acc {
    std::vector<double> x, y;
    EstimateReport rep;
    bool any = false;
  };
  Acc acc[3];
  const char* names[3] = {"small_scale", "large_time_near", "far_field"};
  double preds[3] = {-(n + 2.0 * sigma), -std::pow(lam0, sigma), -(n - 1.0)};
  std::size_t skipped = 0;
  for (int g = 0; g < 3; ++g) {
    acc[g].rep.kind = "frac_heat";
    acc[g].rep.regime = names[g];
    acc[g].rep.predictedSlope = preds[g];
    acc[g].rep.ratioMin = std::numeric_limits<double>::infinity();
    acc[g].rep.ratioMax = 0.0;
  }
  // group by t so each mixture is built once
  std::vector<double> ts;
  for (const auto& s : samples) ts.push_back(s.t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (double t : ts) {
    std::vector<double> radii;
    for (const auto& s : samples)
      if (s.t == t) radii.push_back(s.r);
    auto lp = frac_heat_log_values(n, sigma, t, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      double r = radii[i];
      EstimateRegime g = classify_regime(sigma, t, r);
      if (g == EstimateRegime::Excluded) {
        ++skipped;
        continue;
      }
      int gi = static_cast<int>(g);
      Acc& a = acc[gi];
      double le = log_frac_heat_envelope(n, sigma, t, r, g);
      double ratio = std::exp(lp[i] - le);
      a.rep.ratioMin = std::min(a.rep.ratioMin, ratio);
      a.rep.ratioMax = std::max(a.rep.ratioMax, ratio);
      if (!a.any) {
        a.rep.rMin = a.rep.rMax = r;
        a.rep.tMin = a.rep.tMax = t;
        a.any = true;
      }
      a.rep.rMin = std::min(a.rep.rMin, r);
      a.rep.rMax = std::max(a.rep.rMax, r);
      a.rep.tMin = std::min(a.rep.tMin, t);
      a.rep.tMax = std::max(a.rep.tMax, t);
      ++a.rep.samples;
      if (g == EstimateRegime::SmallScale) {
        a.x.push_back(std::log(std::pow(t, 0.5 / sigma) + r));
        a.y.push_back(lp[i] - std::log(t));
      } else if (g == EstimateRegime::LargeTimeNear) {
        double b = 1.0 / (2.0 - 2.0 * sigma);
        a.x.push_back(t);
        a.y.push_back(lp[i] - (std::log1p(r) - rho * r) - b * std::log(t) + (1.5 + b) * std::log(t + r));
      } else {
        a.x.push_back(r);
        a.y.push_back(lp[i] - std::log(t) + (2.0 + sigma) * std::log(t + r) - std::log1p(r));
      }
    }
  }
  std::vector<EstimateReport> out;
  for (auto& a : acc) {
    if (!a.any) continue;
    a.rep.measuredSlope = a.x.size() >= 2 ? fit_slope(a.x, a.y) : std::numeric_limits<double>::quiet_NaN();
    a.rep.skipped = skipped;
    out.push_back(a.rep);
  }
  return out;
}

/** \brief Slope of log(t^{3/2} P_t(o)) over large t, from the spectral value at the origin. */
inline EstimateReport sup_norm_decay(const SpectralContext& ctx, double sigma, const std::vector<double>& times) {
  EstimateReport rep;
  rep.kind = "frac_heat";
  rep.regime = "sup_norm_large_t";
  const double rho = 0.5 * (ctx.n() - 1);
  rep.predictedSlope = -std::pow(rho * rho, sigma);
  rep.tMin = times.front();
  rep.tMax = times.back();
  rep.ratioMin = std::numeric_limits<double>::infinity();
  std::vector<double> x, y;
  for (double t : times) {
    double v = 0.0;
    for (std::size_t j = 0; j < ctx.spectral()->size(); ++j) {
      double xi = ctx.spectral()->nodes[j];
      v += ctx.spectral()->weights[j] * std::exp(-t * std::pow(xi * xi + rho * rho, sigma));
    }
    double ly = std::log(v) + 1.5 * std::log(t);
    x.push_back(t);
    y.push_back(ly);
    double ratio = std::exp(ly + std::pow(rho * rho, sigma) * t);
    rep.ratioMin = std::min(rep.ratioMin, ratio);
    rep.ratioMax = std::max(rep.ratioMax, ratio);
  }
  rep.samples = times.size();
  rep.measuredSlope = fit_slope(x, y);
  return rep;
}

/** \brief log P_0^sigma(r) = log int h_s(r) s^{-1-sigma} ds. */
inline std::vector<double> p0_log_values(int n, double sigma, const std::vector<double>& radii) {
  double rMin = std::numeric_limits<double>::infinity(), rTop = 0.0;
  for (double r : radii) {
    if (r > 0.0) rMin = std::min(rMin, r);
    rTop = std::max(rTop, r);
  }
  if (!std::isfinite(rMin)) rMin = 1e-6;
  double lo = std::min(1e-6, rMin * rMin / 3000.0);
  Rule q = detail::mixture_rule(lo, detail::mixture_s_high(n, rTop));
  std::vector<double> lm(q.x.size());
  for (std::size_t k = 0; k < q.x.size(); ++k) lm[k] = -(1.0 + sigma) * std::log(q.x[k]);
  auto out = detail::heat_mixture_log(n, radii, q, lm);
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (radii[i] == 0.0) out[i] = std::numeric_limits<double>::infinity();
  return out;
}

/** \brief Closed form on H^3: (4 pi)^{-3/2} (r/sinh r) 2 (r/2)^{-3/2-sigma} K_{3/2+sigma}(r). */
inline double p0_closed_form_h3(double sigma, double r) {
  double nu = 1.5 + sigma;
  double lk = std::log(boost::math::cyl_bessel_k(nu, r));
  return std::exp(-1.5 * std::log(4.0 * M_PI) + detail::log_r_over_sinh(r) + M_LN2 - nu * std::log(0.5 * r) + lk);
}

inline KernelProfile p0_kernel(const SpectralContext& ctx, double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("p0_kernel: sigma must lie in (0,1)");
  const int n = ctx.n();
  KernelProfile k;
  k.kind = KernelKind::Singular;
  k.route = Route::Subordination;
  k.sigma = sigma;
  auto lv = p0_log_values(n, sigma, ctx.radial()->nodes);
  k.profile = RadialFn(ctx.radial());
  for (std::size_t i = 0; i < lv.size(); ++i) k.profile.values[i] = std::exp(lv[i]);
  k.profile.valueAtOrigin = std::numeric_limits<double>::infinity();
  k.regimes.push_back({"near_origin", 1e-3, 1e-1, 0, 0, -(n + 2.0 * sigma)});
  k.regimes.push_back({"far_field", 5.0, 20.0, 0, 0, -(n - 1.0)});
  return k;
}

/**
 * \brief int_{d > S} g(d) P_0^sigma(d) dmu, from heat tail moments. Beyond
 * the last time node the heat mass sits near 2 rho t, where g is frozen.
 */
template <class G>
inline double p0_tail_moment(int n, double sigma, double S, G&& g, double tHigh) {
  double rho = 0.5 * (n - 1);
  // the heat mass beyond S is negligible while 2 rho t + 20 sqrt(t) < S
  double a = 2.0 * rho, sq = (-20.0 + std::sqrt(400.0 + 4.0 * a * S)) / (2.0 * a);
  double tlo = std::max(1e-12, 0.5 * sq * sq);
  double thi = std::max(tHigh, 10.0 * S / a);
  Rule q = detail::mixture_rule(tlo, thi, 0.1, 10);
  std::vector<double> part(q.x.size());
  tbb::parallel_for(std::size_t(0), q.x.size(), [&](std::size_t i) {
    double t = q.x[i];
    part[i] = q.w[i] * std::pow(t, -1.0 - sigma) *
              heat_moment_between(n, t, S, std::numeric_limits<double>::infinity(), g);
  });
  double s = 0.0;
  for (double v : part) s += v;
  return s + g(2.0 * rho * thi) * std::pow(thi, -sigma) / sigma;
}

/** \brief int_{d > S} P_0^sigma dmu. */
inline double p0_tail_mass(int n, double sigma, double S) {
  return p0_tail_moment(n, sigma, S, [](double) { return 1.0; }, 1e3);
}

/**
 * \brief Resolvent kernel k_{lambda,sigma} = int_0^inf e^{lambda^sigma t} P_t dt.
 * Times below ts go through the subordinated heat kernel; the rest of the
 * time integral is done exactly in frequency, e^{-ts mu}/mu, mu = (xi^2+rho^2)^sigma - lambda^sigma.
 */
class ResolventKernel {
 public:
  ResolventKernel(const SpectralContext& ctx, double lambda, double sigma) : ctx_(&ctx), lambda_(lambda), sigma_(sigma) {
    const int n = ctx.n();
    const double rho = 0.5 * (n - 1), lam0 = rho * rho;
    if (!(lambda >= 0.0 && lambda <= lam0 * (1.0 + 1e-15))) throw DomainError("resolvent: lambda must lie in [0, lambda0]");
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("resolvent: sigma must lie in (0,1)");
    lamS_ = std::pow(lambda, sigma);
    ts_ = 36.0 / std::pow(ctx.spectral()->xiMax, 2.0 * sigma);
    Subordinator S(sigma);
    double rMin = ctx.radial()->nodes.front();
    double lo = std::min(1e-6, rMin * rMin / 3000.0);
    q_ = detail::mixture_rule(lo, detail::mixture_s_high(n, ctx.radial()->rMax + 20.0));
    logm_.resize(q_.x.size());
    const Rule& g = gauss_legendre(8);
    tbb::parallel_for(std::size_t(0), q_.x.size(), [&](std::size_t k) {
      double s = q_.x[k];
      double ta = 1e-4 * std::min(ts_, std::pow(s, sigma));
      // eta_t(s) is linear in t for t << s^sigma
      double acc = 0.5 * ta * std::exp(lamS_ * ta + detail::log_eta(S, ta, s));
      double la = std::log(ta), lb = std::log(ts_);
      int panels = std::max(1, static_cast<int>(std::ceil((lb - la) / 0.2)));
      for (int p = 0; p < panels; ++p) {
        double a = la + (lb - la) * p / panels, b = la + (lb - la) * (p + 1) / panels;
        double part = 0.0;
        for (int j = 0; j < 8; ++j) {
          double lt = 0.5 * (a + b) + 0.5 * (b - a) * g.x[j];
          double t = std::exp(lt);
          part += 0.5 * (b - a) * g.w[j] * t * std::exp(lamS_ * t + detail::log_eta(S, t, s));
        }
        acc += part;
        if (part == 0.0 && std::exp(a) > std::pow(s, sigma)) break;
      }
      logm_[k] = acc > 0.0 ? std::log(acc) : -std::numeric_limits<double>::infinity();
    });
  }

  double cutoff_time() const { return ts_; }

  std::vector<double> short_part(const std::vector<double>& radii) const {
    auto lv = detail::heat_mixture_log(ctx_->n(), radii, q_, logm_);
    for (double& v : lv) v = std::exp(v);
    return lv;
  }

  /** \brief e^{-ts mu}/mu on the frequency grid. */
  SpectralFn long_part_spectrum() const {
    const double rho = 0.5 * (ctx_->n() - 1);
    SpectralFn F(ctx_->spectral());
    for (std::size_t j = 0; j < F.size(); ++j) {
      double x = ctx_->spectral()->nodes[j];
      double mu = std::pow(x * x + rho * rho, sigma_) - lamS_;
      F.values[j] = std::exp(-ts_ * mu) / mu;
    }
    return F;
  }

  /** \brief Kernel on the context grid. */
  RadialFn profile() const {
    RadialFn k = ctx_->inverse(long_part_spectrum());
    auto sp = short_part(ctx_->radial()->nodes);
    for (std::size_t i = 0; i < k.size(); ++i) k.values[i] += sp[i];
    k.valueAtOrigin = std::numeric_limits<double>::infinity();
    return k;
  }

 private:
  const SpectralContext* ctx_;
  double lambda_, sigma_, lamS_, ts_;
  Rule q_;
  std::vector<double> logm_;
};

inline KernelProfile resolvent_kernel(const SpectralContext& ctx, double lambda, double sigma) {
  ResolventKernel R(ctx, lambda, sigma);
  KernelProfile k;
  k.kind = KernelKind::Resolvent;
  k.route = Route::Subordination;
  k.sigma = sigma;
  k.lambda = lambda;
  k.profile = R.profile();
  const int n = ctx.n();
  k.regimes.push_back({"near_origin", 1e-3, 1e-2, 0, 0, -(n - 2.0 * sigma)});
  k.regimes.push_back({"far_field", 5.0, 25.0, 0, 0, -0.5 * (n - 1.0)});
  return k;
}

/**
 * \brief Independent value of k_{lambda,sigma}(r) on H^3 from the Mellin
 * representation k = int h_s(r) m(s) ds, where m inverts 1/(u^sigma - lambda^sigma):
 * a pole term e^{lambda s} lambda^{1-sigma}/sigma plus the branch-cut integral.
 */
inline double resolvent_mellin_h3(double lambda, double sigma, double r) {
  const double ls = std::pow(lambda, sigma), spi = std::sin(M_PI * sigma), cpi = std::cos(M_PI * sigma);
  auto cut = [&](double s) {
    if (lambda == 0.0) return std::exp((sigma - 1.0) * std::log(s) - std::lgamma(sigma));
    // (1/pi) int e^{-sv} v^sigma sin(pi sigma) / (v^{2sigma} - 2 lambda^sigma v^sigma cos(pi sigma) + lambda^{2sigma}) dv
    Rule q = log_rule(1e-12 / s, 60.0 / s, 120, 10);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      double v = q.x[i], vs = std::pow(v, sigma);
      acc += q.w[i] * std::exp(-s * v) * vs * spi / (vs * vs - 2.0 * ls * vs * cpi + ls * ls);
    }
    return acc / M_PI;
  };
  const double lpole = lambda == 0.0 ? 0.0 : std::log(std::pow(lambda, 1.0 - sigma) / sigma);
  double X = 1e6;
  Rule q = detail::mixture_rule(std::max(1e-14, r * r / 3000.0), X, 0.1, 10);
  double acc = 0.0;
  for (std::size_t k = 0; k < q.x.size(); ++k) {
    double s = q.x[k];
    double lh = log_heat_exact(3, s, r);
    double pole = lambda == 0.0 ? 0.0 : std::exp(lh + lambda * s + lpole);
    acc += q.w[k] * (pole + std::exp(lh) * cut(s));
  }
  // beyond X: h_s(r) e^{s} -> (4 pi s)^{-3/2} r/sinh r for the pole term when lambda = 1
  if (lambda > 0.0) {
    double c = std::pow(4.0 * M_PI, -1.5) * std::exp(detail::log_r_over_sinh(r));
    acc += std::pow(lambda, 1.0 - sigma) / sigma * c * std::exp((lambda - 1.0) * X) * 2.0 / std::sqrt(X);
  }
  return acc;
}

}  // namespace hyplab

#endif  // HYPLAB_KERNELS_HPP
