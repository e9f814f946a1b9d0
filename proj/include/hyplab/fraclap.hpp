#ifndef HYPLAB_FRACLAP_HPP
#define HYPLAB_FRACLAP_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include <tbb/parallel_for.h>

#include "kernels.hpp"
#include "params.hpp"
#include "quadrature.hpp"
#include "spectral_core.hpp"

namespace hyplab {

/** \brief (xi^2 + rho^2)^sigma - lambda^sigma without cancellation near xi = 0, lambda = lambda0. */
inline double shifted_multiplier(int n, double xi, double lambda, double sigma) {
  const double rho = 0.5 * (n - 1), lam0 = rho * rho;
  double a = std::pow(lam0, sigma);
  return a * (std::expm1(sigma * std::log1p(xi * xi / lam0)) + (1.0 - std::pow(lambda / lam0, sigma)));
}

/** \brief Geodesic distance for polar data (r1, o, r2) with angle theta at o. */
inline double pair_distance(double r1, double r2, double theta) {
  // cosh d = cosh(r1 - r2) + sinh r1 sinh r2 (1 - cos theta)
  double h = std::sinh(0.5 * (r1 - r2));
  double q = h * h + std::sinh(r1) * std::sinh(r2) * std::sin(0.5 * theta) * std::sin(0.5 * theta);
  return 2.0 * std::asinh(std::sqrt(q));
}

/**
 * \brief Angular rules for spherical means around a point at radius r1.
 *
 * The sphere of radius s about that point meets distances R in
 * [|r1 - s|, r1 + s] from the origin. The measure sin^{n-2} theta d theta
 * becomes [(cosh R - cosh Rm)(cosh RM - cosh R)]^{(n-3)/2} sinh R dR, and
 * R = Rm + L sin^2(phi/2) removes the endpoint behaviour. Rules are built
 * on demand; weights are normalized to one.
 */
class PairDistanceTable {
 public:
  struct Entry {
    std::vector<double> d;
    std::vector<double> w;
  };

  explicit PairDistanceTable(int n, double panelWidth = 0.5, int nodes = 10) : n_(n), width_(panelWidth), m_(nodes) {}

  int dimension() const { return n_; }

  Entry rule(double r1, double s) const {
    Entry e;
    rule_into(r1, s, e);
    return e;
  }

  void rule_into(double r1, double s, Entry& e) const {
    e.d.clear();
    e.w.clear();
    if (r1 == 0.0 || s == 0.0) {
      e.d.push_back(r1 + s);
      e.w.push_back(1.0);
      return;
    }
    const Rule& g = gauss_legendre(m_);
    double Rm = std::abs(r1 - s), L = 2.0 * std::min(r1, s), RM = Rm + L;
    int P = std::max(1, static_cast<int>(std::ceil(L / width_)));
    std::vector<double> lw;
    lw.reserve(P * m_);
    e.d.reserve(P * m_);
    double pa = 0.0;
    for (int p = 1; p <= P; ++p) {
      double pb = 2.0 * std::asin(std::sqrt(std::min(1.0, static_cast<double>(p) / P)));
      double c = 0.5 * (pa + pb), h = 0.5 * (pb - pa);
      for (int j = 0; j < m_; ++j) {
        double phi = c + h * g.x[j];
        double sh = std::sin(0.5 * phi), ch = std::cos(0.5 * phi);
        double lo = L * sh * sh, hi = L * ch * ch;
        double R = Rm + lo;
        double l = log_sinh(R) + std::log(std::sin(phi)) + std::log(h * g.w[j]);
        if (n_ != 3)
          l += 0.5 * (n_ - 3) *
               (2.0 * M_LN2 + log_sinh(0.5 * (R + Rm)) + log_sinh(0.5 * lo) + log_sinh(0.5 * (RM + R)) +
                log_sinh(0.5 * hi));
        e.d.push_back(R);
        lw.push_back(l);
      }
      pa = pb;
    }
    double mx = *std::max_element(lw.begin(), lw.end());
    double tot = 0.0;
    e.w.resize(lw.size());
    for (std::size_t k = 0; k < lw.size(); ++k) tot += (e.w[k] = std::exp(lw[k] - mx));
    for (double& w : e.w) w /= tot;
  }

  /** \brief Spherical mean of f over the sphere of radius s about a point at radius r1. */
  template <class F>
  double mean(F&& f, double r1, double s) const {
    Entry e;
    rule_into(r1, s, e);
    double acc = 0.0;
    for (std::size_t k = 0; k < e.d.size(); ++k) acc += e.w[k] * f(e.d[k]);
    return acc;
  }

  /** \brief Largest violation of d(r,r,0) = 0, symmetry and the triangle inequality at the rule nodes. */
  double invariant_defect(double r1, double r2) const {
    double bad = std::abs(pair_distance(r1, r1, 0.0));
    bad = std::max(bad, std::abs(pair_distance(r1, r2, 1.0) - pair_distance(r2, r1, 1.0)));
    Entry e = rule(r1, r2);
    double lo = std::abs(r1 - r2), hi = r1 + r2;
    for (double d : e.d) bad = std::max({bad, lo - d, d - hi});
    return bad;
  }

 private:
  int n_;
  double width_;
  int m_;
};

namespace detail {

/** \brief int_a^b f(R) sinh R dR for the panel interpolant of f. */
inline double sinh_moment(const RadialFn& f, double a, double b, int m = 12) {
  const Rule& g = gauss_legendre(m);
  double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
  for (int j = 0; j < m; ++j) {
    double R = c + h * g.x[j];
    s += g.w[j] * f(R) * std::sinh(R);
  }
  return h * s;
}

inline void check_same_grid(const RadialFn& a, const RadialFn& b) {
  if (!a.grid || !b.grid) throw StructuralError("radial function without grid");
  if (a.grid != b.grid && a.grid->hash() != b.grid->hash()) throw StructuralError("incompatible radial grids");
}

}  // namespace detail

/**
 * \brief (f * k)(r1) = int k(s) M_s f(r1) dmu(s) over the grid nodes s.
 * On H^3 the spherical mean is (G(r1+s) - G(|r1-s|)) / (2 sinh r1 sinh s)
 * with G the running integral of f(R) sinh R; other dimensions use the
 * angular rules of PairDistanceTable.
 */
inline RadialFn radial_convolve(const RadialFn& f, const RadialFn& k) {
  detail::check_same_grid(f, k);
  const RadialGrid& g = *f.grid;
  const std::size_t N = g.size();
  RadialFn out(f.grid);
  {
    double s0 = 0.0;
    for (std::size_t j = 0; j < N; ++j) s0 += g.weights[j] * k.values[j] * f.values[j];
    out.valueAtOrigin = s0;
  }
  if (g.n == 3) {
    // running integral G at the nodes, then interpolate G itself
    std::vector<double> G(N);
    const auto& br = g.interp.breaks();
    const int m = g.interp.order();
    double base = 0.0;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
      for (int j = 0; j < m; ++j) {
        std::size_t i = p * m + j;
        G[i] = base + detail::sinh_moment(f, br[p], g.nodes[i], 16);
      }
      base += detail::sinh_moment(f, br[p], br[p + 1], 24);
    }
    const double Gtot = base;
    auto Gat = [&](double R) {
      if (R >= g.rMax) return Gtot;
      double v;
      g.interp.eval(G.data(), R, v);
      return v;
    };
    tbb::parallel_for(std::size_t(0), N, [&](std::size_t i) {
      double r1 = g.nodes[i], acc = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        double s = g.nodes[j];
        double Rm = std::abs(r1 - s), RM = r1 + s;
        double diff = (RM - Rm < 1.0) ? detail::sinh_moment(f, Rm, std::min(RM, g.rMax)) * (Rm < g.rMax)
                                      : Gat(RM) - Gat(Rm);
        double M = diff / (2.0 * std::sinh(r1) * std::sinh(s));
        acc += g.weights[j] * k.values[j] * M;
      }
      out.values[i] = acc;
    });
    return out;
  }
  PairDistanceTable table(g.n);
  tbb::parallel_for(std::size_t(0), N, [&](std::size_t i) {
    double r1 = g.nodes[i], acc = 0.0;
    PairDistanceTable::Entry e;
    for (std::size_t j = 0; j < N; ++j) {
      table.rule_into(r1, g.nodes[j], e);
      double M = 0.0;
      for (std::size_t q = 0; q < e.d.size(); ++q) M += e.w[q] * f(e.d[q]);
      acc += g.weights[j] * k.values[j] * M;
    }
    out.values[i] = acc;
  });
  return out;
}

/** \brief inverse transform of (xi^2+rho^2)^sigma Hf. */
inline RadialFn frac_laplacian_spectral(const SpectralContext& ctx, const RadialFn& f, double sigma) {
  const double rho = 0.5 * (ctx.n() - 1);
  return ctx.apply_multiplier(f, [&](double x) { return std::pow(x * x + rho * rho, sigma); });
}

/** \brief A radial function with derivatives; identically zero beyond `support`. */
struct RadialSource {
  std::function<double(double)> value;
  std::function<void(double, double&, double&, double&)> derivs;
  double support = std::numeric_limits<double>::infinity();

  static RadialSource of(const RadialFn& f) {
    auto p = std::make_shared<RadialFn>(f);
    RadialSource s;
    s.value = [p](double r) { return (*p)(r); };
    s.derivs = [p](double r, double& v, double& d1, double& d2) { p->derivatives(r, v, d1, d2); };
    double tiny = 1e-17 * f.sup();
    std::size_t last = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (std::abs(f.values[i]) > tiny) last = i;
    s.support = f.size() ? std::min(f.grid->rMax, f.grid->nodes[std::min(last + 1, f.size() - 1)]) : 0.0;
    return s;
  }
};

/** \brief 1/|Gamma(-sigma)| = sigma / Gamma(1 - sigma). */
inline double singular_integral_constant(double sigma) { return sigma / std::tgamma(1.0 - sigma); }

/**
 * \brief Delta^sigma f(r0) = c_sigma int (f(r0) - M_s f(r0)) P_0^sigma(s) dmu(s).
 * On [0, eps] the mean-value term (Delta f / 2n) s^2 is subtracted and
 * integrated against P_0 separately. Beyond the support the integrand is
 * f(r0) P_0; for non-compact sources M_s f(r0) is replaced by f(s) past sMax.
 */
class FracLaplacianIntegral {
 public:
  FracLaplacianIntegral(int n, double sigma, double sMax = 100.0, double eps = 0.1)
      : n_(n), sigma_(sigma), eps_(eps), sMax_(sMax), table_(n) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("frac_laplacian_integral: sigma must lie in (0,1)");
    if (!has_exact_heat(n)) throw DomainError("frac_laplacian_integral needs n = 2 or 3");
    c_ = singular_integral_constant(sigma);
    const Rule& g8 = gauss_legendre(8);
    const Rule& g10 = gauss_legendre(10);
    // near field: geometric panels toward 0
    for (int k = 0; k < 8; ++k) add_panel(near_, eps * std::ldexp(1.0, -k - 1), eps * std::ldexp(1.0, -k), g8);
    // s^2 P_0 dmu on [0, eps]
    for (int k = 0; k < 40; ++k) add_panel(moment_, eps * std::ldexp(1.0, -k - 1), eps * std::ldexp(1.0, -k), g8);
    // far field: 0.25-panels to 20, then log panels
    double a = eps;
    double top = std::min(20.0, sMax);
    int pu = static_cast<int>(std::ceil((top - eps) / 0.25));
    for (int p = 0; p < pu; ++p) {
      double b = eps + (top - eps) * (p + 1) / pu;
      add_panel(far_, a, b, g10);
      farEnds_.push_back(b);
      a = b;
    }
    if (sMax > top) {
      int pl = static_cast<int>(std::ceil(std::log(sMax / top) / 0.05));
      for (int p = 0; p < pl; ++p) {
        double b = top * std::exp(std::log(sMax / top) * (p + 1) / pl);
        add_panel(far_, a, b, g10);
        farEnds_.push_back(b);
        a = b;
      }
    }
    nearP_ = log_p0_dmu(near_.x);
    farP_ = log_p0_dmu(far_.x);
    auto mp = log_p0_dmu(moment_.x);
    double acc = 0.0;
    for (std::size_t i = 0; i < moment_.x.size(); ++i)
      acc += moment_.w[i] * moment_.x[i] * moment_.x[i] * std::exp(mp[i]);
    // below the last panel the integrand is ~ C s^{1-2 sigma}
    std::size_t last = moment_.x.size() - 1;
    double s0 = moment_.x[last];
    double C = s0 * s0 * std::exp(mp[last]) / std::pow(s0, 1.0 - 2.0 * sigma);
    double lo = eps * std::ldexp(1.0, -40);
    acc += C * std::pow(lo, 2.0 - 2.0 * sigma) / (2.0 - 2.0 * sigma);
    momentEps_ = acc;
  }

  double sigma() const { return sigma_; }
  int dimension() const { return n_; }
  const PairDistanceTable& table() const { return table_; }

  /** \brief int_{d > S} P_0 dmu, cached per S. */
  double tail_mass(double S) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = tails_.find(S);
    if (it != tails_.end()) return it->second;
    double v = p0_tail_mass(n_, sigma_, S);
    tails_[S] = v;
    return v;
  }

  double operator()(const RadialSource& f, double r0) const {
    double f0, d1, d2;
    f.derivs(r0, f0, d1, d2);
    double lap = (r0 > 0.0) ? -d2 - (n_ - 1) * d1 / std::tanh(r0) : -n_ * d2;
    double a = lap / (2.0 * n_);
    PairDistanceTable::Entry e;
    auto mean = [&](double s) {
      table_.rule_into(r0, s, e);
      double m = 0.0;
      for (std::size_t k = 0; k < e.d.size(); ++k) m += e.w[k] * f.value(e.d[k]);
      return m;
    };
    double acc = a * momentEps_;
    for (std::size_t i = 0; i < near_.x.size(); ++i) {
      double s = near_.x[i];
      acc += near_.w[i] * (f0 - mean(s) - a * s * s) * std::exp(nearP_[i]);
    }
    const bool compact = std::isfinite(f.support);
    double target = compact ? std::min(sMax_, r0 + f.support + 0.5) : sMax_;
    double S = eps_;
    std::size_t k = 0;
    const std::size_t per = far_.x.size() / farEnds_.size();
    for (std::size_t p = 0; p < farEnds_.size() && S < target; ++p) {
      for (std::size_t j = 0; j < per; ++j, ++k) {
        double s = far_.x[k];
        acc += far_.w[k] * (f0 - mean(s)) * std::exp(farP_[k]);
      }
      S = farEnds_[p];
    }
    acc += f0 * tail_mass(S);
    if (!compact) acc -= p0_tail_moment(n_, sigma_, S, f.value, 1e12);
    return c_ * acc;
  }

 private:
  static void add_panel(Rule& q, double a, double b, const Rule& g) {
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      q.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.x[j]);
      q.w.push_back(0.5 * (b - a) * g.w[j]);
    }
  }
  std::vector<double> log_p0_dmu(const std::vector<double>& s) const {
    auto l = p0_log_values(n_, sigma_, s);
    double lc = std::log(sphere_area(n_));
    for (std::size_t i = 0; i < s.size(); ++i) l[i] += lc + (n_ - 1) * log_sinh(s[i]);
    return l;
  }

  int n_;
  double sigma_, eps_, sMax_, c_ = 0.0, momentEps_ = 0.0;
  PairDistanceTable table_;
  Rule near_, moment_, far_;
  std::vector<double> farEnds_;
  std::vector<double> nearP_, farP_;
  mutable std::mutex mu_;
  mutable std::map<double, double> tails_;
};

struct LsigmaReport {
  double integralValue = 0.0;
  double tailEstimate = 0.0;
  bool converged = false;
  bool divergent = false;
};

namespace detail {

/** \brief log of (1+r)^{-1-sigma} e^{-(n-1)r} c_n sinh^{n-1} r. */
inline double log_lsigma_weight(int n, double sigma, double r) {
  return -(1.0 + sigma) * std::log1p(r) + std::log(sphere_area(n)) +
         (n - 1) * (log_sinh(r) - r);
}

/** \brief Power-law extrapolation of the integrand tail from two radii. */
inline double extrapolated_tail(double r1, double g1, double r2, double g2, bool& divergent) {
  divergent = false;
  if (g2 <= 0.0) return 0.0;
  if (g1 <= 0.0) return 0.0;
  double p = -(std::log(g2) - std::log(g1)) / (std::log(r2) - std::log(r1));
  if (!(p > 1.0)) {
    divergent = true;
    return std::numeric_limits<double>::infinity();
  }
  return g2 * r2 / (p - 1.0);
}

}  // namespace detail

/** \brief int |f| (1+r)^{-1-sigma} e^{-(n-1)r} dmu on the grid with an extrapolated tail. */
inline LsigmaReport lsigma_membership(const RadialFn& f, double sigma) {
  const RadialGrid& g = *f.grid;
  LsigmaReport rep;
  auto integrand = [&](std::size_t i) {
    return std::abs(f.values[i]) * std::exp(detail::log_lsigma_weight(g.n, sigma, g.nodes[i]));
  };
  double I = 0.0, Ip = 0.0;
  const int m = g.interp.order();
  std::size_t N = g.size(), cut = N > static_cast<std::size_t>(m) * 8 ? N / 10 : N;
  double rcut = g.nodes[cut - 1];
  for (std::size_t i = 0; i < N; ++i) {
    double v = g.weights[i] * std::abs(f.values[i]) * std::exp(-(1.0 + sigma) * std::log1p(g.nodes[i]) - (g.n - 1) * g.nodes[i]);
    I += v;
    if (g.nodes[i] <= rcut) Ip += v;
  }
  bool div1, div2;
  double t1 = detail::extrapolated_tail(g.nodes[N - 1 - m], integrand(N - 1 - m), g.nodes[N - 1], integrand(N - 1), div1);
  double t2 = detail::extrapolated_tail(g.nodes[cut - 1 - m], integrand(cut - 1 - m), g.nodes[cut - 1], integrand(cut - 1), div2);
  rep.divergent = div1;
  rep.integralValue = I + t1;
  rep.tailEstimate = div1 ? std::numeric_limits<double>::infinity() : std::abs((I + t1) - (Ip + (div2 ? 0.0 : t2)));
  rep.converged = !rep.divergent && rep.tailEstimate < 1e-8 * rep.integralValue;
  if (rep.integralValue == 0.0) rep.converged = true;
  return rep;
}

/** \brief Same for an analytic source, integrated in log r up to 1e12. */
inline LsigmaReport lsigma_membership(int n, const RadialSource& f, double sigma) {
  LsigmaReport rep;
  auto gfun = [&](double r) {
    double lw = detail::log_lsigma_weight(n, sigma, r);
    double v = std::abs(f.value(r));
    if (v == 0.0) return 0.0;
    double l = std::log(v) + lw;
    return l > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(l);
  };
  Rule head = composite_rule(graded_breaks(1.0, 0.25, 30), 10);
  double I = 0.0;
  for (std::size_t i = 0; i < head.x.size(); ++i) I += head.w[i] * gfun(head.x[i]);
  double R = std::isfinite(f.support) ? std::min(1e12, std::max(1.0, f.support)) : 1e12;
  double Rp = R > 10.0 ? R / 10.0 : R;
  double Ip = I;
  if (R > 1.0) {
    int panels = static_cast<int>(std::ceil(std::log(R) / 0.05));
    Rule tail = log_rule(1.0, R, panels, 10);
    for (std::size_t i = 0; i < tail.x.size(); ++i) {
      double v = tail.w[i] * gfun(tail.x[i]);
      I += v;
      if (tail.x[i] <= Rp) Ip += v;
    }
  }
  if (!std::isfinite(I)) {
    rep.divergent = true;
    rep.integralValue = std::numeric_limits<double>::infinity();
    rep.tailEstimate = rep.integralValue;
    return rep;
  }
  bool d1 = false, d2 = false;
  double t1 = 0.0, t2 = 0.0;
  if (!std::isfinite(f.support)) {
    t1 = detail::extrapolated_tail(R / 1.1, gfun(R / 1.1), R, gfun(R), d1);
    t2 = detail::extrapolated_tail(Rp / 1.1, gfun(Rp / 1.1), Rp, gfun(Rp), d2);
  }
  rep.divergent = d1;
  rep.integralValue = d1 ? std::numeric_limits<double>::infinity() : I + t1;
  rep.tailEstimate = d1 ? rep.integralValue : std::abs((I + t1) - (Ip + t2));
  rep.converged = !rep.divergent && rep.tailEstimate < 1e-8 * rep.integralValue;
  if (rep.integralValue == 0.0) rep.converged = true;
  return rep;
}

/** \brief Delta^sigma f(r0) by the singular integral; refuses f outside L_sigma. */
inline double frac_laplacian_integral(const FracLaplacianIntegral& op, const RadialSource& f, double r0) {
  if (!std::isfinite(f.support) && lsigma_membership(op.dimension(), f, op.sigma()).divergent)
    throw DomainError("frac_laplacian_integral: f is not in L_sigma");
  return op(f, r0);
}

inline double frac_laplacian_integral(int n, const RadialFn& f, double sigma, double r0) {
  if (lsigma_membership(f, sigma).divergent) throw DomainError("frac_laplacian_integral: f is not in L_sigma");
  FracLaplacianIntegral op(n, sigma);
  return op(RadialSource::of(f), r0);
}

struct LaplacianCrossReport {
  std::vector<double> radii, spectral, integral;
  double maxRelDev = 0.0;
};

/** \brief Spectral vs singular-integral Delta^sigma at sample radii, relative to the largest spectral value. */
inline LaplacianCrossReport cross_validate_laplacian(const SpectralContext& ctx, const RadialFn& f, double sigma,
                                                     const std::vector<double>& radii, double tol = 1e-3,
                                                     bool raise = true) {
  LaplacianCrossReport rep;
  rep.radii = radii;
  RadialFn sp = frac_laplacian_spectral(ctx, f, sigma);
  FracLaplacianIntegral op(ctx.n(), sigma);
  RadialSource src = RadialSource::of(f);
  rep.spectral.resize(radii.size());
  rep.integral.resize(radii.size());
  tbb::parallel_for(std::size_t(0), radii.size(), [&](std::size_t i) {
    double r = radii[i];
    rep.spectral[i] = (r == 0.0) ? sp.valueAtOrigin : sp(r);
    rep.integral[i] = op(src, r);
  });
  double scale = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    scale = std::max(scale, std::abs(rep.spectral[i]));
    dev = std::max(dev, std::abs(rep.spectral[i] - rep.integral[i]));
  }
  rep.maxRelDev = scale > 0.0 ? dev / scale : dev;
  if (raise && rep.maxRelDev > tol)
    throw ConsistencyError("cross_validate_laplacian: routes differ by " + std::to_string(rep.maxRelDev));
  return rep;
}

/** \brief ||f||^2_{lambda,sigma} = int ((xi^2+lambda0)^sigma - lambda^sigma) |Hf|^2 d(Plancherel). */
inline double shifted_norm_sq(const SpectralContext& ctx, const SpectralFn& F, double lambda, double sigma) {
  const double rho = 0.5 * (ctx.n() - 1);
  if (lambda > rho * rho * (1.0 + 1e-15) || lambda < 0.0) throw DomainError("shifted_norm: lambda must lie in [0, lambda0]");
  return ctx.spectral_inner(F, F, [&](double x) { return shifted_multiplier(ctx.n(), x, lambda, sigma); });
}

inline double shifted_norm_sq(const SpectralContext& ctx, const RadialFn& f, double lambda, double sigma) {
  return shifted_norm_sq(ctx, ctx.forward(f), lambda, sigma);
}

inline double shifted_norm(const SpectralContext& ctx, const RadialFn& f, double lambda, double sigma) {
  return std::sqrt(std::max(0.0, shifted_norm_sq(ctx, f, lambda, sigma)));
}

/** \brief int_0^inf t^{-1-sigma}(e^{-t lambda} - 1) dt by log-t quadrature. */
inline double lambda_time_integral(double lambda, double sigma) {
  if (lambda == 0.0) return 0.0;
  double a = 1e-12 / lambda, b = 1e4 / lambda;
  Rule q = detail::mixture_rule(a, b, 0.1, 10);
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * std::pow(q.x[i], -1.0 - sigma) * std::expm1(-lambda * q.x[i]);
  s += -lambda * std::pow(a, 1.0 - sigma) / (1.0 - sigma);
  s += -std::pow(b, -sigma) / sigma;
  return s;
}

/**
 * \brief The double-integral form of ||f||^2_{lambda,sigma}. The t-integral
 * of h_t t^{-1-sigma} is taken inside P_0; the lambda term uses the unit
 * heat mass. Splitting the pair integral at d = delta keeps all x within
 * the support of f.
 */
inline double double_integral_norm(const RadialFn& f, double lambda, double sigma, double budget = 5e8,
                                   double delta = 0.1) {
  const RadialGrid& g = *f.grid;
  const int n = g.n;
  RadialSource src = RadialSource::of(f);
  const double supp = src.support;
  PairDistanceTable table(n);
  const Rule& g8 = gauss_legendre(8);
  const Rule& g10 = gauss_legendre(10);
  Rule nearq, farq;
  auto add = [](Rule& q, double a, double b, const Rule& gg) {
    for (std::size_t j = 0; j < gg.x.size(); ++j) {
      q.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * gg.x[j]);
      q.w.push_back(0.5 * (b - a) * gg.w[j]);
    }
  };
  for (int k = 0; k < 40; ++k) add(nearq, delta * std::ldexp(1.0, -k - 1), delta * std::ldexp(1.0, -k), g8);
  double top = 2.0 * supp + 1.0;
  int pf = static_cast<int>(std::ceil((top - delta) / 0.25));
  for (int p = 0; p < pf; ++p) add(farq, delta + (top - delta) * p / pf, delta + (top - delta) * (p + 1) / pf, g10);

  std::vector<std::size_t> xs;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nodes[i] <= supp + delta) xs.push_back(i);
  double est = static_cast<double>(xs.size()) * (nearq.x.size() + farq.x.size()) * 10.0 * std::max(1.0, 2.0 * supp / 0.5);
  if (est > budget) throw ResolutionError("double_integral_norm: evaluation budget exceeded");

  auto lp = [&](const std::vector<double>& s) {
    auto l = p0_log_values(n, sigma, s);
    double lc = std::log(sphere_area(n));
    for (std::size_t i = 0; i < s.size(); ++i) l[i] += lc + (n - 1) * log_sinh(s[i]);
    return l;
  };
  auto nearP = lp(nearq.x), farP = lp(farq.x);
  std::vector<double> part(xs.size());
  tbb::parallel_for(std::size_t(0), xs.size(), [&](std::size_t ii) {
    std::size_t i = xs[ii];
    double r = g.nodes[i], fx = f.values[i];
    PairDistanceTable::Entry e;
    double nearv = 0.0, first = 0.0, firstS = 0.0;
    for (std::size_t k = 0; k < nearq.x.size(); ++k) {
      table.rule_into(r, nearq.x[k], e);
      double m = 0.0;
      for (std::size_t q = 0; q < e.d.size(); ++q) {
        double d = fx - src.value(e.d[q]);
        m += e.w[q] * d * d;
      }
      double v = m * std::exp(nearP[k]);
      nearv += nearq.w[k] * v;
      first = v;
      firstS = nearq.x[k];
    }
    // integrand ~ C s^{1 - 2 sigma} below the last panel
    double lo = delta * std::ldexp(1.0, -40);
    if (firstS > 0.0) nearv += first / std::pow(firstS, 1.0 - 2.0 * sigma) * std::pow(lo, 2.0 - 2.0 * sigma) / (2.0 - 2.0 * sigma);
    double farv = 0.0;
    if (fx != 0.0) {
      for (std::size_t k = 0; k < farq.x.size(); ++k) {
        double s = farq.x[k];
        if (s > r + supp + 0.25) break;
        table.rule_into(r, s, e);
        double m = 0.0;
        for (std::size_t q = 0; q < e.d.size(); ++q) m += e.w[q] * src.value(e.d[q]);
        farv += farq.w[k] * m * std::exp(farP[k]);
      }
    }
    part[ii] = g.weights[i] * (nearv - 2.0 * fx * farv);
  });
  double E = 0.0;
  for (double v : part) E += v;
  double f2 = f.lp_norm_pow(2.0);
  E += 2.0 * f2 * p0_tail_mass(n, sigma, delta);
  double c = singular_integral_constant(sigma);
  return 0.5 * c * E + c * f2 * lambda_time_integral(lambda, sigma);
}

struct ContractivityReport {
  double norm = 0.0;
  double normAbs = 0.0;
  double normNeg = 0.0;
  double normRadialized = 0.0;
  bool absContracts = false;
  bool strict = false;
};

/**
 * \brief ||  |f|  || <= ||f|| in the shifted norm, and f, -f agree. For radial
 * data the angular average of a separable surrogate f(r)Y is f(r) times the
 * mean of Y, so radialization reduces to that scaling.
 */
inline ContractivityReport abs_and_radialization_contractivity(const SpectralContext& ctx, const RadialFn& f,
                                                               double lambda, double sigma, double angularMean = 1.0) {
  ContractivityReport rep;
  RadialFn a = f, m = f;
  for (double& v : a.values) v = std::abs(v);
  a.valueAtOrigin = std::abs(a.valueAtOrigin);
  m *= -1.0;
  RadialFn rad = f;
  rad *= angularMean;
  rep.norm = shifted_norm(ctx, f, lambda, sigma);
  rep.normAbs = shifted_norm(ctx, a, lambda, sigma);
  rep.normNeg = shifted_norm(ctx, m, lambda, sigma);
  rep.normRadialized = shifted_norm(ctx, rad, lambda, sigma);
  rep.absContracts = rep.normAbs <= rep.norm * (1.0 + 1e-12);
  rep.strict = rep.normAbs < rep.norm * (1.0 - 1e-6);
  return rep;
}

}  // namespace hyplab

#endif  // HYPLAB_FRACLAP_HPP
