#ifndef HYPLAB_HEAT_HPP
#define HYPLAB_HEAT_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "params.hpp"
#include "quadrature.hpp"

namespace hyplab {

/** \brief Dimensions with a closed-form or one-dimensional integral heat kernel. */
inline bool has_exact_heat(int n) { return n == 2 || n == 3; }

namespace detail {

inline double log_r_over_sinh(double r) {
  if (r < 1e-4) return -r * r / 6.0;
  return std::log(r) - log_sinh(r);
}

/** \brief log sinh(x) - x without cancellation at large x. */
inline double sinh_excess(double x) {
  if (x > 1.0) return -M_LN2 + std::log1p(-std::exp(-2.0 * x));
  return log_sinh(x) - x;
}

/**
 * \brief log of e^{-t/4} int_r^inf s e^{-s^2/4t} (cosh s - cosh r)^{-1/2} ds,
 * optionally times sinh r.
 */
inline double heat2_log(double t, double r, bool withMeasure) {
  // s = r + u^2 removes the endpoint singularity
  double A = 1.0 / (4.0 * t), B = r / (2.0 * t) + 0.25;
  double v = (-B + std::sqrt(B * B + 4.0 * A * 46.0)) / (2.0 * A);
  double U = std::sqrt(v);
  const Rule& g = gauss_legendre(16);
  // geometric panels resolve the kink at u ~ sqrt(r) for small r
  std::vector<double> br{0.0};
  double a0 = std::sqrt(r);
  if (a0 > 0.0 && a0 < U / 6.0)
    for (double x = std::max(a0 / 16.0, 1e-9 * U); x < U / 6.0; x *= 2.0) br.push_back(x);
  double last = br.back();
  for (int p = 1; p <= 6; ++p) br.push_back(last + (U - last) * p / 6.0);
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> terms, wts;
  terms.reserve(16 * br.size());
  wts.reserve(16 * br.size());
  for (std::size_t p = 0; p + 1 < br.size(); ++p) {
    double a = br[p], b = br[p + 1];
    for (int j = 0; j < 16; ++j) {
      double u = 0.5 * (a + b) + 0.5 * (b - a) * g.x[j];
      double u2 = u * u;
      double s = r + u2;
      // 2u / sqrt(2 sinh(r + u^2/2) sinh(u^2/2)), in logs
      double lu = std::log(2.0 * u) - 0.5 * (M_LN2 + log_sinh(0.5 * u2));
      double e;
      if (withMeasure) {
        // sinh(r) e^{-t/4 - s^2/4t} around the drift s = t, with the O(r) parts cancelled by hand
        e = -(s - t) * (s - t) / (4.0 * t) - 0.75 * u2 + sinh_excess(r) - 0.5 * sinh_excess(r + 0.5 * u2);
      } else {
        e = -0.5 * log_sinh(r + 0.5 * u2) - s * s / (4.0 * t) - t / 4.0;
      }
      terms.push_back(std::log(s) + lu + e);
      wts.push_back(0.5 * (b - a) * g.w[j]);
      lmax = std::max(lmax, terms.back());
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) acc += wts[i] * std::exp(terms[i] - lmax);
  return lmax + std::log(acc);
}

}  // namespace detail

/** \brief log h_t(r) for n in {2,3}. */
inline double log_heat_exact(int n, double t, double r) {
  if (!(t > 0.0)) throw DomainError("heat kernel: t must be > 0");
  if (n == 3) return -1.5 * std::log(4.0 * M_PI * t) + detail::log_r_over_sinh(r) - t - r * r / (4.0 * t);
  if (n == 2) return 0.5 * M_LN2 - 1.5 * std::log(4.0 * M_PI * t) + detail::heat2_log(t, r, false);
  throw DomainError("exact heat kernel available for n = 2, 3 only");
}

inline double heat_exact(int n, double t, double r) { return std::exp(log_heat_exact(n, t, r)); }

/** \brief log of h_t(r) c_n sinh^{n-1}(r), stable for large r and t. */
inline double log_heat_density(int n, double t, double r) {
  if (r <= 0.0) return -std::numeric_limits<double>::infinity();
  if (n == 3) {
    double pre = -1.5 * std::log(4.0 * M_PI * t) + std::log(2.0 * M_PI * r);
    double a = -(r - 2.0 * t) * (r - 2.0 * t) / (4.0 * t);
    // e^a - e^b with b = a - 2r
    return pre + a + std::log(-std::expm1(-2.0 * r));
  }
  if (n == 2) {
    return 0.5 * M_LN2 - 1.5 * std::log(4.0 * M_PI * t) + std::log(2.0 * M_PI) + detail::heat2_log(t, r, true);
  }
  throw DomainError("exact heat kernel available for n = 2, 3 only");
}

/** \brief int_a^b g(r) h_t(r) dmu over radii, by Gauss-Legendre panels in the bulk of the density. */
template <class G>
inline double heat_moment_between(int n, double t, double a, double b, G&& g) {
  double rho = 0.5 * (n - 1);
  double c = 2.0 * rho * t, w = 20.0 * std::sqrt(t);
  double lo = std::max(a, c - w), hi = std::min(b, c + w);
  if (!(hi > lo)) return 0.0;
  int panels = 24;
  const Rule& q = gauss_legendre(20);
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    double pa = lo + (hi - lo) * p / panels, pb = lo + (hi - lo) * (p + 1) / panels;
    for (int j = 0; j < 20; ++j) {
      double r = 0.5 * (pa + pb) + 0.5 * (pb - pa) * q.x[j];
      s += 0.5 * (pb - pa) * q.w[j] * g(r) * std::exp(log_heat_density(n, t, r));
    }
  }
  return s;
}

inline double heat_mass_between(int n, double t, double a, double b) {
  return heat_moment_between(n, t, a, b, [](double) { return 1.0; });
}

/** \brief ||h_t||_1 from the exact kernel; the window adapts to the drift 2 rho t. */
inline double heat_mass(int n, double t) {
  return heat_mass_between(n, t, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace hyplab

#endif  // HYPLAB_HEAT_HPP
