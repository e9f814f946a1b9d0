#ifndef HYPLAB_SUBORDINATOR_HPP
#define HYPLAB_SUBORDINATOR_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "params.hpp"
#include "quadrature.hpp"

namespace hyplab {

/**
 * \brief One-sided stable density eta_t^sigma(s), inverse Laplace transform
 * of e^{-t u^sigma}.
 *
 * The Bromwich line is deformed onto the steepest-descent path, which turns
 * the integral into a positive integrand on theta in (0, pi):
 *   g(x) = sigma/((1-sigma) pi) x^{-1/(1-sigma)} int A(theta) exp(-x^{-sigma/(1-sigma)} A(theta)) dtheta,
 *   A(theta) = (sin(sigma theta)/sin theta)^{1/(1-sigma)} sin((1-sigma) theta)/sin(sigma theta),
 * with eta_t(s) = t^{-1/sigma} g(s t^{-1/sigma}).  The node budget is fixed.
 */
class Subordinator {
 public:
  explicit Subordinator(double sigma, int depth = 60, int m = 8) : sigma_(sigma) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("subordinator: sigma must lie in (0,1)");
    const Rule& g = gauss_legendre(m);
    // graded toward theta = 0 and theta = pi
    auto add_panel = [&](double a, double b, bool fromPi) {
      for (int j = 0; j < m; ++j) {
        double d = 0.5 * (a + b) + 0.5 * (b - a) * g.x[j];
        double w = 0.5 * (b - a) * g.w[j];
        double th = fromPi ? M_PI - d : d;
        double A = fromPi ? kanter_from_pi(d) : kanter(th);
        if (std::isfinite(A) && A > 0.0) {
          logA_.push_back(std::log(A));
          A_.push_back(A);
          w_.push_back(w);
        }
      }
    };
    double half = 0.5 * M_PI;
    add_panel(0.0, half * std::ldexp(1.0, -depth), false);
    for (int k = depth; k >= 1; --k) add_panel(half * std::ldexp(1.0, -k), half * std::ldexp(1.0, -k + 1), false);
    add_panel(0.0, half * std::ldexp(1.0, -depth), true);
    for (int k = depth; k >= 1; --k) add_panel(half * std::ldexp(1.0, -k), half * std::ldexp(1.0, -k + 1), true);
    A0_ = std::pow(sigma_, sigma_ / (1.0 - sigma_)) * (1.0 - sigma_);
  }

  double sigma() const { return sigma_; }

  /** \brief log g(x), the t = 1 density. */
  double log_g(double x) const {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    const double s = sigma_;
    double lc = -s / (1.0 - s) * std::log(x);
    double c = std::exp(lc);
    double acc = 0.0;
    for (std::size_t k = 0; k < A_.size(); ++k) {
      double e = -c * (A_[k] - A0_);
      if (e < -745.0) continue;
      acc += w_[k] * A_[k] * std::exp(e);
    }
    if (acc <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(s / ((1.0 - s) * M_PI)) - std::log(x) / (1.0 - s) - c * A0_ + std::log(acc);
  }
  double g(double x) const { return std::exp(log_g(x)); }

  /** \brief log eta_t(s). */
  double log_density(double t, double s) const {
    double lt = std::log(t) / sigma_;
    return -lt + log_g(s * std::exp(-lt));
  }
  double density(double t, double s) const { return std::exp(log_density(t, s)); }

  /** \brief Closed form for sigma = 1/2. */
  static double density_half(double t, double s) {
    return t / std::sqrt(4.0 * M_PI) * std::pow(s, -1.5) * std::exp(-t * t / (4.0 * s));
  }
  static double log_density_half(double t, double s) {
    return std::log(t) - 0.5 * std::log(4.0 * M_PI) - 1.5 * std::log(s) - t * t / (4.0 * s);
  }

  /** \brief Smallest x with log g(x) above -745, up to a factor. */
  double x_low() const {
    double c = 745.0 / A0_;
    return std::pow(c, -(1.0 - sigma_) / sigma_);
  }

  /** \brief int_X^inf g, from the convergent large-x series. */
  double tail(double X) const {
    double s = sigma_, acc = 0.0, lx = std::log(X);
    for (int k = 1; k < 200; ++k) {
      double term = std::exp(std::lgamma(k * s) - std::lgamma(k + 1.0) - k * s * lx) * std::sin(k * M_PI * s);
      acc += (k % 2 ? 1.0 : -1.0) * term;
      if (std::abs(term) < 1e-18 * std::abs(acc) && k > 3) break;
    }
    return acc / M_PI;
  }

 private:
  double kanter(double th) const {
    double s = sigma_;
    return std::pow(std::sin(s * th) / std::sin(th), 1.0 / (1.0 - s)) * std::sin((1.0 - s) * th) / std::sin(s * th);
  }
  /** \brief A(pi - d) without cancellation in sin(pi - d). */
  double kanter_from_pi(double d) const {
    double s = sigma_;
    double ss = std::sin(s * M_PI - s * d);
    double s1 = std::sin((1.0 - s) * M_PI - (1.0 - s) * d);
    double l = (std::log(ss) - std::log(std::sin(d))) / (1.0 - s) + std::log(s1) - std::log(ss);
    return std::exp(l);
  }

  double sigma_;
  double A0_ = 0.0;
  std::vector<double> A_, logA_, w_;
};

/** \brief eta_t^sigma(s); sigma = 1/2 takes the closed form unless forced. */
inline double subordinator_density(double sigma, double t, double s, bool allowClosedForm = true) {
  if (!(t > 0.0) || !(s > 0.0)) throw DomainError("subordinator_density: t, s must be > 0");
  if (allowClosedForm && sigma == 0.5) return Subordinator::density_half(t, s);
  return Subordinator(sigma).density(t, s);
}

struct SubordinatorMass {
  double quadrature = 0.0;
  double tail = 0.0;
  double total = 0.0;
};

/** \brief int_0^inf eta_t(s) ds: log-s quadrature of the density plus the series tail. */
inline SubordinatorMass subordinator_mass(const Subordinator& S, double t, double xHigh = 1e12) {
  double xlo = S.x_low() * 0.5;
  Rule q = log_rule(xlo, xHigh, static_cast<int>(std::ceil(4.0 * std::log(xHigh / xlo))), 10);
  SubordinatorMass m;
  double ts = std::pow(t, 1.0 / S.sigma());
  for (std::size_t i = 0; i < q.x.size(); ++i) m.quadrature += q.w[i] * ts * S.density(t, ts * q.x[i]);
  m.tail = S.tail(xHigh);
  m.total = m.quadrature + m.tail;
  return m;
}

/** \brief int_0^inf e^{-u s} eta_t(s) ds by quadrature (should equal e^{-t u^sigma}). */
inline double subordinator_laplace(const Subordinator& S, double t, double u) {
  double ts = std::pow(t, 1.0 / S.sigma());
  double xlo = S.x_low() * 0.5;
  double xhi = std::max(1e3, 60.0 / (u * ts));
  Rule q = log_rule(xlo, xhi, static_cast<int>(std::ceil(4.0 * std::log(xhi / xlo))), 10);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    double s = ts * q.x[i];
    acc += q.w[i] * ts * std::exp(S.log_density(t, s) - u * s);
  }
  return acc;
}

}  // namespace hyplab

#endif  // HYPLAB_SUBORDINATOR_HPP
