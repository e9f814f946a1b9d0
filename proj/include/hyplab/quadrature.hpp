#ifndef HYPLAB_QUADRATURE_HPP
#define HYPLAB_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

#include "params.hpp"

namespace hyplab {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

namespace detail {

inline Rule compute_gauss_legendre(int m) {
  Rule q;
  q.x.resize(m);
  q.w.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= m; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (m == 1) p0 = 1.0;
    dp = m * (z * p1 - p0) / (z * z - 1.0);
    double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    q.x[i] = -z;
    q.x[m - 1 - i] = z;
    q.w[i] = wi;
    q.w[m - 1 - i] = wi;
  }
  if (m % 2 == 1) q.x[m / 2] = 0.0;
  return q;
}

}  // namespace detail

/** \brief Gauss-Legendre rule on [-1,1], cached per order. */
inline const Rule& gauss_legendre(int m) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, detail::compute_gauss_legendre(m)).first;
  return it->second;
}

/** \brief Barycentric weights for the Gauss-Legendre nodes of order m. */
inline const std::vector<double>& gauss_legendre_bary(int m) {
  static std::mutex mu;
  static std::map<int, std::vector<double>> cache;
  const Rule& q = gauss_legendre(m);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) {
    std::vector<double> b(m);
    for (int j = 0; j < m; ++j)
      b[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1.0 - q.x[j] * q.x[j]) * q.w[j]);
    it = cache.emplace(m, std::move(b)).first;
  }
  return it->second;
}

/** \brief Breakpoints 0, h*q^K, ..., h*q, h, 2h, ... up to L. */
inline std::vector<double> graded_breaks(double L, double h, int K, double q = 0.5) {
  std::vector<double> b{0.0};
  if (h > L) h = L;
  for (int k = K; k >= 1; --k) b.push_back(h * std::pow(q, k));
  int uniform = static_cast<int>(std::ceil(L / h - 1e-12));
  double hh = L / uniform;
  for (int k = 1; k <= uniform; ++k) b.push_back(hh * k);
  return b;
}

/** \brief Log-spaced breakpoints between a > 0 and b. */
inline std::vector<double> log_breaks(double a, double b, int panels) {
  std::vector<double> out(panels + 1);
  double la = std::log(a), lb = std::log(b);
  for (int k = 0; k <= panels; ++k) out[k] = std::exp(la + (lb - la) * k / panels);
  return out;
}

/** \brief Composite Gauss-Legendre rule on consecutive breakpoints. */
inline Rule composite_rule(const std::vector<double>& breaks, int m) {
  const Rule& g = gauss_legendre(m);
  Rule q;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    double a = breaks[p], b = breaks[p + 1];
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int j = 0; j < m; ++j) {
      q.x.push_back(c + h * g.x[j]);
      q.w.push_back(h * g.w[j]);
    }
  }
  return q;
}

/** \brief Composite rule in log variable: integral of f(t) dt with t = e^v. */
inline Rule log_rule(double a, double b, int panels, int m) {
  std::vector<double> br(panels + 1);
  double la = std::log(a), lb = std::log(b);
  for (int k = 0; k <= panels; ++k) br[k] = la + (lb - la) * k / panels;
  Rule q = composite_rule(br, m);
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    q.x[i] = std::exp(q.x[i]);
    q.w[i] *= q.x[i];
  }
  return q;
}

/**
 * \brief Panel-wise polynomial interpolation for data sampled on a
 * composite Gauss-Legendre grid.
 */
class PanelInterpolant {
 public:
  PanelInterpolant() = default;
  PanelInterpolant(std::vector<double> breaks, int m)
      : breaks_(std::move(breaks)), m_(m), g_(&gauss_legendre(m)), bw_(&gauss_legendre_bary(m)) {}

  const std::vector<double>& breaks() const { return breaks_; }
  int order() const { return m_; }
  std::size_t panels() const { return breaks_.empty() ? 0 : breaks_.size() - 1; }

  std::size_t panel_of(double r) const {
    std::size_t lo = 0, hi = panels();
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      if (r >= breaks_[mid]) lo = mid;
      else hi = mid;
    }
    return lo;
  }

  /**
   * \brief Value and first two derivatives at r (extrapolates within end
   * panels). Nodal derivatives come from the differentiation matrix and are
   * interpolated like the values, which stays stable next to a node.
   */
  void eval(const double* values, double r, double& f, double* df = nullptr, double* d2f = nullptr) const {
    std::size_t p = panel_of(r);
    double a = breaks_[p], b = breaks_[p + 1];
    double h = 0.5 * (b - a);
    double x = (r - 0.5 * (a + b)) / h;
    const double* v = values + p * m_;
    f = bary(v, x);
    if (!df && !d2f) return;
    std::vector<double> d1(m_), d2(m_);
    differentiate(v, d1.data());
    if (df) *df = bary(d1.data(), x) / h;
    if (d2f) {
      differentiate(d1.data(), d2.data());
      *d2f = bary(d2.data(), x) / (h * h);
    }
  }

 private:
  double bary(const double* v, double x) const {
    const Rule& g = *g_;
    const std::vector<double>& bw = *bw_;
    double num = 0.0, den = 0.0;
    for (int j = 0; j < m_; ++j) {
      if (x == g.x[j]) return v[j];
      double c = bw[j] / (x - g.x[j]);
      num += c * v[j];
      den += c;
    }
    return num / den;
  }
  void differentiate(const double* v, double* out) const {
    const Rule& g = *g_;
    const std::vector<double>& bw = *bw_;
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int j = 0; j < m_; ++j)
        if (j != i) s += (bw[j] / bw[i]) / (g.x[i] - g.x[j]) * (v[j] - v[i]);
      out[i] = s;
    }
  }

  std::vector<double> breaks_;
  int m_ = 0;
  const Rule* g_ = nullptr;
  const std::vector<double>* bw_ = nullptr;
};

}  // namespace hyplab

#endif  // HYPLAB_QUADRATURE_HPP
