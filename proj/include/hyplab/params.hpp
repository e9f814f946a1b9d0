#ifndef HYPLAB_PARAMS_HPP
#define HYPLAB_PARAMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace hyplab {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConsistencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructuralError : std::logic_error {
  using std::logic_error::logic_error;
};
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/** \brief Geometry of H^n plus equation parameters. */
struct ModelParams {
  int n = 3;
  double sigma = 0.5;
  double lambda = 0.0;
  double beta = 1.0;
  double gamma = 2.0;

  double rho() const { return 0.5 * (n - 1); }
  double lambda0() const { return rho() * rho(); }
  double gammaStar() const { return 1.0 + beta / std::pow(lambda0(), sigma); }
  double sobolevCritical() const { return 2.0 * n / (n - 2.0 * sigma); }
  /** \brief Upper end (n+2s)/(n-2s) of the admissible elliptic exponents. */
  double ellipticCritical() const { return (n + 2.0 * sigma) / (n - 2.0 * sigma); }

  void validate() const {
    if (n < 2) throw DomainError("dimension n must be >= 2");
    if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in (0,1)");
    if (!(lambda >= 0.0 && lambda <= lambda0())) throw DomainError("lambda must lie in [0, lambda0]");
    if (!(beta > 0.0)) throw DomainError("beta must be > 0");
    if (!(gamma > 1.0)) throw DomainError("gamma must be > 1");
  }
};

/** \brief Surface area of the unit sphere S^{n-1}. */
inline double sphere_area(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

/** \brief log(sinh r), accurate for tiny and huge r. */
inline double log_sinh(double r) {
  if (r < 20.0) return std::log(std::sinh(r));
  return r - M_LN2 + std::log1p(-std::exp(-2.0 * r));
}

}  // namespace hyplab

#endif  // HYPLAB_PARAMS_HPP
