#ifndef HYPLAB_ELLIPTIC_HPP
#define HYPLAB_ELLIPTIC_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclap.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "params.hpp"
#include "spectral_core.hpp"

namespace hyplab {

struct NehariState {
  RadialFn u;
  double normLambdaSigmaSq = 0.0;
  double lqNormPow = 0.0;
  double J = 0.0;
  double gradNorm = 0.0;
  double scale = 1.0;
};

struct GroundStateDiagnostics {
  double decaySlope = 0.0;
  double supNorm = 0.0;
  double fixedPointDefect = -1.0;
  double nehariDefect = 0.0;
  double integralCheck = -1.0;
  bool bounded = false;
};

enum class SolveMethod { ProjectedGradient, ResolventFixedPoint };

inline const char* method_name(SolveMethod m) {
  return m == SolveMethod::ProjectedGradient ? "ProjectedGradient" : "ResolventFixedPoint";
}

struct GroundState {
  ModelParams params;
  std::string method;
  RadialFn u;
  /** \brief g with u = T g; empty when u was not produced by the solver */
  RadialFn source;
  double residualL2 = 0.0;
  double residualRel = 0.0;
  double energyJ = 0.0;
  double quotientI = 0.0;
  double gradNorm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
  GroundStateDiagnostics diagnostics;
};

struct SolveOptions {
  int maxIter = 400;
  double gradTol = 1e-6;
  double residualTol = 1e-3;
  double armijo = 1e-4;
  int maxHalvings = 30;
  int restarts = 3;
};

/**
 * \brief Delta^sigma v - lambda^sigma v = |v|^{gamma-1} v on radial data. All
 * norms and the inverse T = (Delta^sigma - lambda^sigma)^{-1} are spectral.
 */
class EllipticProblem {
 public:
  EllipticProblem(const SpectralContext& ctx, const ModelParams& p) : ctx_(&ctx), p_(p) {
    if (p.n != ctx.n()) throw StructuralError("elliptic: dimension differs from the spectral context");
    if (!(p.sigma > 0.0 && p.sigma < 1.0)) throw DomainError("elliptic: sigma must lie in (0,1)");
    if (!(p.lambda >= 0.0 && p.lambda <= p.lambda0())) throw DomainError("elliptic: lambda must lie in [0, lambda0]");
    if (!(p.gamma > 1.0 && p.gamma <= p.ellipticCritical()))
      throw DomainError("elliptic: gamma must lie in (1, (n+2 sigma)/(n-2 sigma)]");
    const auto& xi = ctx.spectral()->nodes;
    mult_.resize(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
      mult_[j] = shifted_multiplier(p.n, xi[j], p.lambda, p.sigma);
      if (!(mult_[j] > 0.0)) throw ResolutionError("elliptic: nonpositive multiplier at a spectral node");
    }
  }

  const ModelParams& params() const { return p_; }
  const SpectralContext& context() const { return *ctx_; }

  double inner(const SpectralFn& A, const SpectralFn& B) const {
    const auto& w = ctx_->spectral()->weights;
    double s = 0.0;
    for (std::size_t j = 0; j < A.size(); ++j) s += w[j] * mult_[j] * A.values[j] * B.values[j];
    return s;
  }
  double inner(const RadialFn& a, const RadialFn& b) const { return inner(ctx_->forward(a), ctx_->forward(b)); }
  double norm_sq(const RadialFn& u) const {
    SpectralFn U = ctx_->forward(u);
    return inner(U, U);
  }
  double lq_pow(const RadialFn& u) const { return u.lp_norm_pow(p_.gamma + 1.0); }

  double energy_J(const RadialFn& u) const {
    return 0.5 * norm_sq(u) - lq_pow(u) / (p_.gamma + 1.0);
  }
  /** \brief ||u||^2 / ||u||_{gamma+1}^2. */
  double quotient_I(const RadialFn& u) const {
    double l = lq_pow(u);
    if (l == 0.0) throw DegenerateInputError("quotient: u vanishes");
    return norm_sq(u) / std::pow(l, 2.0 / (p_.gamma + 1.0));
  }

  RadialFn power(const RadialFn& u) const {
    RadialFn g = u;
    auto f = [&](double v) { return (v < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(v), p_.gamma); };
    for (double& v : g.values) v = f(v);
    g.valueAtOrigin = f(g.valueAtOrigin);
    return g;
  }

  /** \brief T g by the multiplier 1/((xi^2+lambda0)^sigma - lambda^sigma). */
  RadialFn apply_T(const RadialFn& g) const {
    SpectralFn G = ctx_->forward(g);
    for (std::size_t j = 0; j < G.size(); ++j) G.values[j] /= mult_[j];
    return ctx_->inverse(G);
  }

  /** \brief Riesz representative u - T(|u|^{gamma-1}u) of J'(u). */
  RadialFn gradient(const RadialFn& u) const {
    RadialFn g = u;
    g.axpy(-1.0, apply_T(power(u)));
    return g;
  }

  NehariState nehari_project(const RadialFn& u) const {
    double a = norm_sq(u), b = lq_pow(u);
    if (!(b > 0.0)) throw DegenerateInputError("nehari_project: ||u||_{gamma+1} = 0");
    NehariState s;
    s.scale = std::pow(a / b, 1.0 / (p_.gamma - 1.0));
    s.u = u;
    s.u *= s.scale;
    s.normLambdaSigmaSq = norm_sq(s.u);
    s.lqNormPow = lq_pow(s.u);
    s.J = 0.5 * s.normLambdaSigmaSq - s.lqNormPow / (p_.gamma + 1.0);
    return s;
  }

  /** \brief Spectral Delta^sigma u - lambda^sigma u - |u|^{gamma-1}u. */
  RadialFn residual_fn(const RadialFn& u) const {
    RadialFn r = frac_laplacian_spectral(*ctx_, u, p_.sigma);
    r.axpy(-std::pow(p_.lambda, p_.sigma), u);
    r.axpy(-1.0, power(u));
    return r;
  }
  double residual(const RadialFn& u) const { return residual_fn(u).l2(); }

  /** \brief Largest spectral vs singular-integral Delta^sigma mismatch at the radii, relative to the spectral sup. */
  double residual_crosscheck(const RadialFn& u, const std::vector<double>& radii) const {
    auto rep = cross_validate_laplacian(*ctx_, u, p_.sigma, radii, 1.0, false);
    return rep.maxRelDev;
  }

  /**
   * \brief Singular-integral Delta^sigma u - lambda^sigma u against the source
   * g = (Delta^sigma - lambda^sigma) u of a solver state, relative to sup |g|.
   */
  double residual_crosscheck(const GroundState& gs, const std::vector<double>& radii) const {
    if (!gs.source.grid) return residual_crosscheck(gs.u, radii);
    FracLaplacianIntegral L(p_.n, p_.sigma);
    RadialSource src = RadialSource::of(gs.u);
    const double ls = std::pow(p_.lambda, p_.sigma);
    double worst = 0.0, scale = gs.source.sup();
    for (double r : radii) {
      double u0 = r == 0.0 ? gs.u.valueAtOrigin : gs.u(r);
      double g0 = r == 0.0 ? gs.source.valueAtOrigin : gs.source(r);
      worst = std::max(worst, std::abs(L(src, r) - ls * u0 - g0));
    }
    return worst / scale;
  }

  GroundState solve(SolveMethod method, const RadialFn& seed, const SolveOptions& opt = SolveOptions()) const {
    if (!(p_.gamma < p_.ellipticCritical())) throw DomainError("solve_ground_state: gamma must be subcritical");
    if (seed.sup() == 0.0) throw DegenerateInputError("solve_ground_state: seed must be nonzero");
    RadialFn start = seed;
    for (int attempt = 0; attempt <= opt.restarts; ++attempt) {
      try {
        return method == SolveMethod::ProjectedGradient ? descend(start, opt) : fixed_point(start, opt);
      } catch (const DegenerateInputError&) {
        start *= 10.0;
      }
    }
    throw DegenerateInputError("solve_ground_state: iteration collapsed to zero");
  }

  /** \brief ||u||^2 for u = T g. */
  double source_norm_sq(const RadialFn& g) const { return make_source_state(g).normSq; }

 private:
  /**
   * \brief Iterates are held as u = T g. For lambda = lambda0 the ground state
   * decays like e^{-rho r} and is not square integrable, so Plancherel sums
   * over samples of u lose accuracy; those of g stay exact, and
   * ||u||^2 = int g T g.
   */
  struct SourceState {
    RadialFn g, u;
    SpectralFn G;
    double normSq = 0.0, lqPow = 0.0, J = 0.0;
  };

  SourceState make_source_state(RadialFn g) const {
    SourceState s;
    s.g = std::move(g);
    s.G = ctx_->forward(s.g);
    SpectralFn U = s.G;
    const auto& w = ctx_->spectral()->weights;
    for (std::size_t j = 0; j < U.size(); ++j) {
      U.values[j] /= mult_[j];
      s.normSq += w[j] * s.G.values[j] * U.values[j];
    }
    s.u = ctx_->inverse(U);
    s.lqPow = lq_pow(s.u);
    s.J = 0.5 * s.normSq - s.lqPow / (p_.gamma + 1.0);
    return s;
  }

  /** \brief Nehari scaling; the map g -> u is linear so g scales alike. */
  SourceState project_source(const SourceState& s) const {
    if (!(s.lqPow > 0.0)) throw DegenerateInputError("nehari_project: ||u||_{gamma+1} = 0");
    double beta = std::pow(s.normSq / s.lqPow, 1.0 / (p_.gamma - 1.0));
    RadialFn g = s.g;
    g *= beta;
    return make_source_state(std::move(g));
  }

  /** \brief g - |u|^{gamma-1} u, the source of J'(u), with its squared norm. */
  std::pair<RadialFn, double> source_gradient(const SourceState& s) const {
    RadialFn d = s.g;
    d.axpy(-1.0, power(s.u));
    SpectralFn D = ctx_->forward(d);
    const auto& w = ctx_->spectral()->weights;
    double n2 = 0.0;
    for (std::size_t j = 0; j < D.size(); ++j) n2 += w[j] * D.values[j] * D.values[j] / mult_[j];
    return {std::move(d), std::max(0.0, n2)};
  }

  static RadialFn absval(RadialFn u) {
    for (double& v : u.values) v = std::abs(v);
    u.valueAtOrigin = std::abs(u.valueAtOrigin);
    return u;
  }

  GroundState finish(const SourceState& s, SolveMethod m, int it, const std::vector<double>& hist,
                     const SolveOptions& opt) const {
    GroundState gs;
    gs.params = p_;
    gs.method = method_name(m);
    gs.u = s.u;
    gs.source = s.g;
    gs.iterations = it;
    gs.history = hist;
    gs.energyJ = s.J;
    gs.quotientI = s.normSq / std::pow(s.lqPow, 2.0 / (p_.gamma + 1.0));
    auto [d, gn2] = source_gradient(s);
    gs.gradNorm = std::sqrt(gn2);
    RadialFn ug = power(s.u);
    gs.residualL2 = d.l2();
    gs.residualRel = gs.residualL2 / ug.l2();
    gs.converged = gs.gradNorm / std::sqrt(s.normSq) < opt.gradTol && gs.residualRel < opt.residualTol;
    gs.diagnostics.nehariDefect = std::abs(s.normSq - s.lqPow) / s.normSq;
    gs.diagnostics.supNorm = s.u.sup();
    gs.diagnostics.bounded = std::isfinite(gs.diagnostics.supNorm);
    return gs;
  }

  /** \brief Start from u = T(seed) so that a bump seed has a bump source. */
  SourceState start_state(const RadialFn& seed) const { return project_source(make_source_state(absval(seed))); }

  GroundState descend(const RadialFn& seed, const SolveOptions& opt) const {
    SourceState s = start_state(seed);
    std::vector<double> hist{s.J};
    for (int it = 1; it <= opt.maxIter; ++it) {
      auto [d, gn2] = source_gradient(s);
      if (std::sqrt(gn2 / s.normSq) < opt.gradTol) return finish(s, SolveMethod::ProjectedGradient, it, hist, opt);
      double alpha = 1.0;
      bool accepted = false;
      for (int k = 0; k < opt.maxHalvings; ++k, alpha *= 0.5) {
        // u - alpha J'(u) = T(g - alpha d); |.| is taken on the source, which keeps u >= 0
        RadialFn trial = s.g;
        trial.axpy(-alpha, d);
        SourceState t = project_source(make_source_state(absval(trial)));
        if (t.J <= s.J - opt.armijo * alpha * gn2) {
          s = std::move(t);
          accepted = true;
          break;
        }
      }
      if (!accepted) return finish(s, SolveMethod::ProjectedGradient, it, hist, opt);
      hist.push_back(s.J);
    }
    return finish(s, SolveMethod::ProjectedGradient, opt.maxIter, hist, opt);
  }

  GroundState fixed_point(const RadialFn& seed, const SolveOptions& opt) const {
    SourceState s = start_state(seed);
    std::vector<double> hist{s.J};
    for (int it = 1; it <= opt.maxIter; ++it) {
      SourceState t = project_source(make_source_state(absval(power(s.u))));
      SpectralFn D = t.G;
      const auto& w = ctx_->spectral()->weights;
      double dn = 0.0;
      for (std::size_t j = 0; j < D.size(); ++j) {
        double x = t.G.values[j] - s.G.values[j];
        dn += w[j] * x * x / mult_[j];
      }
      double step = std::sqrt(std::max(0.0, dn) / t.normSq);
      s = std::move(t);
      hist.push_back(s.J);
      if (step < 0.1 * opt.gradTol) return finish(s, SolveMethod::ResolventFixedPoint, it, hist, opt);
    }
    return finish(s, SolveMethod::ResolventFixedPoint, opt.maxIter, hist, opt);
  }

  const SpectralContext* ctx_;
  ModelParams p_;
  std::vector<double> mult_;
};

/** \brief Gaussian seed e^{-r^2} scaled to unit mass. */
inline RadialFn unit_mass_seed(std::shared_ptr<const RadialGrid> g, double width = 1.0) {
  RadialFn u = RadialFn::sample(g, [&](double r) { return std::exp(-r * r / (width * width)); });
  u *= 1.0 / u.integral();
  return u;
}

inline GroundState solve_ground_state(const SpectralContext& ctx, const ModelParams& p, SolveMethod m,
                                      const SolveOptions& opt = SolveOptions()) {
  EllipticProblem P(ctx, p);
  return P.solve(m, unit_mass_seed(ctx.radial()), opt);
}

struct StructureReport {
  double fixedPointDefect = 0.0;
  double energy = 0.0;
  std::vector<std::pair<double, double>> lqNorms;
  double supNorm = 0.0;
  double nehariDefect = 0.0;
  double decaySlope = 0.0;
  bool passes = false;
  std::vector<std::string> failures;
};

/**
 * \brief (i) ||u - u^gamma * k||_2 / ||u||_2 with the convolution done in
 * real space by the resolvent kernel, on r <= rMax - window (the kernel is
 * unknown past rMax); (ii) energy; (iii) L^q norms; (iv) Nehari identity.
 */
inline StructureReport verify_structure(const SpectralContext& ctx, const GroundState& gs, double window = 8.0) {
  StructureReport rep;
  const ModelParams& p = gs.params;
  const RadialFn& u = gs.u;
  EllipticProblem P(ctx, p);
  // a solver state carries its source, which gives ||u||^2 without summing over samples of u
  double n2 = gs.source.grid ? P.source_norm_sq(gs.source) : P.norm_sq(u), lq = P.lq_pow(u);
  rep.energy = n2;
  rep.supNorm = u.sup();
  if (rep.supNorm == 0.0) {
    rep.passes = true;
    return rep;
  }
  rep.nehariDefect = std::abs(n2 - lq) / n2;
  ResolventKernel K(ctx, p.lambda, p.sigma);
  RadialFn k = K.profile();
  RadialFn conv = radial_convolve(P.power(u), k);
  const RadialGrid& g = *ctx.radial();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nodes[i] <= g.rMax - window) {
      double d = u.values[i] - conv.values[i];
      num += g.weights[i] * d * d;
      den += g.weights[i] * u.values[i] * u.values[i];
    }
  rep.fixedPointDefect = std::sqrt(num / den);
  for (double q : {2.5, 4.0, 8.0}) rep.lqNorms.push_back({q, std::pow(u.lp_norm_pow(q), 1.0 / q)});
  rep.lqNorms.push_back({std::numeric_limits<double>::infinity(), rep.supNorm});
  // log-slope of u on [rMax/4, rMax/2]
  std::vector<double> x, y;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nodes[i] >= 0.25 * g.rMax && g.nodes[i] <= 0.5 * g.rMax && u.values[i] > 0.0) {
      x.push_back(g.nodes[i]);
      y.push_back(std::log(u.values[i]));
    }
  rep.decaySlope = x.size() > 2 ? fit_slope(x, y) : 0.0;
  if (!(rep.fixedPointDefect < 1e-2)) rep.failures.push_back("fixed-point defect");
  if (!(std::isfinite(rep.energy) && rep.energy > 0.0)) rep.failures.push_back("energy");
  for (auto& [q, v] : rep.lqNorms)
    if (!std::isfinite(v)) rep.failures.push_back("L^q norm");
  if (!(rep.nehariDefect < 1e-8)) rep.failures.push_back("Nehari identity");
  rep.passes = rep.failures.empty();
  return rep;
}

struct GradientCheck {
  std::vector<double> eps, errors;
  double order = 0.0;
};

/** \brief Central differences of J along v against <J'(u), v>_{lambda,sigma}. */
inline GradientCheck gradient_check(const EllipticProblem& P, const RadialFn& u, const RadialFn& v,
                                    const std::vector<double>& eps = {0.2, 0.1, 0.05, 0.025}) {
  GradientCheck gc;
  gc.eps = eps;
  double exact = P.inner(P.gradient(u), v);
  std::vector<double> lx, ly;
  for (double e : eps) {
    RadialFn a = u, b = u;
    a.axpy(e, v);
    b.axpy(-e, v);
    double fd = (P.energy_J(a) - P.energy_J(b)) / (2.0 * e);
    gc.errors.push_back(std::abs(fd - exact));
    lx.push_back(std::log(e));
    ly.push_back(std::log(gc.errors.back()));
  }
  gc.order = fit_slope(lx, ly);
  return gc;
}

inline nlohmann::json to_json(const GroundState& gs, const RadialGrid& g) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["params"] = {{"n", gs.params.n},
                 {"sigma", gs.params.sigma},
                 {"lambda", gs.params.lambda},
                 {"gamma", gs.params.gamma}};
  j["gridHash"] = hex64(g.hash());
  j["method"] = gs.method;
  j["valueAtOrigin"] = gs.u.valueAtOrigin;
  j["values"] = gs.u.values;
  if (gs.source.grid) j["source"] = gs.source.values;
  j["diagnostics"] = {{"residualL2", gs.residualL2},
                      {"residualRel", gs.residualRel},
                      {"energyJ", gs.energyJ},
                      {"quotientI", gs.quotientI},
                      {"gradNorm", gs.gradNorm},
                      {"iterations", gs.iterations},
                      {"converged", gs.converged},
                      {"nehariDefect", gs.diagnostics.nehariDefect},
                      {"supNorm", gs.diagnostics.supNorm},
                      {"fixedPointDefect", gs.diagnostics.fixedPointDefect},
                      {"decaySlope", gs.diagnostics.decaySlope}};
  return j;
}

/** \brief Inverse of to_json; the grid hash must match. */
inline GroundState ground_state_from_json(const nlohmann::json& j, std::shared_ptr<const RadialGrid> g) {
  if (j.at("gridHash").get<std::string>() != hex64(g->hash()))
    throw StructuralError("ground state was computed on a different grid");
  GroundState gs;
  gs.params.n = j["params"]["n"];
  gs.params.sigma = j["params"]["sigma"];
  gs.params.lambda = j["params"]["lambda"];
  gs.params.gamma = j["params"]["gamma"];
  gs.method = j["method"];
  gs.u = RadialFn(g);
  gs.u.values = j["values"].get<std::vector<double>>();
  if (gs.u.values.size() != g->size()) throw StructuralError("ground state size mismatch");
  gs.u.valueAtOrigin = j["valueAtOrigin"];
  if (j.contains("source")) {
    gs.source = RadialFn(g);
    gs.source.values = j["source"].get<std::vector<double>>();
    if (gs.source.values.size() != g->size()) throw StructuralError("ground state size mismatch");
  }
  const auto& d = j["diagnostics"];
  gs.residualL2 = d["residualL2"];
  gs.residualRel = d["residualRel"];
  gs.energyJ = d["energyJ"];
  gs.quotientI = d["quotientI"];
  gs.gradNorm = d["gradNorm"];
  gs.iterations = d["iterations"];
  gs.converged = d["converged"];
  gs.diagnostics.nehariDefect = d["nehariDefect"];
  gs.diagnostics.supNorm = d["supNorm"];
  gs.diagnostics.fixedPointDefect = d["fixedPointDefect"];
  gs.diagnostics.decaySlope = d["decaySlope"];
  return gs;
}

}  // namespace hyplab

#endif  // HYPLAB_ELLIPTIC_HPP
