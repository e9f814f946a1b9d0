#ifndef HYPLAB_FUJITA_HPP
#define HYPLAB_FUJITA_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <tbb/parallel_for.h>

#include "fraclap.hpp"
#include "params.hpp"
#include "quadrature.hpp"
#include "spectral_core.hpp"

namespace hyplab {

struct BlowUpSignal : NumericError {
  double time;
  BlowUpSignal(const std::string& what, double t) : NumericError(what), time(t) {}
};

/** \brief (xi^2 + rho^2)^sigma on the spectral nodes. */
inline std::vector<double> frac_symbol(const SpectralContext& ctx, double sigma) {
  const double lam0 = 0.25 * (ctx.n() - 1) * (ctx.n() - 1);
  const auto& xi = ctx.spectral()->nodes;
  std::vector<double> mu(xi.size());
  for (std::size_t j = 0; j < xi.size(); ++j) mu[j] = std::pow(xi[j] * xi[j] + lam0, sigma);
  return mu;
}

namespace detail {

/** \brief Zero out negatives of size below 1e-12 sup; returns how many. */
inline std::size_t clip_small_negatives(RadialFn& u) {
  double floor = 1e-12 * u.sup();
  std::size_t k = 0;
  for (double& v : u.values)
    if (v < 0.0 && v >= -floor) {
      v = 0.0;
      ++k;
    }
  if (u.valueAtOrigin < 0.0 && u.valueAtOrigin >= -floor) {
    u.valueAtOrigin = 0.0;
    ++k;
  }
  return k;
}

/** \brief (e^{-x} - 1 + x) / x^2. */
inline double phi2_scaled(double x) {
  if (x < 1e-3) return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
  return (std::expm1(-x) + x) / (x * x);
}

}  // namespace detail

/** \brief e^{-t Delta^sigma} f by spectral multiplication. */
inline RadialFn semigroup_apply(const SpectralContext& ctx, const RadialFn& f, double sigma, double t,
                                std::size_t* clipped = nullptr) {
  if (t < 0.0) throw DomainError("semigroup_apply: t must be >= 0");
  if (t == 0.0) return f;
  auto mu = frac_symbol(ctx, sigma);
  SpectralFn F = ctx.forward(f);
  for (std::size_t j = 0; j < F.size(); ++j) F.values[j] *= std::exp(-t * mu[j]);
  RadialFn u = ctx.inverse(F);
  std::size_t k = detail::clip_small_negatives(u);
  if (clipped) *clipped = k;
  return u;
}

struct StepPolicy {
  double dt0 = 0.05;
  double maxIncrease = 0.2;
  double dtMin = 1e-10;
};

enum class Verdict { BlowUp, GlobalWithinHorizon, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::BlowUp: return "BlowUp";
    case Verdict::GlobalWithinHorizon: return "GlobalWithinHorizon";
    default: return "Inconclusive";
  }
}

struct FujitaConfig {
  ModelParams params;
  RadialFn initialData;
  double horizon = 20.0;
  StepPolicy step;
  double blowUpThreshold = 1e6;
  bool nonlinear = true;
  /** \brief time factor of the nonlinearity; empty means e^{beta t} */
  std::function<double(double)> h;
  /** \brief extra source term, used by manufactured-solution tests */
  std::function<RadialFn(double)> forcing;
  std::vector<double> lq{2.0};

  double h_at(double t) const { return h ? h(t) : std::exp(params.beta * t); }

  void validate() const {
    if (!(params.sigma > 0.0 && params.sigma < 1.0)) throw DomainError("fujita: sigma must lie in (0,1)");
    if (!(params.gamma > 1.0)) throw DomainError("fujita: gamma must be > 1");
    if (!initialData.grid) throw StructuralError("fujita: initial data without grid");
    for (double v : initialData.values)
      if (v < 0.0 || !std::isfinite(v)) throw DomainError("fujita: initial data must be finite and nonnegative");
    if (!(horizon > 0.0)) throw DomainError("fujita: horizon must be > 0");
  }
};

struct Certificate {
  std::string name;
  double value = 0.0;
  bool holds = false;
  std::string note;
};

struct SolutionTrace {
  std::vector<double> times, supNorm, l2;
  std::map<double, std::vector<double>> lqNorms;
  Verdict verdict = Verdict::Inconclusive;
  double tStar = std::numeric_limits<double>::quiet_NaN();
  std::vector<Certificate> certificates;
  std::size_t clipped = 0;
  std::size_t steps = 0, rejected = 0;
  std::string note;
  RadialFn final;
};

/**
 * \brief Exponential integrator for u_t + Delta^sigma u = h(t)|u|^{gamma-1}u.
 * The state is carried in frequency so the linear part is exact; the
 * Duhamel integral uses a left-endpoint predictor and a trapezoidal
 * corrector in s.
 */
class MildSolver {
 public:
  MildSolver(const SpectralContext& ctx, const FujitaConfig& cfg) : ctx_(&ctx), cfg_(&cfg) {
    mu_ = frac_symbol(ctx, cfg.params.sigma);
  }

  struct State {
    double t = 0.0;
    SpectralFn U;
    RadialFn u;
  };

  State initial() const {
    State s;
    s.t = 0.0;
    s.U = ctx_->forward(cfg_->initialData);
    s.u = cfg_->initialData;
    return s;
  }

  RadialFn nonlinearity(const RadialFn& u, double t) const {
    RadialFn N(u.grid);
    if (cfg_->nonlinear) {
      const double g = cfg_->params.gamma, h = cfg_->h_at(t);
      auto pw = [&](double v) { return v > 0.0 ? h * std::pow(v, g) : 0.0; };
      for (std::size_t i = 0; i < u.size(); ++i) N.values[i] = pw(u.values[i]);
      N.valueAtOrigin = pw(u.valueAtOrigin);
    }
    if (cfg_->forcing) N.axpy(1.0, cfg_->forcing(t));
    return N;
  }

  /** \brief One step of size dt; throws BlowUpSignal on non-finite data. */
  State step(const State& s, double dt) const {
    if (!(dt > 0.0)) throw DomainError("step_mild: dt must be > 0");
    const std::size_t m = mu_.size();
    SpectralFn N0 = ctx_->forward(nonlinearity(s.u, s.t));
    SpectralFn A(s.U.grid);
    std::vector<double> E(m), P2(m);
    for (std::size_t j = 0; j < m; ++j) {
      double x = dt * mu_[j];
      E[j] = std::exp(-x);
      double p1 = -std::expm1(-x) / mu_[j];
      P2[j] = dt * detail::phi2_scaled(x);
      A.values[j] = E[j] * s.U.values[j] + p1 * N0.values[j];
    }
    State out;
    out.t = s.t + dt;
    bool active = cfg_->nonlinear || static_cast<bool>(cfg_->forcing);
    if (active) {
      RadialFn a = ctx_->inverse(A);
      check_finite(a, out.t);
      SpectralFn N1 = ctx_->forward(nonlinearity(a, out.t));
      for (std::size_t j = 0; j < m; ++j) A.values[j] += P2[j] * (N1.values[j] - N0.values[j]);
    }
    out.U = std::move(A);
    out.u = ctx_->inverse(out.U);
    check_finite(out.u, out.t);
    return out;
  }

 private:
  static void check_finite(const RadialFn& u, double t) {
    if (!std::isfinite(u.valueAtOrigin)) throw BlowUpSignal("non-finite solution", t);
    for (double v : u.values)
      if (!std::isfinite(v)) throw BlowUpSignal("non-finite solution", t);
  }

  const SpectralContext* ctx_;
  const FujitaConfig* cfg_;
  std::vector<double> mu_;
};

inline RadialFn step_mild(const SpectralContext& ctx, const RadialFn& u, double t, double dt, const FujitaConfig& cfg) {
  MildSolver S(ctx, cfg);
  MildSolver::State s;
  s.t = t;
  s.u = u;
  s.U = ctx.forward(u);
  return S.step(s, dt).u;
}

namespace detail {

struct SegmentResult {
  bool crossed = false;
  bool underflow = false;
  double tCross = 0.0;
};

/** \brief Adaptive integration from s until tEnd or the threshold; observer sees every accepted state. */
template <class Obs>
inline SegmentResult integrate_segment(const MildSolver& S, const FujitaConfig& cfg, MildSolver::State& s,
                                       double dt, double tEnd, Obs&& observe, std::size_t* nSteps = nullptr,
                                       std::size_t* nRejected = nullptr, MildSolver::State* anchor = nullptr) {
  SegmentResult res;
  const double dtMax = dt;
  double sup = s.u.sup();
  while (s.t < tEnd * (1.0 - 1e-14)) {
    double h = std::min(dt, tEnd - s.t);
    std::optional<MildSolver::State> next;
    try {
      next = S.step(s, h);
    } catch (const BlowUpSignal&) {
      next.reset();
    }
    double sup1 = next ? next->u.sup() : std::numeric_limits<double>::infinity();
    bool tooFast = !next || (sup > 0.0 && (sup1 - sup) > cfg.step.maxIncrease * sup);
    if (tooFast) {
      if (nRejected) ++*nRejected;
      dt = 0.5 * h;
      if (dt < cfg.step.dtMin) {
        res.underflow = true;
        return res;
      }
      continue;
    }
    if (anchor && sup1 < 1e-3 * cfg.blowUpThreshold) *anchor = *next;
    s = std::move(*next);
    sup = sup1;
    if (nSteps) ++*nSteps;
    observe(s);
    if (sup > cfg.blowUpThreshold) {
      res.crossed = true;
      res.tCross = s.t;
      return res;
    }
    if (h == dt && dt < dtMax) dt = std::min(dtMax, 2.0 * dt);
  }
  return res;
}

}  // namespace detail

/**
 * \brief Integrate to the horizon or to blow-up. A threshold crossing is
 * confirmed by re-running from the last state below 1e-3 of the threshold
 * with the step halved twice.
 */
inline SolutionTrace run(const SpectralContext& ctx, const FujitaConfig& cfg,
                         const std::function<void(double, const RadialFn&)>& observer = {}) {
  cfg.validate();
  MildSolver S(ctx, cfg);
  SolutionTrace tr;
  auto record = [&](const MildSolver::State& s) {
    tr.times.push_back(s.t);
    tr.supNorm.push_back(s.u.sup());
    tr.l2.push_back(s.u.l2());
    for (double q : cfg.lq) tr.lqNorms[q].push_back(std::pow(s.u.lp_norm_pow(q), 1.0 / q));
    if (observer) observer(s.t, s.u);
  };
  MildSolver::State s = S.initial();
  record(s);
  MildSolver::State anchor = s;
  if (s.u.sup() == 0.0 && !cfg.forcing) {
    s.t = cfg.horizon;
    record(s);
    tr.verdict = Verdict::GlobalWithinHorizon;
    tr.note = "zero data";
    tr.final = s.u;
    return tr;
  }
  auto seg = detail::integrate_segment(S, cfg, s, cfg.step.dt0, cfg.horizon, record, &tr.steps, &tr.rejected, &anchor);
  tr.final = s.u;
  if (seg.underflow) {
    tr.verdict = Verdict::Inconclusive;
    tr.note = "step underflow before threshold";
    return tr;
  }
  if (seg.crossed) {
    // two successive halvings of the step must reproduce the crossing
    double lastCross = seg.tCross;
    bool confirmed = true;
    double dt = cfg.step.dt0;
    for (int k = 0; k < 2 && confirmed; ++k) {
      dt *= 0.5;
      MildSolver::State c = anchor;
      auto r2 = detail::integrate_segment(S, cfg, c, dt, std::max(cfg.horizon, lastCross) * 1.5 + 1.0,
                                          [](const MildSolver::State&) {});
      confirmed = r2.crossed;
      if (confirmed) lastCross = r2.tCross;
    }
    if (confirmed) {
      tr.verdict = Verdict::BlowUp;
      tr.tStar = lastCross;
    } else {
      tr.verdict = Verdict::Inconclusive;
      tr.note = "threshold crossing not reproduced under step halving";
    }
    return tr;
  }
  // global proxy: sup norm non-increasing over the last quarter
  bool mono = true;
  for (std::size_t i = 1; i < tr.times.size(); ++i)
    if (tr.times[i] >= 0.75 * cfg.horizon && tr.supNorm[i] > tr.supNorm[i - 1] * (1.0 + 1e-12)) mono = false;
  tr.verdict = mono ? Verdict::GlobalWithinHorizon : Verdict::Inconclusive;
  if (!mono) tr.note = "sup norm still growing in the final quarter";
  return tr;
}

/** \brief ||e^{-s Delta^sigma} f||_inf at the given times. */
inline std::vector<double> sup_norm_profile(const SpectralContext& ctx, const RadialFn& f, double sigma,
                                            const std::vector<double>& times) {
  auto mu = frac_symbol(ctx, sigma);
  SpectralFn F = ctx.forward(f);
  std::vector<double> out(times.size());
  tbb::parallel_for(std::size_t(0), times.size(), [&](std::size_t k) {
    SpectralFn G = F;
    for (std::size_t j = 0; j < G.size(); ++j) G.values[j] *= std::exp(-times[k] * mu[j]);
    out[k] = ctx.inverse(G).sup();
  });
  return out;
}

struct WeisslerReport {
  double integralValue = 0.0;
  double bound = 0.0;
  double tail = 0.0;
  bool divergent = false;
  bool certifiesGlobal = false;
  std::string note;
};

/** \brief Sup norms of e^{-s Delta^sigma} f on a quadrature rule over [0, sEnd]. */
struct SupProfile {
  Rule rule;
  std::vector<double> sup;
  double sEnd = 0.0, supEnd = 0.0;
};

inline SupProfile make_sup_profile(const SpectralContext& ctx, const RadialFn& f, double sigma, double sEnd = 40.0) {
  SupProfile P;
  P.sEnd = sEnd;
  P.rule = composite_rule(graded_breaks(sEnd, 1.0, 4), 8);
  std::vector<double> t = P.rule.x;
  t.push_back(sEnd);
  auto S = sup_norm_profile(ctx, f, sigma, t);
  P.supEnd = S.back();
  S.pop_back();
  P.sup = std::move(S);
  return P;
}

/**
 * \brief int_0^inf h(s) ||e^{-s Delta^sigma} f||_inf^{gamma-1} ds with the
 * tail beyond sEnd taken from C s^{-3/2} e^{-lambda0^sigma s}; certifies when
 * below (1 - margin)/(gamma - 1).
 */
inline WeisslerReport weissler_certificate(const SpectralContext& ctx, const FujitaConfig& cfg,
                                           const SupProfile* profile = nullptr, double margin = 0.05) {
  const ModelParams& p = cfg.params;
  WeisslerReport rep;
  rep.bound = (1.0 - margin) / (p.gamma - 1.0);
  const double lam = std::pow(p.lambda0(), p.sigma), g1 = p.gamma - 1.0;
  const double a = p.beta - lam * g1;
  if (cfg.initialData.sup() == 0.0) {
    rep.certifiesGlobal = true;
    rep.note = "zero data";
    return rep;
  }
  const double pw = 1.5 * g1;
  if (a > 1e-12 || (std::abs(a) <= 1e-12 && pw <= 1.0)) {
    rep.divergent = true;
    rep.integralValue = std::numeric_limits<double>::infinity();
    rep.note = "integrand does not decay: beta >= lambda0^sigma (gamma - 1)";
    return rep;
  }
  SupProfile own;
  if (!profile) {
    own = make_sup_profile(ctx, cfg.initialData, p.sigma);
    profile = &own;
  }
  const Rule& q = profile->rule;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    rep.integralValue += q.w[i] * cfg.h_at(q.x[i]) * std::pow(profile->sup[i], g1);
  const double sEnd = profile->sEnd;
  double C = profile->supEnd * std::pow(sEnd, 1.5) * std::exp(lam * sEnd);
  double Cg = std::pow(C, g1);
  if (std::abs(a) <= 1e-12) {
    rep.tail = Cg * std::pow(sEnd, 1.0 - pw) / (pw - 1.0);
  } else {
    // int_sEnd^inf s^{-pw} e^{a s} ds
    double width = 40.0 / std::abs(a);
    Rule qt = composite_rule(log_breaks(sEnd, sEnd + width, 60), 10);
    for (std::size_t i = 0; i < qt.x.size(); ++i)
      rep.tail += qt.w[i] * Cg * std::pow(qt.x[i], -pw) * std::exp(a * qt.x[i]);
  }
  rep.integralValue += rep.tail;
  rep.certifiesGlobal = rep.integralValue < rep.bound;
  return rep;
}

struct BlowupCertificate {
  std::vector<double> probeTimes, probeValues;
  double growthRate = 0.0;
  bool monotoneGrowth = false;
  bool decays = false;
};

/** \brief Probe e^{beta t/(gamma-1)} ||e^{-t Delta^sigma} f||_inf at T0 {1, 2, 4, 8}. */
inline BlowupCertificate blowup_certificate(const SpectralContext& ctx, const FujitaConfig& cfg, double T0 = 0.0) {
  const ModelParams& p = cfg.params;
  const double kappa = p.beta / (p.gamma - 1.0) - std::pow(p.lambda0(), p.sigma);
  if (T0 <= 0.0) T0 = kappa > 0.0 ? std::clamp(2.0 / kappa, 5.0, 80.0) : 5.0;
  BlowupCertificate rep;
  rep.probeTimes = {T0, 2 * T0, 4 * T0, 8 * T0};
  auto S = sup_norm_profile(ctx, cfg.initialData, p.sigma, rep.probeTimes);
  std::vector<double> lv;
  for (std::size_t k = 0; k < S.size(); ++k) {
    double l = S[k] > 0.0 ? std::log(S[k]) + p.beta * rep.probeTimes[k] / (p.gamma - 1.0)
                          : -std::numeric_limits<double>::infinity();
    rep.probeValues.push_back(std::exp(l));
    lv.push_back(l);
  }
  bool allFinite = std::all_of(lv.begin(), lv.end(), [](double v) { return std::isfinite(v); });
  if (allFinite) rep.growthRate = fit_slope(rep.probeTimes, lv);
  rep.monotoneGrowth = allFinite;
  rep.decays = allFinite;
  for (std::size_t k = 1; k < lv.size(); ++k) {
    rep.monotoneGrowth = rep.monotoneGrowth && lv[k] > lv[k - 1];
    rep.decays = rep.decays && lv[k] < lv[k - 1];
  }
  return rep;
}

struct SupersolutionReport {
  double residualMin = 0.0;
  double residualRelL2 = 0.0;
  bool residualOk = false;
  double maxExcess = 0.0;
  bool dominates = false;
  bool certified = false;
  SolutionTrace trace;
};

/**
 * \brief Residual Delta^sigma v - lambda0^sigma v - v^gamma relative to sup v^gamma,
 * at nodes with r <= rMax - window and v >= floor sup v (elsewhere v^gamma is
 * below the tolerance anyway), then the evolution from v/2 at beta = (gamma - 1) lambda0^sigma against e^{-lambda0^sigma t} v.
 */
inline SupersolutionReport supersolution_check(const SpectralContext& ctx, const RadialFn& vbar, double sigma,
                                               double gamma, double horizon = 10.0, double tol = 1e-3,
                                               double window = 8.0, double floor = 1e-8) {
  SupersolutionReport rep;
  const double lam0 = 0.25 * (ctx.n() - 1) * (ctx.n() - 1), ls = std::pow(lam0, sigma);
  for (double v : vbar.values)
    if (v < 0.0) throw DomainError("supersolution_check: vbar must be nonnegative");
  double vs = vbar.sup();
  if (vs == 0.0) {
    rep.residualOk = rep.dominates = rep.certified = true;
    return rep;
  }
  // Pointwise singular integral: vbar decays like e^{-rho r} at lambda0, and the
  // spectral route then suffers from the truncation at rMax.
  const RadialGrid& grid = *ctx.radial();
  FracLaplacianIntegral L(ctx.n(), sigma);
  RadialSource src = RadialSource::of(vbar);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.nodes[i] <= grid.rMax - window && vbar.values[i] >= floor * vs) idx.push_back(i);
  std::vector<double> res(idx.size());
  auto term = [&](double r, double v) { return L(src, r) - ls * v - std::pow(v, gamma); };
  tbb::parallel_for(std::size_t(0), idx.size(),
                    [&](std::size_t k) { res[k] = term(grid.nodes[idx[k]], vbar.values[idx[k]]); });
  const double scale = std::pow(vs, gamma);
  rep.residualMin = term(0.0, vbar.valueAtOrigin);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    rep.residualMin = std::min(rep.residualMin, res[k]);
    double w = grid.weights[idx[k]], vg = std::pow(vbar.values[idx[k]], gamma);
    num += w * res[k] * res[k];
    den += w * vg * vg;
  }
  rep.residualMin /= scale;
  rep.residualRelL2 = std::sqrt(num / den);
  rep.residualOk = rep.residualMin >= -tol;

  FujitaConfig cfg;
  cfg.params.n = ctx.n();
  cfg.params.sigma = sigma;
  cfg.params.gamma = gamma;
  cfg.params.beta = (gamma - 1.0) * ls;
  cfg.params.lambda = lam0;
  cfg.horizon = horizon;
  cfg.initialData = vbar;
  cfg.initialData *= 0.5;
  rep.maxExcess = 0.0;
  rep.trace = run(ctx, cfg, [&](double t, const RadialFn& u) {
    double e = std::exp(-ls * t), ex = (u.valueAtOrigin - e * vbar.valueAtOrigin) / (e * vs);
    for (std::size_t i = 0; i < u.size(); ++i) ex = std::max(ex, (u.values[i] - e * vbar.values[i]) / (e * vs));
    rep.maxExcess = std::max(rep.maxExcess, ex);
  });
  rep.dominates = rep.maxExcess <= 1e-8 && rep.trace.verdict != Verdict::BlowUp;
  rep.certified = rep.residualOk && rep.dominates;
  return rep;
}

/** \brief v / max(1, ||v||_inf). */
inline RadialFn rescale_supersolution(const RadialFn& v) {
  RadialFn out = v;
  out *= 1.0 / std::max(1.0, v.sup());
  return out;
}

struct ScanRow {
  double beta = 0.0, gamma = 0.0, amplitude = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  double tStar = std::numeric_limits<double>::quiet_NaN();
  bool certifiedGlobal = false;
  bool certifiedBlowup = false;
};

/** \brief Independent runs over a (beta, gamma) grid with fixed data. */
inline std::vector<ScanRow> fujita_scan(const SpectralContext& ctx, const FujitaConfig& base,
                                        const std::vector<double>& betas, const std::vector<double>& gammas,
                                        double amplitude) {
  std::vector<ScanRow> rows(betas.size() * gammas.size());
  SupProfile prof = make_sup_profile(ctx, base.initialData, base.params.sigma);
  tbb::parallel_for(std::size_t(0), rows.size(), [&](std::size_t k) {
    FujitaConfig c = base;
    c.params.beta = betas[k / gammas.size()];
    c.params.gamma = gammas[k % gammas.size()];
    ScanRow& r = rows[k];
    r.beta = c.params.beta;
    r.gamma = c.params.gamma;
    r.amplitude = amplitude;
    SolutionTrace tr = run(ctx, c);
    r.verdict = tr.verdict;
    r.tStar = tr.tStar;
    r.certifiedGlobal = c.params.gamma > c.params.gammaStar() && weissler_certificate(ctx, c, &prof).certifiesGlobal;
    r.certifiedBlowup = c.params.gamma < c.params.gammaStar() && blowup_certificate(ctx, c).monotoneGrowth;
  });
  return rows;
}

struct FrontierReport {
  int maxCellDeviation = 0;
  std::vector<int> empiricalIndex, theoreticalIndex;
};

/**
 * \brief Per beta row: first gamma index with a GlobalWithinHorizon verdict
 * vs first index above gamma*. Inconclusive cells below it count as the
 * blow-up side; a BlowUp at or beyond it widens the deviation.
 */
inline FrontierReport frontier_deviation(const std::vector<ScanRow>& rows, const std::vector<double>& betas,
                                         const std::vector<double>& gammas, double lam0sigma) {
  FrontierReport rep;
  const int G = static_cast<int>(gammas.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    int emp = G, th = G;
    for (int g = 0; g < G; ++g)
      if (rows[b * G + g].verdict == Verdict::GlobalWithinHorizon) {
        emp = g;
        break;
      }
    for (int g = 0; g < G; ++g)
      if (gammas[g] > 1.0 + betas[b] / lam0sigma) {
        th = g;
        break;
      }
    int dev = std::abs(emp - th);
    for (int g = emp; g < G; ++g)
      if (rows[b * G + g].verdict == Verdict::BlowUp) dev = std::max(dev, std::abs(g + 1 - th));
    rep.empiricalIndex.push_back(emp);
    rep.theoreticalIndex.push_back(th);
    rep.maxCellDeviation = std::max(rep.maxCellDeviation, dev);
  }
  return rep;
}

}  // namespace hyplab

#endif  // HYPLAB_FUJITA_HPP
