// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance PATH_TO_HYPLAB_CLI

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <hyplab/elliptic.hpp>
#include <hyplab/fraclap.hpp>
#include <hyplab/fujita.hpp>
#include <hyplab/inequalities.hpp>
#include <hyplab/kernels.hpp>
#include <hyplab/spectral_core.hpp>
#include <hyplab/subordinator.hpp>

using namespace hyplab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

int failures = 0;

void criterion(int id, const char* name, double budgetSec, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budgetSec > 0.0 && sec > budgetSec) {
    o.pass = false;
    o.detail += "; over budget " + sci(budgetSec) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("%s %2d %-28s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), sec);
  std::fflush(stdout);
}

std::vector<double> log_grid(double a, double b, int m) {
  std::vector<double> out;
  for (int i = 0; i < m; ++i) out.push_back(a * std::pow(b / a, i / (m - 1.0)));
  return out;
}

double log_slope(const std::vector<double>& r, const std::vector<double>& ly) {
  std::vector<double> x;
  for (double v : r) x.push_back(std::log(v));
  return fit_slope(x, ly);
}

std::unique_ptr<SpectralContext> make_context(int n, const GridSpec& g = GridSpec()) {
  return std::make_unique<SpectralContext>(n, g, HYPLAB_TEST_CACHE);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  for (int n : {2, 3, 4}) {
    std::string name = "plancherel n=" + std::to_string(n);
    criterion(1, name.c_str(), 10.0, [n] {
      auto ctx = make_context(n);
      std::vector<RadialFn> fam{
          ctx->sample([](double r) { return std::exp(-r * r); }),
          ctx->sample([](double r) { return std::exp(-r * r / 4.0); }),
          ctx->sample([](double r) { return std::exp(-4.0 * (r - 3) * (r - 3)) * std::cos(2 * r); }),
          ctx->sample([](double r) { return r < 2.0 ? std::pow(1.0 - r * r / 4.0, 4) : 0.0; }),
      };
      double worst = 0.0;
      for (const auto& f : fam) worst = std::max({worst, round_trip_error(*ctx, f), plancherel_check(*ctx, f).relError});
      return Outcome{worst < 1e-6, "max rel error " + sci(worst)};
    });
  }

  criterion(2, "eigenrelation n=3", 60.0, [] {
    auto ctx = make_context(3);
    std::vector<double> rs{0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
    std::vector<RadialFn> fam{ctx->sample([](double r) { return std::exp(-r * r); }),
                              ctx->sample([](double r) { return (1.0 + r * r) * std::exp(-r * r); })};
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75})
      for (const auto& f : fam) worst = std::max(worst, cross_validate_laplacian(*ctx, f, s, rs, 1e-3, false).maxRelDev);
    return Outcome{worst < 1e-3, "max rel deviation " + sci(worst)};
  });

  criterion(3, "kernel masses", 0.0, [] {
    double worst = 0.0;
    for (int n : {2, 3})
      for (double t : {0.1, 1.0, 10.0}) {
        worst = std::max(worst, std::abs(heat_mass(n, t) - 1.0));
        for (double s : {0.25, 0.5, 0.75}) worst = std::max(worst, std::abs(frac_heat_mass(n, s, t) - 1.0));
      }
    return Outcome{worst < 1e-6, "n in {2,3}, max |mass - 1| " + sci(worst)};
  });

  criterion(4, "estimate slopes n=3", 0.0, [] {
    auto ctx = make_context(3);
    const int n = 3;
    double worst = 0.0;
    std::string where;
    auto track = [&](double measured, double predicted, const std::string& tag) {
      double dev = std::abs(measured / predicted - 1.0);
      if (dev > worst) {
        worst = dev;
        where = tag;
      }
    };
    auto small = log_grid(1e-3, 1e-1, 12);
    for (double s : {0.25, 0.5, 0.75}) {
      std::string ss = " sigma=" + sci(s);
      track(log_slope(small, p0_log_values(n, s, small)), -(n + 2.0 * s), "P0 small r" + ss);
      ResolventKernel K(*ctx, 0.25 * (n - 1) * (n - 1), s);
      auto rs = log_grid(1e-3, 1e-2, 8);
      auto v = K.short_part(rs);
      std::vector<double> lv;
      for (double x : v) lv.push_back(std::log(x));
      track(log_slope(rs, lv), -(n - 2.0 * s), "k small r" + ss);
      std::vector<double> ts;
      for (double t = 5.0; t <= 50.0; t += 5.0) ts.push_back(t);
      auto sn = sup_norm_decay(*ctx, s, ts);
      track(sn.measuredSlope, sn.predictedSlope, "sup norm" + ss);
    }
    for (const auto& r : validate_frac_heat_estimates(n, 0.5, default_estimate_samples(0.5)))
      if (r.regime == "far_field") track(r.measuredSlope, r.predictedSlope, "far field sigma=0.5");
    return Outcome{worst < 0.05, "worst relative slope error " + sci(worst) + " (" + where + ")"};
  });

  criterion(5, "subordinator", 0.0, [] {
    Subordinator S(0.5);
    double dev = 0.0;
    for (double ls = -6.0; ls < 8.0; ls += 0.1)
      for (double t : {0.5, 2.0}) {
        double s = std::exp(ls), b = Subordinator::density_half(t, s);
        if (b > 1e-300) dev = std::max(dev, std::abs(S.density(t, s) - b) / b);
      }
    double mass = 0.0;
    const std::pair<double, double> pairs[] = {{0.3, 0.5}, {0.5, 2.0}, {0.8, 1.0}};
    for (auto [s, t] : pairs) mass = std::max(mass, std::abs(subordinator_mass(Subordinator(s), t).total - 1.0));
    return Outcome{dev < 1e-6 && mass < 1e-8, "closed form " + sci(dev) + ", mass " + sci(mass)};
  });

  criterion(6, "fujita 6x6 scan", 1800.0, [] {
    auto ctx = make_context(3);
    FujitaConfig c;
    c.params.n = 3;
    c.params.sigma = 0.5;
    c.initialData = ctx->sample([](double r) { return 0.5 * std::exp(-r * r); });
    c.horizon = 30.0;
    std::vector<double> B{0.5, 0.8, 1.1, 1.4, 1.7, 2.0}, G{1.35, 1.65, 1.95, 2.25, 2.55, 2.85};
    auto rows = fujita_scan(*ctx, c, B, G, 0.5);
    auto fr = frontier_deviation(rows, B, G, 1.0);
    int uncertified = 0;
    for (const auto& r : rows)
      if (r.gamma < 1.0 + r.beta && !r.certifiedBlowup) ++uncertified;
    return Outcome{fr.maxCellDeviation <= 1 && uncertified == 0,
                   "max cell deviation " + std::to_string(fr.maxCellDeviation) + ", uncertified blowup cells " +
                       std::to_string(uncertified)};
  });

  ModelParams gsp;
  gsp.n = 3;
  gsp.sigma = 0.5;
  gsp.lambda = 1.0;
  gsp.gamma = 1.5;
  auto ctx3 = make_context(3);
  std::unique_ptr<GroundState> fp, pg;

  criterion(7, "critical bridge", 0.0, [&] {
    fp = std::make_unique<GroundState>(solve_ground_state(*ctx3, gsp, SolveMethod::ResolventFixedPoint));
    RadialFn v = fp->u;
    for (double& x : v.values) x = std::max(x, 0.0);  // roundoff below the spectral floor
    auto rep = supersolution_check(*ctx3, v, 0.5, 1.5, 10.0);
    return Outcome{rep.certified, "residual min " + sci(rep.residualMin) + ", max excess " + sci(rep.maxExcess)};
  });

  criterion(8, "ground state quality", 0.0, [&] {
    if (!fp) fp = std::make_unique<GroundState>(solve_ground_state(*ctx3, gsp, SolveMethod::ResolventFixedPoint));
    pg = std::make_unique<GroundState>(solve_ground_state(*ctx3, gsp, SolveMethod::ProjectedGradient));
    double res = std::max(fp->residualRel, pg->residualRel);
    double neh = std::max(fp->diagnostics.nehariDefect, pg->diagnostics.nehariDefect);
    double fpd = std::max(verify_structure(*ctx3, *fp).fixedPointDefect, verify_structure(*ctx3, *pg).fixedPointDefect);
    double agree = std::abs(pg->energyJ / fp->energyJ - 1.0);
    auto ctxR = make_context(3, GridSpec().refined());
    double refine = std::abs(solve_ground_state(*ctxR, gsp, SolveMethod::ResolventFixedPoint).energyJ / fp->energyJ - 1.0);
    ModelParams p0 = gsp;
    p0.lambda = 0.0;
    EllipticProblem P(*ctx3, p0);
    auto u = P.nehari_project(unit_mass_seed(ctx3->radial())).u;
    auto dir = ctx3->sample([](double r) { return 0.7 * std::exp(-0.8 * r * r) * std::cos(1.5 * r); });
    double order = gradient_check(P, u, dir).order;
    bool ok = res < 1e-3 && neh < 1e-8 && fpd < 1e-2 && agree < 0.01 && refine < 0.02 && std::abs(order - 2.0) <= 0.2;
    return Outcome{ok, "residual " + sci(res) + ", nehari " + sci(neh) + ", fixed point " + sci(fpd) + ", J methods " +
                           sci(agree) + ", J refine " + sci(refine) + ", gradient order " + sci(order)};
  });

  criterion(9, "poincare n=3 sigma=1/2", 0.0, [] {
    auto ctx = make_context(3);
    auto ctxR = make_context(3, GridSpec().refined());
    auto fam = standard_test_family(*ctx), famR = standard_test_family(*ctxR);
    double minQ = 1e300, drift = 0.0, minRatio = 1e300;
    for (double q : {2.2, 2.6, 3.0}) {
      auto a = estimate_best_constant(*ctx, fam, q, 0.5, 1.0);
      auto b = estimate_best_constant(*ctxR, famR, q, 0.5, 1.0);
      minQ = std::min(minQ, a.minQuotient);
      drift = std::max(drift, std::abs(b.minQuotient / a.minQuotient - 1.0));
    }
    for (const auto& f : fam.members) minRatio = std::min(minRatio, compare_shift_orders(*ctx, f, 0.5).ratio);
    return Outcome{minQ > 0.0 && drift < 0.05 && minRatio >= 1.0 - 1e-10,
                   "min quotient " + sci(minQ) + ", refinement drift " + sci(drift) + ", min shift ratio " +
                       std::to_string(minRatio)};
  });

  criterion(10, "cli determinism", 0.0, [&] {
    if (cli.empty()) return Outcome{false, "no CLI path given"};
    fs::path work = fs::temp_directory_path() / ("hyplab_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);
    {
      std::ofstream c(work / "poincare.ini");
      c << "[model]\nn = 3\nsigma = 0.5\n[grids]\npreset = coarse\n[experiment]\nq = 2.2, 2.6, 3.0\n";
      std::ofstream f(work / "fujita.ini");
      f << "[model]\nn = 3\nsigma = 0.5\nbeta = 1\ngamma = 1.5\n[grids]\npreset = coarse\n"
           "[experiment]\nmode = single\namplitude = 1\nhorizon = 20\n";
    }
    std::size_t files = 0;
    for (const char* sub : {"poincare", "fujita"})
      for (const char* pass : {"a", "b"}) {
        std::string cmd = "\"" + cli + "\" --config \"" + (work / (std::string(sub) + ".ini")).string() + "\" --out \"" +
                          (work / pass / sub).string() + "\" --cache \"" HYPLAB_TEST_CACHE "\" --seed 11 " + sub +
                          " >/dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) return Outcome{false, std::string(sub) + " run failed"};
      }
    for (const char* sub : {"poincare", "fujita"})
      for (const auto& e : fs::directory_iterator(work / "a" / sub)) {
        ++files;
        if (slurp(e.path()) != slurp(work / "b" / sub / e.path().filename()))
          return Outcome{false, e.path().filename().string() + " differs"};
      }
    fs::remove_all(work);
    return Outcome{files > 0, std::to_string(files) + " files byte-identical across two runs"};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
