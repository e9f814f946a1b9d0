// hyplab command-line front end. Exit codes are listed in README.md and in
// the ExitCode enum below.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <tbb/global_control.h>

#include <hyplab/elliptic.hpp>
#include <hyplab/fraclap.hpp>
#include <hyplab/fujita.hpp>
#include <hyplab/inequalities.hpp>
#include <hyplab/io.hpp>
#include <hyplab/kernels.hpp>
#include <hyplab/spectral_core.hpp>

using namespace hyplab;
namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kRange = 3,
  kMissingCache = 4,
  kNumeric = 5,
  kDegenerate = 6,
  kStructural = 7,
  kOutput = 8,
};

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config, out = ".", cache;
  int threads = 0;
  std::uint64_t seed = 1;
};

struct Run {
  RunConfig cfg;
  Common opt;
  std::uint64_t hash = 0;

  std::string cache_dir() const { return opt.cache.empty() ? cfg.get<std::string>("output.cache", "") : opt.cache; }

  std::unique_ptr<SpectralContext> context(int n) const {
    return std::make_unique<SpectralContext>(n, cfg.grids(), cache_dir());
  }
  std::ofstream open(const std::string& name) const {
    std::ofstream f(fs::path(opt.out) / name, std::ios::binary);
    if (!f) throw OutputError("cannot open " + (fs::path(opt.out) / name).string());
    return f;
  }
  std::string header() const { return provenance_header(hash, opt.seed); }
};

namespace {

RadialFn named_function(std::shared_ptr<const RadialGrid> g, const std::string& name, double width) {
  if (!(width > 0.0)) throw DomainError("experiment.width must be > 0");
  if (name == "zero") return RadialFn(g);
  if (name == "gauss") return RadialFn::sample(g, [&](double r) { return std::exp(-r * r / (width * width)); });
  if (name == "bump")
    return RadialFn::sample(g, [&](double r) {
      double x = 1.0 - (r / width) * (r / width);
      return x > 0.0 ? x * x * x : 0.0;
    });
  if (name == "exp")
    return RadialFn::sample(g, [&](double r) { return std::exp(-((g->n - 1) * 0.5 + 1.0) * r / width); });
  if (name == "osc")
    return RadialFn::sample(g, [&](double r) { return std::cos(4.0 * r / width) * std::exp(-r * r / (width * width)); });
  throw DomainError("experiment.function must be one of zero, gauss, bump, exp, osc");
}

int cmd_transform(const Run& run) {
  ModelParams p = run.cfg.model();
  auto ctx = run.context(p.n);
  std::string name = run.cfg.get<std::string>("experiment.function", "gauss");
  double width = run.cfg.get<double>("experiment.width", 1.0);
  RadialFn f = named_function(ctx->radial(), name, width);
  PlancherelReport pr = plancherel_check(*ctx, f);
  auto os = run.open("transform.csv");
  CsvWriter w(os, {"n", "function", "width", "roundTripError", "realL2", "spectralL2", "relError"}, run.hash,
              run.opt.seed);
  w.cell(static_cast<long long>(p.n)).cell(name).cell(width).cell(round_trip_error(*ctx, f)).cell(pr.realL2)
      .cell(pr.spectralL2).cell(pr.relError);
  w.end_row();
  return kOk;
}

int cmd_kernels(const Run& run) {
  ModelParams p = run.cfg.model();
  auto ctx = run.context(p.n);
  auto times = run.cfg.get_list("experiment.times", {0.1, 1.0, 10.0});
  {
    auto os = run.open("kernel_masses.csv");
    CsvWriter w(os, {"kind", "t", "sigma", "mass"}, run.hash, run.opt.seed);
    for (double t : times) {
      if (!(t > 0.0)) throw DomainError("experiment.times must be > 0");
      // masses need the exact kernel; other dimensions get the estimate rows only
      if (!has_exact_heat(p.n)) continue;
      w.cell("heat").cell(t).cell(1.0).cell(heat_mass(p.n, t));
      w.end_row();
      w.cell("frac_heat").cell(t).cell(p.sigma).cell(frac_heat_mass(p.n, p.sigma, t));
      w.end_row();
    }
  }
  std::vector<EstimateReport> reps;
  if (has_exact_heat(p.n)) reps = validate_frac_heat_estimates(p.n, p.sigma, default_estimate_samples(p.sigma));
  reps.push_back(sup_norm_decay(*ctx, p.sigma, {10.0, 15.0, 20.0, 25.0, 30.0}));
  auto os = run.open("estimates.csv");
  os << run.header();
  write_estimate_csv(os, reps);
  return kOk;
}

void write_trace_jsonl(std::ostream& os, const Run& run, const SolutionTrace& tr) {
  std::string h = provenance_header(run.hash, run.opt.seed, "");
  h.pop_back();
  os << "{\"header\":\"" << h << "\"}\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    os << "{\"time\":" << fmt17(tr.times[i]) << ",\"supNorm\":" << fmt17(tr.supNorm[i]) << ",\"l2\":" << fmt17(tr.l2[i]);
    for (const auto& [q, v] : tr.lqNorms)
      if (q != 2.0) os << ",\"l" << fmt17(q) << "\":" << fmt17(v[i]);
    os << "}\n";
  }
}

void scan_row(CsvWriter& w, const ScanRow& r) {
  w.cell(r.beta).cell(r.gamma).cell(r.amplitude).cell(verdict_name(r.verdict)).cell(r.tStar)
      .cell(static_cast<long long>(r.certifiedGlobal)).cell(static_cast<long long>(r.certifiedBlowup));
  w.end_row();
}

const std::vector<std::string> kScanColumns{"beta",     "gamma",          "amplitude",      "verdict",
                                            "tStar",    "certifiedGlobal", "certifiedBlowup"};

int cmd_fujita(const Run& run) {
  ModelParams p = run.cfg.model();
  auto ctx = run.context(p.n);
  double amp = run.cfg.get<double>("experiment.amplitude", 0.5);
  double width = run.cfg.get<double>("experiment.width", 1.0);
  if (!(amp >= 0.0)) throw DomainError("experiment.amplitude must be >= 0");
  FujitaConfig base;
  base.params = p;
  base.initialData = named_function(ctx->radial(), run.cfg.get<std::string>("experiment.function", "gauss"), width);
  base.initialData *= amp;
  base.horizon = run.cfg.get<double>("experiment.horizon", 30.0);
  base.blowUpThreshold = run.cfg.get<double>("experiment.threshold", 1e6);
  base.step.dt0 = run.cfg.get<double>("experiment.dt", base.step.dt0);
  base.validate();
  std::string mode = run.cfg.get<std::string>("experiment.mode", "single");
  const double ls = std::pow(p.lambda0(), p.sigma);
  if (mode == "single") {
    SolutionTrace tr = hyplab::run(*ctx, base);
    ScanRow r{p.beta, p.gamma, amp, tr.verdict, tr.tStar, false, false};
    if (p.gamma > p.gammaStar()) r.certifiedGlobal = weissler_certificate(*ctx, base).certifiesGlobal;
    if (p.gamma < p.gammaStar()) r.certifiedBlowup = blowup_certificate(*ctx, base).monotoneGrowth;
    auto os = run.open("frontier.csv");
    CsvWriter w(os, kScanColumns, run.hash, run.opt.seed);
    scan_row(w, r);
    auto ts = run.open("trace.jsonl");
    write_trace_jsonl(ts, run, tr);
    return kOk;
  }
  if (mode != "scan") throw DomainError("experiment.mode must be single or scan");
  auto betas = run.cfg.get_list("experiment.betas", {0.5, 0.8, 1.1, 1.4, 1.7, 2.0});
  auto gammas = run.cfg.get_list("experiment.gammas", {1.35, 1.65, 1.95, 2.25, 2.55, 2.85});
  for (double b : betas)
    if (!(b > 0.0)) throw DomainError("experiment.betas must be > 0");
  for (double g : gammas)
    if (!(g > 1.0)) throw DomainError("experiment.gammas must be > 1");
  auto rows = fujita_scan(*ctx, base, betas, gammas, amp);
  {
    auto os = run.open("frontier.csv");
    CsvWriter w(os, kScanColumns, run.hash, run.opt.seed);
    for (const auto& r : rows) scan_row(w, r);
  }
  FrontierReport fr = frontier_deviation(rows, betas, gammas, ls);
  auto os = run.open("frontier_summary.csv");
  CsvWriter w(os, {"beta", "empiricalIndex", "theoreticalIndex"}, run.hash, run.opt.seed);
  for (std::size_t b = 0; b < betas.size(); ++b) {
    w.cell(betas[b]).cell(static_cast<long long>(fr.empiricalIndex[b])).cell(static_cast<long long>(fr.theoreticalIndex[b]));
    w.end_row();
  }
  w.cell("maxCellDeviation").cell(static_cast<long long>(fr.maxCellDeviation)).cell("");
  w.end_row();
  return kOk;
}

int cmd_groundstate(const Run& run) {
  ModelParams p = run.cfg.model();
  auto ctx = run.context(p.n);
  EllipticProblem P(*ctx, p);
  std::string m = run.cfg.get<std::string>("experiment.method", "both");
  std::vector<SolveMethod> methods;
  if (m == "pg" || m == "both") methods.push_back(SolveMethod::ProjectedGradient);
  if (m == "fp" || m == "both") methods.push_back(SolveMethod::ResolventFixedPoint);
  if (methods.empty()) throw DomainError("experiment.method must be pg, fp or both");
  SolveOptions opt;
  opt.maxIter = run.cfg.get<int>("experiment.maxIter", opt.maxIter);
  opt.gradTol = run.cfg.get<double>("experiment.gradTol", opt.gradTol);
  auto os = run.open("groundstate.csv");
  CsvWriter w(os,
              {"method", "iterations", "converged", "energyJ", "quotientI", "residualRel", "nehariDefect",
               "fixedPointDefect", "decaySlope", "supNorm"},
              run.hash, run.opt.seed);
  std::optional<GroundState> first;
  for (SolveMethod sm : methods) {
    GroundState gs = P.solve(sm, unit_mass_seed(ctx->radial()), opt);
    StructureReport st = verify_structure(*ctx, gs);
    gs.diagnostics.fixedPointDefect = st.fixedPointDefect;
    gs.diagnostics.decaySlope = st.decaySlope;
    w.cell(gs.method).cell(static_cast<long long>(gs.iterations)).cell(static_cast<long long>(gs.converged))
        .cell(gs.energyJ).cell(gs.quotientI).cell(gs.residualRel).cell(gs.diagnostics.nehariDefect)
        .cell(st.fixedPointDefect).cell(st.decaySlope).cell(st.supNorm);
    w.end_row();
    if (!first) first = gs;
  }
  nlohmann::json j = to_json(*first, *ctx->radial());
  j["provenance"] = {{"tool", std::string("hyplab ") + kVersion}, {"config", hex64(run.hash)}, {"seed", run.opt.seed}};
  auto js = run.open("groundstate.json");
  js << j.dump() << "\n";
  return kOk;
}

int cmd_poincare(const Run& run) {
  ModelParams p = run.cfg.model();
  auto ctx = run.context(p.n);
  double lambda = run.cfg.get<double>("experiment.lambda", p.lambda0());
  auto qs = run.cfg.get_list("experiment.q", {2.2, 2.6, 3.0});
  TestFamily fam = standard_test_family(*ctx, run.opt.seed);
  auto samples = family_quotients(*ctx, fam, qs, p.sigma, lambda);
  {
    auto os = run.open("quotients.csv");
    write_quotient_csv(os, fam, samples, run.hash, run.opt.seed);
  }
  {
    auto os = run.open("shift_orders.csv");
    CsvWriter w(os, {"fnId", "fracShiftNorm", "powerShiftNorm", "ratio"}, run.hash, run.opt.seed);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      ShiftOrderReport r = compare_shift_orders(*ctx, fam.members[i], p.sigma);
      w.cell(fam.ids[i]).cell(r.fracShiftNorm).cell(r.powerShiftNorm).cell(r.ratio);
      w.end_row();
    }
  }
  auto os = run.open("concentration.csv");
  CsvWriter w(os, {"t", "reverseRatio"}, run.hash, run.opt.seed);
  for (double t : {1.0, 4.0, 16.0, 64.0, 256.0}) {
    w.cell(t).cell(compare_shift_orders(*ctx, heat_spectrum(*ctx, t), p.sigma).reverseRatio);
    w.end_row();
  }
  return kOk;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    std::cerr << "hyplab: invalid range: " << e.what() << "\n";
    return kRange;
  } catch (const DegenerateInputError& e) {
    std::cerr << "hyplab: degenerate input: " << e.what() << "\n";
    return kDegenerate;
  } catch (const StructuralError& e) {
    std::cerr << "hyplab: structural error: " << e.what() << "\n";
    return kStructural;
  } catch (const NumericError& e) {
    std::cerr << "hyplab: numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ResolutionError& e) {
    std::cerr << "hyplab: numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ConsistencyError& e) {
    std::cerr << "hyplab: numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const OutputError& e) {
    std::cerr << "hyplab: output: " << e.what() << "\n";
    return kOutput;
  } catch (const std::exception& e) {
    std::cerr << "hyplab: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyplab: radial fractional heat flow and semilinear elliptic problems on hyperbolic space"};
  app.set_version_flag("--version", std::string("hyplab ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Common opt;
  app.add_option("--config", opt.config, "configuration file ([section] key = value)")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "output directory (created if absent)");
  app.add_option("--threads", opt.threads, "worker threads, 0 = all")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opt.seed, "seed for randomized families, recorded in every header");
  app.add_option("--cache", opt.cache, "existing directory for spherical-function tables");

  using Cmd = int (*)(const Run&);
  std::vector<std::pair<CLI::App*, Cmd>> cmds{
      {app.add_subcommand("transform", "round trip and Plancherel check of a named function"), cmd_transform},
      {app.add_subcommand("kernels", "kernel masses and estimate slopes"), cmd_kernels},
      {app.add_subcommand("fujita", "single evolution or (beta, gamma) scan"), cmd_fujita},
      {app.add_subcommand("groundstate", "ground state solve, structure check, JSON"), cmd_groundstate},
      {app.add_subcommand("poincare", "quotients over the test family and norm comparisons"), cmd_poincare},
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  return guarded([&] {
    Run run;
    run.opt = opt;
    if (!opt.config.empty()) run.cfg = RunConfig::from_file(opt.config);
    if (std::string cd = run.cache_dir(); !cd.empty() && !fs::is_directory(cd)) {
      std::cerr << "hyplab: missing cache directory: " << cd << "\n";
      return static_cast<int>(kMissingCache);
    }
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (!fs::is_directory(opt.out)) throw OutputError("cannot create output directory " + opt.out);
    run.hash = run.cfg.hash();
    std::optional<tbb::global_control> gc;
    if (opt.threads > 0) gc.emplace(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(opt.threads));
    for (auto& [sub, fn] : cmds)
      if (sub->parsed()) return fn(run);
    return static_cast<int>(kUsage);
  });
}
