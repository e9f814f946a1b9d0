#ifndef HYPLAB_SPECTRAL_CORE_HPP
#define HYPLAB_SPECTRAL_CORE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <boost/crc.hpp>
#include <boost/endian/conversion.hpp>
#include <boost/numeric/odeint.hpp>
#include <tbb/parallel_for.h>

#include "params.hpp"
#include "quadrature.hpp"

namespace hyplab {

/** \brief Panel layout for the radial and frequency grids. */
struct GridSpec {
  double rMax = 40.0;
  double rPanel = 0.5;
  int rNodes = 20;
  int rGraded = 6;
  double xiMax = 60.0;
  double xiPanel = 0.5;
  int xiNodes = 20;
  int xiGraded = 6;

  /** \brief Light grid for long evolutions of smooth data. */
  static GridSpec coarse() {
    GridSpec g;
    g.rMax = 30.0;
    g.rNodes = 12;
    g.xiMax = 20.0;
    g.xiNodes = 20;
    return g;
  }
  /** \brief Every panel split in two, xiMax and rMax raised by 25%. */
  GridSpec refined() const {
    GridSpec g = *this;
    g.rMax *= 1.25;
    g.xiMax *= 1.25;
    g.rPanel *= 0.5;
    g.xiPanel *= 0.5;
    return g;
  }
};

using Crc64 = boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, ~0ULL, ~0ULL, true, true>;

inline std::uint64_t hash_doubles(const std::vector<double>& v, std::uint64_t seed = 0) {
  Crc64 crc;
  crc.process_bytes(&seed, sizeof seed);
  for (double d : v) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    boost::endian::native_to_little_inplace(u);
    crc.process_bytes(&u, 8);
  }
  return crc.checksum();
}

/** \brief Radial quadrature grid with weights c_n sinh^{n-1}(r) dr. */
struct RadialGrid {
  int n = 3;
  double rMax = 0.0;
  std::vector<double> nodes;
  std::vector<double> dr;
  std::vector<double> weights;
  PanelInterpolant interp;

  RadialGrid(int dim, double Rmax, double panel, int m, int graded) : n(dim), rMax(Rmax) {
    auto br = graded_breaks(Rmax, panel, graded);
    Rule q = composite_rule(br, m);
    nodes = q.x;
    dr = q.w;
    double cn = sphere_area(n);
    weights.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      weights[i] = cn * std::exp((n - 1) * log_sinh(nodes[i])) * dr[i];
    interp = PanelInterpolant(br, m);
  }
  std::size_t size() const { return nodes.size(); }
  std::uint64_t hash() const {
    std::vector<double> key = interp.breaks();
    key.push_back(interp.order());
    return hash_doubles(key, static_cast<std::uint64_t>(n));
  }
};

/** \brief |Gamma(i xi + rho)|^2 / |Gamma(i xi)|^2, rho = (n-1)/2. */
inline double plancherel_density(int n, double xi) {
  if (!(xi >= 0.0)) throw DomainError("plancherel_density: xi must be >= 0");
  if (n % 2 == 1) {
    int m = (n - 1) / 2;
    double p = 1.0;
    for (int k = 0; k < m; ++k) p *= xi * xi + double(k) * k;
    return p;
  }
  int m = (n - 2) / 2;
  double p = xi * std::tanh(M_PI * xi);
  for (int k = 0; k < m; ++k) p *= xi * xi + (k + 0.5) * (k + 0.5);
  return p;
}
inline double plancherel_density(const ModelParams& p, double xi) { return plancherel_density(p.n, xi); }

/** \brief Frequency grid; weights carry the density and the inversion constant. */
struct SpectralGrid {
  int n = 3;
  double xiMax = 0.0;
  std::vector<double> nodes;
  std::vector<double> dxi;
  std::vector<double> density;
  std::vector<double> weights;
  double inversionConstant = 1.0;

  SpectralGrid(int dim, double Xmax, double panel, int m, int graded) : n(dim), xiMax(Xmax) {
    Rule q = composite_rule(graded_breaks(Xmax, panel, graded), m);
    nodes = q.x;
    dxi = q.w;
    density.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) density[j] = plancherel_density(n, nodes[j]);
    set_constant(1.0);
  }
  void set_constant(double K) {
    inversionConstant = K;
    weights.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) weights[j] = K * density[j] * dxi[j];
  }
  std::size_t size() const { return nodes.size(); }
  std::uint64_t hash() const {
    std::vector<double> key = nodes;
    key.push_back(xiMax);
    return hash_doubles(key, static_cast<std::uint64_t>(n) + 1000);
  }
};

/** \brief Radial samples; r = 0 is carried separately. */
struct RadialFn {
  std::shared_ptr<const RadialGrid> grid;
  std::vector<double> values;
  double valueAtOrigin = 0.0;

  RadialFn() = default;
  explicit RadialFn(std::shared_ptr<const RadialGrid> g) : grid(std::move(g)), values(grid->size(), 0.0) {}

  template <class F>
  static RadialFn sample(std::shared_ptr<const RadialGrid> g, F&& f) {
    RadialFn out(g);
    for (std::size_t i = 0; i < g->size(); ++i) out.values[i] = f(g->nodes[i]);
    out.valueAtOrigin = f(0.0);
    return out;
  }
  std::size_t size() const { return values.size(); }
  /** \brief Panel interpolant; zero beyond rMax. */
  double operator()(double r) const {
    if (r > grid->rMax) return 0.0;
    double f;
    grid->interp.eval(values.data(), r, f);
    return f;
  }
  void derivatives(double r, double& f, double& df, double& d2f) const {
    if (r > grid->rMax) {
      f = df = d2f = 0.0;
      return;
    }
    grid->interp.eval(values.data(), r, f, &df, &d2f);
  }
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += grid->weights[i] * values[i];
    return s;
  }
  double lp_norm_pow(double p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += grid->weights[i] * std::pow(std::abs(values[i]), p);
    return s;
  }
  double l2() const { return std::sqrt(lp_norm_pow(2.0)); }
  double sup() const {
    double m = std::abs(valueAtOrigin);
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  RadialFn& operator*=(double c) {
    for (double& v : values) v *= c;
    valueAtOrigin *= c;
    return *this;
  }
  RadialFn& axpy(double a, const RadialFn& x) {
    for (std::size_t i = 0; i < size(); ++i) values[i] += a * x.values[i];
    valueAtOrigin += a * x.valueAtOrigin;
    return *this;
  }
};

inline RadialFn operator*(double c, RadialFn f) { return f *= c; }
inline RadialFn operator+(RadialFn a, const RadialFn& b) { return a.axpy(1.0, b); }
inline RadialFn operator-(RadialFn a, const RadialFn& b) { return a.axpy(-1.0, b); }

/** \brief Samples of an even spectral function on xi >= 0. */
struct SpectralFn {
  std::shared_ptr<const SpectralGrid> grid;
  std::vector<double> values;
  bool truncationWarning = false;
  double tailMass = 0.0;

  SpectralFn() = default;
  explicit SpectralFn(std::shared_ptr<const SpectralGrid> g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  std::size_t size() const { return values.size(); }
};

struct SphericalValue {
  double value = 0.0;
  bool underflow = false;
};

namespace detail {

/** \brief Integrates u = sinh^rho(r) phi(r) and returns phi on sorted radii. */
inline std::vector<double> spherical_profile(int n, double xi, const std::vector<double>& radii, double tol = 1e-12) {
  const double rho = 0.5 * (n - 1);
  const double lam = xi * xi + rho * rho;
  const double V0 = rho * (rho - 1.0);
  std::vector<double> out(radii.size(), 0.0);
  double rs = std::min(0.05, std::sqrt(1e-3 / std::max(lam, 1.0)));
  const double a = -lam / (2.0 * n);
  const double b = -a * (lam + 2.0 * (n - 1) / 3.0) / (4.0 * (n + 2.0));
  auto series = [&](double r) { double r2 = r * r; return 1.0 + a * r2 + b * r2 * r2; };
  auto dseries = [&](double r) { return 2.0 * a * r + 4.0 * b * r * r * r; };

  std::size_t i = 0;
  for (; i < radii.size() && radii[i] <= rs; ++i) out[i] = series(radii[i]);
  if (i == radii.size()) return out;

  double ra = rs;
  if (V0 != 0.0) ra = std::max(rs, 0.5 * std::log(4.0 * std::abs(V0) * 1e17));

  using State = std::array<double, 2>;
  double sh = std::sinh(rs);
  State u{std::pow(sh, rho) * series(rs),
          rho * std::cosh(rs) * std::pow(sh, rho - 1.0) * series(rs) + std::pow(sh, rho) * dseries(rs)};
  auto rhs = [&](const State& s, State& ds, double r) {
    double shr = std::sinh(r);
    ds[0] = s[1];
    ds[1] = (V0 / (shr * shr) - xi * xi) * s[0];
  };
  auto to_phi = [&](double uval, double r) { return uval * std::exp(-rho * log_sinh(r)); };

  double rcur = rs;
  if (ra > rs) {
    namespace oi = boost::numeric::odeint;
    auto stepper = oi::make_controlled(tol, tol, oi::runge_kutta_fehlberg78<State>());
    std::vector<double> times{rs};
    std::size_t j = i;
    for (; j < radii.size() && radii[j] <= ra; ++j) times.push_back(radii[j]);
    if (times.back() < ra) times.push_back(ra);
    std::size_t k = i;
    double h0 = std::min(1e-2, rs);
    oi::integrate_times(stepper, rhs, u, times.begin(), times.end(), h0,
                        [&](const State& s, double r) {
                          if (k < j && r == radii[k]) {
                            out[k] = to_phi(s[0], r);
                            ++k;
                          }
                        });
    i = j;
    rcur = ra;
  }
  // the potential is below roundoff here: exact free solution
  for (; i < radii.size(); ++i) {
    double r = radii[i], d = r - rcur;
    double uv = (xi > 0.0) ? u[0] * std::cos(xi * d) + u[1] * std::sin(xi * d) / xi : u[0] + u[1] * d;
    double ls = rho * log_sinh(r);
    out[i] = (ls > 700.0) ? 0.0 : uv * std::exp(-ls);
  }
  return out;
}

}  // namespace detail

/** \brief phi_xi(r) from the series start and the eigen-ODE. */
inline SphericalValue spherical_function(const ModelParams& p, double xi, double r) {
  if (!(r >= 0.0)) throw DomainError("spherical_function: r must be >= 0");
  xi = std::abs(xi);
  SphericalValue v;
  if (r == 0.0) {
    v.value = 1.0;
    return v;
  }
  v.value = detail::spherical_profile(p.n, xi, {r})[0];
  v.underflow = (p.rho() * log_sinh(r) > 700.0);
  return v;
}

/**
 * \brief Grids, spherical-function table and the frozen inversion constant.
 * Immutable after construction.
 */
class SpectralContext {
 public:
  SpectralContext(int n, const GridSpec& spec = GridSpec(), const std::string& cacheDir = "")
      : n_(n), spec_(spec) {
    radial_ = std::make_shared<RadialGrid>(n, spec.rMax, spec.rPanel, spec.rNodes, spec.rGraded);
    spectral_ = std::make_shared<SpectralGrid>(n, spec.xiMax, spec.xiPanel, spec.xiNodes, spec.xiGraded);
    bool loaded = !cacheDir.empty() && load_cache(cache_path(cacheDir));
    if (!loaded) {
      build_table();
      if (!cacheDir.empty()) save_cache(cache_path(cacheDir));
    }
    cacheHit_ = loaded;
    normalize();
  }

  int n() const { return n_; }
  const GridSpec& spec() const { return spec_; }
  std::shared_ptr<const RadialGrid> radial() const { return radial_; }
  std::shared_ptr<const SpectralGrid> spectral() const { return spectral_; }
  const std::vector<double>& table() const { return table_; }
  double phi(std::size_t j, std::size_t i) const { return table_[j * radial_->size() + i]; }
  bool cache_hit() const { return cacheHit_; }

  std::string cache_path(const std::string& dir) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "/sph_n%d_%016llx_%016llx.bin", n_, (unsigned long long)radial_->hash(),
                  (unsigned long long)spectral_->hash());
    return dir + buf;
  }

  /** \brief H f(xi) = int f phi_xi dmu. */
  SpectralFn forward(const RadialFn& f) const {
    SpectralFn F(spectral_);
    const std::size_t nr = radial_->size();
    std::vector<double> g(nr);
    for (std::size_t i = 0; i < nr; ++i) g[i] = radial_->weights[i] * f.values[i];
    tbb::parallel_for(std::size_t(0), spectral_->size(), [&](std::size_t j) {
      const double* row = &table_[j * nr];
      double s = 0.0;
      for (std::size_t i = 0; i < nr; ++i) s += row[i] * g[i];
      F.values[j] = s;
    });
    double total = 0.0, tail = 0.0;
    std::size_t m = static_cast<std::size_t>(spec_.rNodes);
    for (std::size_t i = 0; i < nr; ++i) {
      total += std::abs(g[i]);
      if (i + m >= nr) tail += std::abs(g[i]);
    }
    F.tailMass = total > 0.0 ? tail / total : 0.0;
    F.truncationWarning = F.tailMass > 1e-10;
    return F;
  }

  /** \brief f(r) = K int F phi_xi(r) |c(xi)|^{-2} dxi. */
  RadialFn inverse(const SpectralFn& F) const {
    RadialFn f(radial_);
    const std::size_t nr = radial_->size(), nx = spectral_->size();
    std::vector<double> g(nx);
    double f0 = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      g[j] = spectral_->weights[j] * F.values[j];
      f0 += g[j];
    }
    f.valueAtOrigin = f0;
    constexpr std::size_t B = 64;
    tbb::parallel_for(std::size_t(0), (nr + B - 1) / B, [&](std::size_t blk) {
      std::size_t i0 = blk * B, i1 = std::min(nr, i0 + B);
      for (std::size_t j = 0; j < nx; ++j) {
        const double* row = &table_[j * nr];
        double c = g[j];
        for (std::size_t i = i0; i < i1; ++i) f.values[i] += c * row[i];
      }
    });
    return f;
  }

  /** \brief inverse(m(xi) * forward(f)). */
  template <class M>
  RadialFn apply_multiplier(const RadialFn& f, M&& mult) const {
    SpectralFn F = forward(f);
    for (std::size_t j = 0; j < F.size(); ++j) F.values[j] *= mult(spectral_->nodes[j]);
    return inverse(F);
  }

  /** \brief int m(xi) F(xi) G(xi) d(Plancherel). */
  template <class M>
  double spectral_inner(const SpectralFn& F, const SpectralFn& G, M&& mult) const {
    double s = 0.0;
    for (std::size_t j = 0; j < F.size(); ++j)
      s += spectral_->weights[j] * mult(spectral_->nodes[j]) * F.values[j] * G.values[j];
    return s;
  }
  double spectral_l2sq(const SpectralFn& F) const {
    return spectral_inner(F, F, [](double) { return 1.0; });
  }

  template <class F>
  RadialFn sample(F&& f) const { return RadialFn::sample(radial_, std::forward<F>(f)); }

  /** \brief Reference Gaussian fixing the inversion constant. */
  static double reference_gaussian(double r) { return std::exp(-r * r / (2.0 * 0.6 * 0.6)); }

 private:
  void build_table() {
    const std::size_t nr = radial_->size(), nx = spectral_->size();
    table_.assign(nr * nx, 0.0);
    tbb::parallel_for(std::size_t(0), nx, [&](std::size_t j) {
      auto prof = detail::spherical_profile(n_, spectral_->nodes[j], radial_->nodes);
      std::copy(prof.begin(), prof.end(), table_.begin() + j * nr);
    });
  }

  void normalize() {
    RadialFn g = sample(reference_gaussian);
    double real = g.lp_norm_pow(2.0);
    SpectralFn G = forward(g);
    double spec = 0.0;
    for (std::size_t j = 0; j < G.size(); ++j) spec += spectral_->density[j] * spectral_->dxi[j] * G.values[j] * G.values[j];
    std::const_pointer_cast<SpectralGrid>(spectral_)->set_constant(real / spec);
  }

  static constexpr char kMagic[8] = {'H', 'Y', 'P', 'S', 'P', 'H', 'C', '1'};
  static constexpr std::uint32_t kVersion = 1;

  template <class T>
  static void put(std::ofstream& os, T v) {
    boost::endian::native_to_little_inplace(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  template <class T>
  static bool get(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    boost::endian::little_to_native_inplace(v);
    return bool(is);
  }

  void save_cache(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) return;
    os.write(kMagic, 8);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(n_));
    put(os, radial_->hash());
    put(os, spectral_->hash());
    put(os, static_cast<std::uint64_t>(spectral_->size()));
    put(os, static_cast<std::uint64_t>(radial_->size()));
    for (double d : table_) {
      std::uint64_t u;
      std::memcpy(&u, &d, 8);
      put(os, u);
    }
  }

  bool load_cache(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0) return false;
    std::uint32_t ver, n;
    std::uint64_t hr, hs, rows, cols;
    if (!get(is, ver) || !get(is, n) || !get(is, hr) || !get(is, hs) || !get(is, rows) || !get(is, cols)) return false;
    if (ver != kVersion || int(n) != n_ || hr != radial_->hash() || hs != spectral_->hash() ||
        rows != spectral_->size() || cols != radial_->size())
      return false;
    table_.resize(rows * cols);
    for (double& d : table_) {
      std::uint64_t u;
      if (!get(is, u)) return false;
      std::memcpy(&d, &u, 8);
    }
    return true;
  }

  int n_;
  GridSpec spec_;
  std::shared_ptr<RadialGrid> radial_;
  std::shared_ptr<SpectralGrid> spectral_;
  std::vector<double> table_;
  bool cacheHit_ = false;
};

inline SpectralFn forward_transform(const SpectralContext& ctx, const RadialFn& f) { return ctx.forward(f); }
inline RadialFn inverse_transform(const SpectralContext& ctx, const SpectralFn& F) { return ctx.inverse(F); }

struct PlancherelReport {
  double realL2 = 0.0;
  double spectralL2 = 0.0;
  double relError = 0.0;
};

inline PlancherelReport plancherel_check(const SpectralContext& ctx, const RadialFn& f) {
  PlancherelReport r;
  r.realL2 = f.l2();
  r.spectralL2 = std::sqrt(ctx.spectral_l2sq(ctx.forward(f)));
  r.relError = r.realL2 > 0.0 ? std::abs(r.realL2 - r.spectralL2) / r.realL2 : 0.0;
  return r;
}

/** \brief ||inverse(forward(f)) - f||_2 / ||f||_2. */
inline double round_trip_error(const SpectralContext& ctx, const RadialFn& f) {
  RadialFn g = ctx.inverse(ctx.forward(f));
  double den = f.l2();
  return den > 0.0 ? (g - f).l2() / den : 0.0;
}

}  // namespace hyplab

#endif  // HYPLAB_SPECTRAL_CORE_HPP
