#ifndef HYPLAB_TESTS_SUPPORT_HPP
#define HYPLAB_TESTS_SUPPORT_HPP

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include <hyplab/spectral_core.hpp>

namespace hyplab::testing {

enum class Grid { Default, Coarse, Refined };

inline GridSpec grid_spec(Grid g) {
  switch (g) {
    case Grid::Coarse: return GridSpec::coarse();
    case Grid::Refined: return GridSpec().refined();
    default: return GridSpec();
  }
}

/** \brief One context per (n, grid) for the whole test binary; tables come from the shared cache. */
inline const SpectralContext& context(int n, Grid g = Grid::Default) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<SpectralContext>> pool;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = pool[{n, static_cast<int>(g)}];
  if (!slot) slot = std::make_unique<SpectralContext>(n, grid_spec(g), HYPLAB_TEST_CACHE);
  return *slot;
}

template <class F>
RadialFn sample(const SpectralContext& ctx, F&& f) {
  return RadialFn::sample(ctx.radial(), std::forward<F>(f));
}

}  // namespace hyplab::testing

#endif
