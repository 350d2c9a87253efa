#pragma once

#include <algorithm>
#include <cstddef>

#include "mshare/core_state.hpp"

namespace mshare {

/// Herfindahl index: sum of squared market shares.
inline double herfindahl(const MarketConfiguration& config) {
  const double n = static_cast<double>(config.size());
  double h = 0.0;
  for (const Cluster& c : config.clusters()) {
    const double s = static_cast<double>(c.count) / n;
    h += s * s;
  }
  return h;
}

/// Largest share held by a single firm.
inline double max_share(const MarketConfiguration& config) {
  std::size_t best = 0;
  for (const Cluster& c : config.clusters()) best = std::max(best, c.count);
  return static_cast<double>(best) / static_cast<double>(config.size());
}

}  // namespace mshare
