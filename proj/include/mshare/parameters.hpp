#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mshare/error.hpp"
#include "mshare/measures.hpp"
#include "mshare/policy.hpp"
#include "mshare/selection.hpp"

namespace mshare {

/// Model parameters. theta, pi and base hold one entry per market.
struct ParameterSet {
  std::vector<double> theta;
  std::vector<double> pi;
  MigrationKernel migration;
  std::vector<double> market_weights;
  RemovalPolicy removal;
  SelectionSpec selection = UnitSelection{};
  std::vector<BaseMeasure> base;
  /// Poisson intensity for continuous time; 0 selects n^2 * #markets.
  double lambda = 0.0;

  std::size_t market_count() const noexcept { return theta.size(); }

  double poisson_rate(std::size_t n) const {
    return lambda > 0.0 ? lambda : static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(market_count());
  }

  /// Same theta, pi and base in every market, uniform rho and m.
  static ParameterSet homogeneous(std::size_t markets, double theta, double pi, BaseMeasure base) {
    ParameterSet p;
    p.theta.assign(markets, theta);
    p.pi.assign(markets, pi);
    p.migration = MigrationKernel::uniform(markets);
    p.market_weights.assign(markets, 1.0 / static_cast<double>(markets));
    p.base.assign(markets, std::move(base));
    return p;
  }

  void validate() const {
    const std::size_t r = market_count();
    if (r == 0) throw ValidationError("parameter set covers no markets");
    if (pi.size() != r || base.size() != r || market_weights.size() != r) {
      throw ValidationError("per-market parameter lists disagree in length");
    }
    for (std::size_t k = 0; k < r; ++k) {
      if (!(theta[k] >= 0.0) || !std::isfinite(theta[k])) throw ValidationError("theta must be finite and >= 0");
      if (!(pi[k] >= 0.0 && pi[k] <= 1.0)) throw ValidationError("pi must lie in [0, 1]");
      mshare::validate(base[k]);
    }
    double total = 0.0;
    for (double w : market_weights) {
      if (!(w >= 0.0)) throw ValidationError("market weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("market weights must sum to 1");
    migration.validate(r);
    removal.validate();
    if (const auto* s = std::get_if<SigmaSelection>(&selection)) {
      for (double c : s->coefficients) {
        if (!std::isfinite(c)) throw ValidationError("sigma coefficients must be finite");
      }
    }
    if (const auto* c = std::get_if<CustomSelection>(&selection)) {
      if (!c->weight) throw ValidationError("custom selection needs a weight function");
      if (!(c->bound > 0.0) || !std::isfinite(c->bound)) throw ValidationError("custom selection bound must be positive");
    }
    if (lambda < 0.0 || !std::isfinite(lambda)) throw ValidationError("lambda must be finite and >= 0");
  }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

/// A partial parameter set. Market-indexed fields only touch listed markets.
struct ParameterPatch {
  std::map<std::size_t, double> theta;
  std::map<std::size_t, double> pi;
  std::map<std::size_t, BaseMeasure> base;
  std::optional<MigrationKernel> migration;
  std::optional<std::vector<double>> market_weights;
  std::optional<RemovalPolicy> removal;
  std::optional<SelectionSpec> selection;
  std::optional<double> lambda;

  bool empty() const {
    return theta.empty() && pi.empty() && base.empty() && !migration && !market_weights && !removal && !selection &&
           !lambda;
  }

  friend bool operator==(const ParameterPatch&, const ParameterPatch&) = default;
};

/// Returns `params` with `patch` applied; the result is validated as a whole.
inline ParameterSet apply_patch(const ParameterSet& params, const ParameterPatch& patch) {
  ParameterSet out = params;
  for (const auto& [r, v] : patch.theta) {
    if (r >= out.market_count()) throw ValidationError("patch names an unknown market");
    out.theta[r] = v;
  }
  for (const auto& [r, v] : patch.pi) {
    if (r >= out.market_count()) throw ValidationError("patch names an unknown market");
    out.pi[r] = v;
  }
  for (const auto& [r, v] : patch.base) {
    if (r >= out.market_count()) throw ValidationError("patch names an unknown market");
    out.base[r] = v;
  }
  if (patch.migration) out.migration = *patch.migration;
  if (patch.market_weights) out.market_weights = *patch.market_weights;
  if (patch.removal) out.removal = *patch.removal;
  if (patch.selection) out.selection = *patch.selection;
  if (patch.lambda) out.lambda = *patch.lambda;
  out.validate();
  return out;
}

struct ScheduledPatch {
  std::uint64_t trigger = 1;  ///< applied just before update number `trigger`
  ParameterPatch patch;

  friend bool operator==(const ScheduledPatch&, const ScheduledPatch&) = default;
};

/// Parameter changes at fixed iterations, e.g. a regulator lowering entry barriers.
struct Schedule {
  std::vector<ScheduledPatch> entries;

  void validate(std::uint64_t iterations) const {
    std::uint64_t previous = 0;
    for (const auto& e : entries) {
      if (e.trigger <= previous) throw ValidationError("schedule triggers must be strictly increasing and >= 1");
      if (e.trigger > iterations) {
        throw ValidationError("schedule trigger " + std::to_string(e.trigger) + " lies beyond " +
                              std::to_string(iterations) + " iterations");
      }
      previous = e.trigger;
    }
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

}  // namespace mshare
