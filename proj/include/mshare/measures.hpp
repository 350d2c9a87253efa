#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mshare/core_state.hpp"
#include "mshare/error.hpp"
#include "mshare/rng.hpp"

namespace mshare {

struct BetaBase {
  double a = 1.0;
  double b = 1.0;

  friend bool operator==(const BetaBase&, const BetaBase&) = default;
};

/// Finitely many atoms; used by the exact oracles and for discrete type spaces.
struct DiscreteBase {
  std::vector<double> atoms;
  std::vector<double> weights;

  friend bool operator==(const DiscreteBase&, const DiscreteBase&) = default;
};

/// Distribution of labels for newly created firms.
using BaseMeasure = std::variant<BetaBase, DiscreteBase>;

inline void validate(const BaseMeasure& measure) {
  if (const auto* beta = std::get_if<BetaBase>(&measure)) {
    if (!(beta->a > 0.0) || !(beta->b > 0.0) || !std::isfinite(beta->a) || !std::isfinite(beta->b)) {
      throw ValidationError("beta base measure needs a > 0 and b > 0");
    }
    return;
  }
  const auto& d = std::get<DiscreteBase>(measure);
  if (d.atoms.empty() || d.atoms.size() != d.weights.size()) {
    throw ValidationError("discrete base measure needs matching, non-empty atoms and weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < d.atoms.size(); ++k) {
    if (!(d.atoms[k] >= 0.0 && d.atoms[k] <= 1.0)) {
      throw ValidationError("discrete atom outside [0, 1]");
    }
    if (!(d.weights[k] >= 0.0)) throw ValidationError("discrete weights must be nonnegative");
    for (std::size_t l = 0; l < k; ++l) {
      if (d.atoms[l] == d.atoms[k]) throw ValidationError("discrete atoms must be distinct");
    }
    total += d.weights[k];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("discrete weights must sum to 1");
}

inline FirmLabel sample_base(const BaseMeasure& measure, Rng& rng) {
  if (const auto* beta = std::get_if<BetaBase>(&measure)) {
    if (beta->a == 1.0 && beta->b == 1.0) return FirmLabel(rng.uniform());
    return FirmLabel(rng.beta(beta->a, beta->b));
  }
  const auto& d = std::get<DiscreteBase>(measure);
  return FirmLabel(d.atoms[rng.categorical(d.weights)]);
}

/// E[Z^k] for Z ~ measure.
inline double base_moment(const BaseMeasure& measure, unsigned k) {
  if (const auto* beta = std::get_if<BetaBase>(&measure)) {
    double m = 1.0;
    for (unsigned i = 0; i < k; ++i) m *= (beta->a + i) / (beta->a + beta->b + i);
    return m;
  }
  const auto& d = std::get<DiscreteBase>(measure);
  double m = 0.0;
  for (std::size_t j = 0; j < d.atoms.size(); ++j) m += d.weights[j] * std::pow(d.atoms[j], k);
  return m;
}

inline double base_mean(const BaseMeasure& measure) { return base_moment(measure, 1); }

inline std::string describe(const BaseMeasure& measure) {
  if (const auto* beta = std::get_if<BetaBase>(&measure)) {
    return "beta(" + std::to_string(beta->a) + "," + std::to_string(beta->b) + ")";
  }
  return "discrete(" + std::to_string(std::get<DiscreteBase>(measure).atoms.size()) + " atoms)";
}

/// Counts of units per equal-width bin of [0, 1].
///
/// Bins are half-open [e_k, e_{k+1}) except the last, which also holds 1.0.
struct Histogram {
  std::vector<std::size_t> counts;

  std::size_t bin_count() const noexcept { return counts.size(); }
  double edge(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(counts.size()); }
  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Bin index of `x` among `bin_count` equal bins.
///
/// floor(x * B) can land one bin off when x sits on an edge that is not
/// exactly representable, so the result is corrected against the edges k/B.
inline std::size_t bin_index(double x, std::size_t bin_count) {
  const double b = static_cast<double>(bin_count);
  auto k = static_cast<std::size_t>(x * b);
  if (k >= bin_count) return bin_count - 1;
  if (x < static_cast<double>(k) / b) --k;
  else if (k + 1 < bin_count && x >= static_cast<double>(k + 1) / b) ++k;
  return k;
}

inline Histogram histogram(const MarketConfiguration& config, std::size_t bin_count) {
  if (bin_count == 0) throw ValidationError("histogram needs at least one bin");
  Histogram h{std::vector<std::size_t>(bin_count, 0)};
  for (const Cluster& c : config.clusters()) h.counts[bin_index(c.label.value(), bin_count)] += c.count;
  return h;
}

/// Read-only view of a market's empirical measure, optionally with one unit
/// removed (the vacant share during an update).
class EmpiricalView {
 public:
  explicit EmpiricalView(const MarketConfiguration& config) : config_(&config) {}
  EmpiricalView(const MarketConfiguration& config, std::size_t excluded_unit)
      : config_(&config), excluded_(config.unit(excluded_unit)) {}

  const MarketConfiguration& configuration() const noexcept { return *config_; }

  /// Number of units in the view.
  std::size_t size() const noexcept { return config_->size() - (excluded_ ? 1 : 0); }

  /// Units in the view carrying `label`.
  std::size_t multiplicity(FirmLabel label) const {
    const std::size_t m = config_->multiplicity(label);
    return (excluded_ && *excluded_ == label) ? m - 1 : m;
  }

  /// Mass of `label` under the view's empirical measure.
  double mass(FirmLabel label) const {
    return static_cast<double>(multiplicity(label)) / static_cast<double>(size());
  }

  std::optional<FirmLabel> excluded() const noexcept { return excluded_; }

 private:
  const MarketConfiguration* config_;
  std::optional<FirmLabel> excluded_;
};

}  // namespace mshare
