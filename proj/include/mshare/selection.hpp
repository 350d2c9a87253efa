#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mshare/core_state.hpp"
#include "mshare/error.hpp"
#include "mshare/measures.hpp"
#include "mshare/rng.hpp"

namespace mshare {

/// beta == 1: the plain Polya urn.
struct UnitSelection {
  friend bool operator==(const UnitSelection&, const UnitSelection&) = default;
};

/// beta_n(z) = 1 + sigma(z) / n with sigma a polynomial
/// sigma(z) = sum_k coefficients[k] * z^k, n the units per market.
struct SigmaSelection {
  std::vector<double> coefficients;

  double sigma(double z) const {
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// sup over [0, 1] of |sigma|, bounded by the sum of |coefficients|.
  double sigma_bound() const {
    double b = 0.0;
    for (double c : coefficients) b += std::abs(c);
    return b;
  }

  bool is_zero() const {
    for (double c : coefficients) {
      if (c != 0.0) return false;
    }
    return true;
  }

  friend bool operator==(const SigmaSelection&, const SigmaSelection&) = default;
};

/// beta(x) = x: the label doubles as an index of relative advantage.
struct IdentitySelection {
  friend bool operator==(const IdentitySelection&, const IdentitySelection&) = default;
};

/// beta(x, mu) = 1 / n_x, with n_x the multiplicity of x in the reference
/// configuration. A label absent from it weighs 1.
struct InverseClusterSelection {
  friend bool operator==(const InverseClusterSelection&, const InverseClusterSelection&) = default;
};

/// Arbitrary nonnegative weight of (label, empirical measure), bounded by `bound`.
struct CustomSelection {
  std::function<double(FirmLabel, const EmpiricalView&)> weight;
  double bound = 1.0;
  std::string name = "custom";

  friend bool operator==(const CustomSelection& a, const CustomSelection& b) {
    return a.name == b.name && a.bound == b.bound;
  }
};

using SelectionSpec =
    std::variant<UnitSelection, SigmaSelection, IdentitySelection, InverseClusterSelection, CustomSelection>;

/// True when the spec is beta == 1 (including sigma == 0).
inline bool is_unit(const SelectionSpec& spec) {
  if (std::holds_alternative<UnitSelection>(spec)) return true;
  if (const auto* s = std::get_if<SigmaSelection>(&spec)) return s->is_zero();
  return false;
}

/// beta(label, view). Throws on negative or non-finite values.
inline double selection_weight(const SelectionSpec& spec, FirmLabel label, const EmpiricalView& view) {
  const double w = std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UnitSelection>) {
          return 1.0;
        } else if constexpr (std::is_same_v<S, SigmaSelection>) {
          return 1.0 + s.sigma(label.value()) / static_cast<double>(view.configuration().size());
        } else if constexpr (std::is_same_v<S, IdentitySelection>) {
          return label.value();
        } else if constexpr (std::is_same_v<S, InverseClusterSelection>) {
          const std::size_t m = view.multiplicity(label);
          return m == 0 ? 1.0 : 1.0 / static_cast<double>(m);
        } else {
          return s.weight(label, view);
        }
      },
      spec);
  if (!std::isfinite(w)) throw ValidationError("selection weight is not finite");
  if (w < 0.0) throw ValidationError("selection weight is negative");
  return w;
}

/// Upper bound of beta over [0, 1] for every reachable configuration.
inline double selection_bound(const SelectionSpec& spec, std::size_t n) {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SigmaSelection>) {
          return 1.0 + s.sigma_bound() / static_cast<double>(n);
        } else if constexpr (std::is_same_v<S, CustomSelection>) {
          return s.bound;
        } else {
          return 1.0;
        }
      },
      spec);
}

/// Sum over the units in `view` of beta(x_k, view), evaluated per cluster as
/// n_j * beta(x*_j).
inline double weighted_empirical_total(const EmpiricalView& view, const SelectionSpec& spec) {
  if (is_unit(spec)) return static_cast<double>(view.size());
  double total = 0.0;
  for (const Cluster& c : view.configuration().clusters()) {
    const std::size_t m = view.multiplicity(c.label);
    if (m == 0) continue;
    total += static_cast<double>(m) * selection_weight(spec, c.label, view);
  }
  return total;
}

inline double weighted_empirical_total(const MarketConfiguration& config, const SelectionSpec& spec) {
  return weighted_empirical_total(EmpiricalView(config), spec);
}

/// Integral of beta(y, view) against the base measure.
inline double base_integral(const SelectionSpec& spec, const BaseMeasure& base, const EmpiricalView& view) {
  if (is_unit(spec)) return 1.0;
  if (const auto* d = std::get_if<DiscreteBase>(&base)) {
    double total = 0.0;
    for (std::size_t k = 0; k < d->atoms.size(); ++k) {
      if (d->weights[k] == 0.0) continue;
      total += d->weights[k] * selection_weight(spec, FirmLabel(d->atoms[k]), view);
    }
    return total;
  }
  const auto& beta = std::get<BetaBase>(base);
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, SigmaSelection>) {
          double e_sigma = 0.0;
          for (std::size_t k = 0; k < s.coefficients.size(); ++k) {
            e_sigma += s.coefficients[k] * base_moment(base, static_cast<unsigned>(k));
          }
          return 1.0 + e_sigma / static_cast<double>(view.configuration().size());
        } else if constexpr (std::is_same_v<S, IdentitySelection>) {
          return base_mean(base);
        } else if constexpr (std::is_same_v<S, InverseClusterSelection>) {
          // A non-atomic base puts no mass on existing labels.
          return 1.0;
        } else if constexpr (std::is_same_v<S, CustomSelection>) {
          boost::math::beta_distribution<double> dist(beta.a, beta.b);
          boost::math::quadrature::tanh_sinh<double> integrator;
          auto f = [&](double y) { return selection_weight(spec, FirmLabel(y), view) * boost::math::pdf(dist, y); };
          return integrator.integrate(f, 0.0, 1.0);
        } else {
          return 1.0;
        }
      },
      spec);
}

/// Rejection attempts before giving up on the beta-weighted base draw.
inline constexpr std::size_t kRejectionBudget = 1'000'000;

/// Draws a label from beta(y, view) nu_0(dy), normalized.
inline FirmLabel sample_weighted_base(const SelectionSpec& spec, const BaseMeasure& base, const EmpiricalView& view,
                                      Rng& rng) {
  if (is_unit(spec)) return sample_base(base, rng);
  if (const auto* d = std::get_if<DiscreteBase>(&base)) {
    std::vector<double> w(d->atoms.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
      w[k] = d->weights[k] == 0.0 ? 0.0 : d->weights[k] * selection_weight(spec, FirmLabel(d->atoms[k]), view);
    }
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw SamplerError("beta-weighted base measure has zero mass");
    return FirmLabel(d->atoms[rng.categorical(w, total)]);
  }
  const auto& beta = std::get<BetaBase>(base);
  if (std::holds_alternative<IdentitySelection>(spec)) return FirmLabel(rng.beta(beta.a + 1.0, beta.b));
  if (std::holds_alternative<InverseClusterSelection>(spec)) return sample_base(base, rng);

  const double bound = selection_bound(spec, view.configuration().size());
  if (!(bound > 0.0) || !std::isfinite(bound)) throw SamplerError("selection bound must be positive and finite");
  for (std::size_t attempt = 0; attempt < kRejectionBudget; ++attempt) {
    const FirmLabel y = sample_base(base, rng);
    const double w = selection_weight(spec, y, view);
    if (w > bound * (1.0 + 1e-12)) {
      throw SamplerError("selection weight " + std::to_string(w) + " exceeds declared bound " +
                         std::to_string(bound));
    }
    if (rng.uniform() * bound < w) return y;
  }
  throw SamplerError("rejection sampler for the beta-weighted base draw exhausted " +
                     std::to_string(kRejectionBudget) + " attempts (bound " + std::to_string(bound) +
                     ", base " + describe(base) + ")");
}

}  // namespace mshare
