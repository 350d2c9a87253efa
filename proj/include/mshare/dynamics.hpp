#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mshare/core_state.hpp"
#include "mshare/error.hpp"
#include "mshare/measures.hpp"
#include "mshare/parameters.hpp"
#include "mshare/policy.hpp"
#include "mshare/rng.hpp"
#include "mshare/selection.hpp"

namespace mshare {

/// The unit that loses its share at a transition.
struct Target {
  std::size_t market = 0;
  std::size_t unit = 0;

  friend bool operator==(const Target&, const Target&) = default;
};

enum class Branch { new_firm, cross, within };

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::new_firm: return "new_firm";
    case Branch::cross: return "cross";
    case Branch::within: return "within";
  }
  return "?";
}

/// Where the vacant share went. For `cross` and `within`, `source_market`
/// and `source_unit` name the unit whose label was copied.
struct BranchOutcome {
  Branch branch = Branch::within;
  FirmLabel label;
  std::size_t source_market = 0;
  std::size_t source_unit = 0;
};

/// Unnormalized masses of the three destinations of the vacant share.
struct BranchTerms {
  double new_firm = 0.0;
  double cross = 0.0;
  double within = 0.0;

  double total() const { return new_firm + cross + within; }
};

struct BranchProbabilities {
  double new_firm = 0.0;
  double cross = 0.0;
  double within = 0.0;
};

/// Picks the market (by rho) and then the unit (by the removal policy).
///
/// Draw order: one uniform for the market when there are at least two
/// markets; one index for uniform_unit, otherwise one uniform for the firm
/// and one index for the unit inside that firm.
inline Target select_target(const SystemState& state, const ParameterSet& params, Rng& rng) {
  Target t;
  if (state.market_count() > 1) t.market = rng.categorical(params.market_weights, 1.0);
  const MarketConfiguration& config = state.markets[t.market];
  const std::size_t n = config.size();
  if (params.removal.kind == RemovalPolicy::Kind::uniform_unit) {
    t.unit = static_cast<std::size_t>(rng.index(n));
    return t;
  }
  const ClusterTable clusters = config.clusters();
  std::vector<std::size_t> counts(clusters.size());
  for (std::size_t j = 0; j < clusters.size(); ++j) counts[j] = clusters[j].count;
  const std::vector<double> w = removal_weights(params.removal, counts, n);
  const std::size_t firm = rng.categorical(w, 1.0);
  const auto members = config.members(clusters[firm].label);
  t.unit = members[static_cast<std::size_t>(rng.index(members.size()))];
  return t;
}

namespace detail {

inline double effective_pi(const SystemState& state, const ParameterSet& params, std::size_t r) {
  return state.market_count() > 1 ? params.pi[r] : 1.0;
}

}  // namespace detail

/// Masses of the new-firm, cross-market and within-market terms of the full
/// conditional of unit i in market r.
inline BranchTerms branch_terms(const SystemState& state, std::size_t r, std::size_t i, const ParameterSet& params) {
  const MarketConfiguration& config = state.markets.at(r);
  if (i >= config.size()) throw InvalidStateError("unit index out of range");
  const double theta = params.theta[r];
  const double pi = detail::effective_pi(state, params, r);
  const double n = static_cast<double>(config.size());
  BranchTerms t;
  if (is_unit(params.selection)) {
    t.new_firm = theta * pi;
    if (state.market_count() > 1) {
      double row = 0.0;
      for (std::size_t s = 0; s < state.market_count(); ++s) row += params.migration(r, s);
      t.cross = theta * (1.0 - pi) * row;
    }
    t.within = n - 1.0;
    return t;
  }
  const EmpiricalView rest(config, i);
  t.new_firm = theta * pi == 0.0 ? 0.0 : theta * pi * base_integral(params.selection, params.base[r], rest);
  if (state.market_count() > 1 && theta * (1.0 - pi) > 0.0) {
    double acc = 0.0;
    for (std::size_t s = 0; s < state.market_count(); ++s) {
      const double m = params.migration(r, s);
      if (m == 0.0) continue;
      acc += m * weighted_empirical_total(state.markets[s], params.selection) / n;
    }
    t.cross = theta * (1.0 - pi) * acc;
  }
  t.within = weighted_empirical_total(rest, params.selection);
  return t;
}

/// Normalizing constant of the full conditional of unit i in market r.
///
/// beta == 1 gives theta + n - 1. beta(x) = x gives
/// theta*pi*mean(nu_0) + theta*(1-pi)*sum_r' m(r,r')*mean(x^r') + sum_{k != i} x_k.
/// Anything else is the sum of the three terms.
inline double normalizer(const SystemState& state, std::size_t r, std::size_t i, const ParameterSet& params) {
  const MarketConfiguration& config = state.markets.at(r);
  if (i >= config.size()) throw InvalidStateError("unit index out of range");
  const double theta = params.theta[r];
  const double n = static_cast<double>(config.size());
  double q;
  if (is_unit(params.selection)) {
    q = theta + (n - 1.0);
  } else if (std::holds_alternative<IdentitySelection>(params.selection)) {
    const double pi = detail::effective_pi(state, params, r);
    double cross = 0.0;
    for (std::size_t s = 0; s < state.market_count(); ++s) {
      if (s == r || params.migration(r, s) == 0.0) continue;
      double sum = 0.0;
      for (FirmLabel x : state.markets[s].units()) sum += x.value();
      cross += params.migration(r, s) * sum / n;
    }
    double others = 0.0;
    const auto units = config.units();
    for (std::size_t k = 0; k < units.size(); ++k) {
      if (k != i) others += units[k].value();
    }
    q = theta * pi * base_mean(params.base[r]) + (state.market_count() > 1 ? theta * (1.0 - pi) * cross : 0.0) +
        others;
  } else {
    q = branch_terms(state, r, i, params).total();
  }
  if (!std::isfinite(q)) throw ValidationError("normalizer is not finite");
  return q;
}

/// Probabilities of the three destinations; they sum to 1.
inline BranchProbabilities branch_probabilities(const SystemState& state, std::size_t r, std::size_t i,
                                                const ParameterSet& params) {
  const BranchTerms t = branch_terms(state, r, i, params);
  const double q = t.total();
  if (!std::isfinite(q)) throw ValidationError("full conditional mass is not finite");
  if (!(q > 0.0)) {
    throw DegenerateConditionalError("full conditional of unit " + std::to_string(i) + " in market " +
                                     std::to_string(r) + " has no mass (theta = " +
                                     std::to_string(params.theta[r]) + ", n = " +
                                     std::to_string(state.markets[r].size()) + ")");
  }
  return {t.new_firm / q, t.cross / q, t.within / q};
}

namespace detail {

/// Uniform unit of `label` in `config`, skipping `skip` if it belongs to it.
inline std::size_t pick_member(const MarketConfiguration& config, FirmLabel label, std::size_t skip, Rng& rng) {
  const auto members = config.members(label);
  const bool skip_inside = skip < config.size() && config.unit(skip) == label;
  const std::size_t available = members.size() - (skip_inside ? 1 : 0);
  std::size_t k = static_cast<std::size_t>(rng.index(available));
  if (skip_inside) {
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      if (members[pos] == skip) {
        if (k >= pos) ++k;
        break;
      }
    }
  }
  return members[k];
}

/// Unit of `view` drawn with probability proportional to beta.
inline std::size_t pick_weighted_unit(const EmpiricalView& view, const SelectionSpec& spec, std::size_t skip,
                                      Rng& rng) {
  const ClusterTable clusters = view.configuration().clusters();
  std::vector<double> w(clusters.size(), 0.0);
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    const std::size_t m = view.multiplicity(clusters[j].label);
    if (m > 0) w[j] = static_cast<double>(m) * selection_weight(spec, clusters[j].label, view);
  }
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw DegenerateConditionalError("no unit carries positive selection weight");
  const std::size_t j = rng.categorical(w, total);
  return pick_member(view.configuration(), clusters[j].label, skip, rng);
}

}  // namespace detail

/// Draws the new label of unit i in market r from its full conditional.
///
/// Draw order: one uniform for the branch, then the branch payload. The
/// cross branch draws the source market with probability proportional to
/// m(r, r') times that market's beta total, then a unit proportional to beta.
inline BranchOutcome sample_full_conditional(const SystemState& state, std::size_t r, std::size_t i,
                                             const ParameterSet& params, Rng& rng) {
  const BranchTerms t = branch_terms(state, r, i, params);
  const double q = t.total();
  if (!std::isfinite(q)) throw ValidationError("full conditional mass is not finite");
  if (!(q > 0.0)) {
    throw DegenerateConditionalError("full conditional of unit " + std::to_string(i) + " in market " +
                                     std::to_string(r) + " has no mass");
  }
  const MarketConfiguration& config = state.markets[r];
  const bool unit = is_unit(params.selection);
  const double u = rng.uniform() * q;
  BranchOutcome out;

  if (u < t.new_firm) {
    out.branch = Branch::new_firm;
    out.source_market = r;
    out.source_unit = i;
    out.label = sample_weighted_base(params.selection, params.base[r], EmpiricalView(config, i), rng);
    return out;
  }

  if (u < t.new_firm + t.cross) {
    out.branch = Branch::cross;
    const std::size_t markets = state.market_count();
    std::vector<double> w(markets, 0.0);
    for (std::size_t s = 0; s < markets; ++s) {
      const double m = params.migration(r, s);
      if (m == 0.0) continue;
      w[s] = unit ? m : m * weighted_empirical_total(state.markets[s], params.selection);
    }
    const std::size_t s = rng.categorical(w);
    const MarketConfiguration& source = state.markets[s];
    out.source_market = s;
    out.source_unit = unit ? static_cast<std::size_t>(rng.index(source.size()))
                           : detail::pick_weighted_unit(EmpiricalView(source), params.selection, source.size(), rng);
    out.label = source.unit(out.source_unit);
    return out;
  }

  out.branch = Branch::within;
  out.source_market = r;
  if (unit) {
    std::size_t k = static_cast<std::size_t>(rng.index(config.size() - 1));
    if (k >= i) ++k;
    out.source_unit = k;
  } else {
    out.source_unit = detail::pick_weighted_unit(EmpiricalView(config, i), params.selection, i, rng);
  }
  out.label = config.unit(out.source_unit);
  return out;
}

}  // namespace mshare
