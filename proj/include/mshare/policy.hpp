#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mshare/error.hpp"

namespace mshare {

/// Which firm loses a share unit at a transition.
struct RemovalPolicy {
  enum class Kind {
    uniform_unit,  ///< every unit with probability 1/n
    neutral,       ///< every firm with probability 1/K
    proportional,  ///< firm j with probability n_j / n
    inverse,       ///< firm j with probability (1 - n_j/n) / (K - 1); needs K >= 2
    antitrust,     ///< firms above n*C are hit with certainty, otherwise `inner`
  };

  Kind kind = Kind::uniform_unit;
  double threshold = 0.0;      // C, antitrust only
  Kind inner = Kind::neutral;  // antitrust only; never antitrust itself

  static RemovalPolicy antitrust_with(double c, Kind inner_kind) { return {Kind::antitrust, c, inner_kind}; }

  void validate() const {
    if (kind == Kind::antitrust) {
      if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("antitrust threshold must lie in (0, 1)");
      if (inner == Kind::antitrust) throw ValidationError("antitrust inner policy cannot be antitrust");
    }
  }

  friend bool operator==(const RemovalPolicy&, const RemovalPolicy&) = default;
};

inline std::string to_string(RemovalPolicy::Kind kind) {
  switch (kind) {
    case RemovalPolicy::Kind::uniform_unit: return "uniform_unit";
    case RemovalPolicy::Kind::neutral: return "neutral";
    case RemovalPolicy::Kind::proportional: return "proportional";
    case RemovalPolicy::Kind::inverse: return "inverse";
    case RemovalPolicy::Kind::antitrust: return "antitrust";
  }
  return "?";
}

inline RemovalPolicy::Kind removal_kind_from_string(const std::string& name) {
  using K = RemovalPolicy::Kind;
  for (K k : {K::uniform_unit, K::neutral, K::proportional, K::inverse, K::antitrust}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown removal policy '" + name + "'");
}

namespace detail {

inline std::vector<double> base_removal_weights(RemovalPolicy::Kind kind, std::span<const std::size_t> counts,
                                                std::size_t n) {
  const std::size_t k = counts.size();
  std::vector<double> w(k);
  const double nd = static_cast<double>(n);
  switch (kind) {
    case RemovalPolicy::Kind::neutral:
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(k));
      break;
    case RemovalPolicy::Kind::uniform_unit:
    case RemovalPolicy::Kind::proportional:
      for (std::size_t j = 0; j < k; ++j) w[j] = static_cast<double>(counts[j]) / nd;
      break;
    case RemovalPolicy::Kind::inverse:
      if (k < 2) throw UndefinedPolicyError("inverse removal policy is defined only when K_n >= 2");
      for (std::size_t j = 0; j < k; ++j) {
        w[j] = (1.0 - static_cast<double>(counts[j]) / nd) / static_cast<double>(k - 1);
      }
      break;
    case RemovalPolicy::Kind::antitrust:
      throw ValidationError("antitrust cannot be its own inner policy");
  }
  return w;
}

}  // namespace detail

/// Probability that each firm (cluster) loses a unit, given cluster counts
/// that sum to n.
inline std::vector<double> removal_weights(const RemovalPolicy& policy, std::span<const std::size_t> counts,
                                           std::size_t n) {
  if (counts.empty()) throw InvalidStateError("removal weights need at least one firm");
  if (policy.kind != RemovalPolicy::Kind::antitrust) return detail::base_removal_weights(policy.kind, counts, n);

  const double cap = static_cast<double>(n) * policy.threshold;
  std::size_t over = 0;
  for (std::size_t c : counts) over += static_cast<double>(c) > cap ? 1 : 0;
  if (over == 0) return detail::base_removal_weights(policy.inner, counts, n);
  std::vector<double> w(counts.size(), 0.0);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (static_cast<double>(counts[j]) > cap) w[j] = 1.0 / static_cast<double>(over);
  }
  return w;
}

/// Cross-market acquisition weights m(r, r'): zero diagonal, rows summing to 1.
/// Empty for a single market.
struct MigrationKernel {
  std::vector<std::vector<double>> entries;

  /// m(r, r') = 1 / (R - 1) off the diagonal.
  static MigrationKernel uniform(std::size_t markets) {
    MigrationKernel m;
    if (markets < 2) return m;
    m.entries.assign(markets, std::vector<double>(markets, 1.0 / static_cast<double>(markets - 1)));
    for (std::size_t r = 0; r < markets; ++r) m.entries[r][r] = 0.0;
    return m;
  }

  double operator()(std::size_t r, std::size_t s) const { return entries.empty() ? 0.0 : entries[r][s]; }

  void validate(std::size_t markets) const {
    if (markets < 2) {
      if (!entries.empty() && !(entries.size() == 1 && entries[0].size() == 1 && entries[0][0] == 0.0)) {
        throw ValidationError("migration kernel of a single market must be empty");
      }
      return;
    }
    if (entries.size() != markets) throw ValidationError("migration kernel has the wrong number of rows");
    for (std::size_t r = 0; r < markets; ++r) {
      if (entries[r].size() != markets) throw ValidationError("migration kernel row has the wrong length");
      if (entries[r][r] != 0.0) {
        throw ValidationError("migration kernel diagonal m(" + std::to_string(r) + "," + std::to_string(r) +
                              ") must be 0");
      }
      double total = 0.0;
      for (double v : entries[r]) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("migration kernel entries must lie in [0, 1]");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("migration kernel row " + std::to_string(r) + " must sum to 1");
      }
    }
  }

  friend bool operator==(const MigrationKernel&, const MigrationKernel&) = default;
};

}  // namespace mshare
