#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mshare/error.hpp"

namespace mshare {

/// A point of the type space [0, 1] identifying one firm.
///
/// Two labels denote the same firm iff their values compare equal. Labels are
/// duplicated only by copying, so exact comparison is the intended semantics.
class FirmLabel {
 public:
  constexpr FirmLabel() = default;
  explicit FirmLabel(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ValidationError("firm label " + std::to_string(value) + " outside [0, 1]");
    }
  }

  constexpr double value() const noexcept { return value_; }

  friend constexpr bool operator==(FirmLabel, FirmLabel) = default;
  friend constexpr auto operator<=>(FirmLabel a, FirmLabel b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

/// One row of a cluster table: a firm and the number of share units it holds.
struct Cluster {
  FirmLabel label;
  std::size_t count = 0;

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// Distinct firms of a market with multiplicities, ascending by label.
using ClusterTable = std::vector<Cluster>;

/// Builds the cluster table of a unit list from scratch.
inline ClusterTable cluster_view(std::span<const FirmLabel> units) {
  if (units.empty()) throw InvalidStateError("cluster_view: empty unit list");
  std::vector<FirmLabel> sorted(units.begin(), units.end());
  std::sort(sorted.begin(), sorted.end());
  ClusterTable table;
  for (FirmLabel x : sorted) {
    if (!table.empty() && table.back().label == x) {
      ++table.back().count;
    } else {
      table.push_back({x, 1});
    }
  }
  return table;
}

/// The n share units of one market together with an incrementally maintained
/// cluster index.
///
/// Each firm keeps the list of unit indices it owns, so that the number of
/// firms, a firm's multiplicity, and a uniformly chosen unit of a given firm
/// are all available without scanning the units.
class MarketConfiguration {
 public:
  MarketConfiguration() = default;

  explicit MarketConfiguration(std::vector<FirmLabel> units) : units_(std::move(units)) {
    if (units_.empty()) throw InvalidStateError("market configuration needs at least one unit");
    slot_.resize(units_.size());
    for (std::size_t i = 0; i < units_.size(); ++i) attach(i);
  }

  static MarketConfiguration from_values(std::span<const double> values) {
    std::vector<FirmLabel> units;
    units.reserve(values.size());
    for (double v : values) units.emplace_back(v);
    return MarketConfiguration(std::move(units));
  }

  std::size_t size() const noexcept { return units_.size(); }
  std::size_t firm_count() const noexcept { return firms_.size(); }
  std::span<const FirmLabel> units() const noexcept { return units_; }
  FirmLabel unit(std::size_t i) const { return units_.at(i); }

  /// Multiplicity of `label`; 0 if the firm is absent.
  std::size_t multiplicity(FirmLabel label) const {
    auto it = firms_.find(label);
    return it == firms_.end() ? 0 : it->second.size();
  }

  /// Cluster table in ascending label order, read from the incremental index.
  ClusterTable clusters() const {
    ClusterTable table;
    table.reserve(firms_.size());
    for (const auto& [label, members] : firms_) table.push_back({label, members.size()});
    return table;
  }

  /// Unit indices owned by `label` (unordered).
  std::span<const std::size_t> members(FirmLabel label) const {
    auto it = firms_.find(label);
    if (it == firms_.end()) return {};
    return it->second;
  }

  /// Replaces the label of unit `i`. Returns the previous label.
  FirmLabel replace(std::size_t i, FirmLabel label) {
    if (i >= units_.size()) throw InvalidStateError("unit index out of range");
    const FirmLabel old = units_[i];
    if (old == label) return old;
    detach(i);
    units_[i] = label;
    attach(i);
    return old;
  }

  /// True iff the incremental index matches a rebuild from the units.
  bool index_consistent() const {
    if (units_.empty()) return firms_.empty();
    if (clusters() != cluster_view(units_)) return false;
    for (const auto& [label, members] : firms_) {
      for (std::size_t pos = 0; pos < members.size(); ++pos) {
        const std::size_t i = members[pos];
        if (units_[i] != label || slot_[i] != pos) return false;
      }
    }
    return true;
  }

  friend bool operator==(const MarketConfiguration& a, const MarketConfiguration& b) {
    return a.units_ == b.units_;
  }

 private:
  void attach(std::size_t i) {
    auto& members = firms_[units_[i]];
    slot_[i] = members.size();
    members.push_back(i);
  }

  void detach(std::size_t i) {
    auto it = firms_.find(units_[i]);
    auto& members = it->second;
    const std::size_t pos = slot_[i];
    const std::size_t moved = members.back();
    members[pos] = moved;
    slot_[moved] = pos;
    members.pop_back();
    if (members.empty()) firms_.erase(it);
  }

  std::vector<FirmLabel> units_;
  std::vector<std::size_t> slot_;  // position of unit i inside its firm's member list
  std::map<FirmLabel, std::vector<std::size_t>> firms_;
};

inline ClusterTable cluster_view(const MarketConfiguration& config) {
  return cluster_view(config.units());
}

/// All markets of the system plus the chain's position in time.
struct SystemState {
  std::vector<std::string> market_ids;
  std::vector<MarketConfiguration> markets;
  std::uint64_t iteration = 0;
  double clock = 0.0;

  std::size_t market_count() const noexcept { return markets.size(); }

  /// Share units per market (common to all markets).
  std::size_t units_per_market() const { return markets.empty() ? 0 : markets.front().size(); }

  /// Total number of components, n times the number of markets.
  std::size_t component_count() const { return units_per_market() * markets.size(); }

  std::size_t market_index(const std::string& id) const {
    auto it = std::find(market_ids.begin(), market_ids.end(), id);
    if (it == market_ids.end()) throw ValidationError("unknown market '" + id + "'");
    return static_cast<std::size_t>(it - market_ids.begin());
  }

  void validate() const {
    if (markets.empty()) throw InvalidStateError("system has no markets");
    if (market_ids.size() != markets.size()) {
      throw InvalidStateError("market id list does not match market count");
    }
    const std::size_t n = markets.front().size();
    for (const auto& m : markets) {
      if (m.size() != n) throw InvalidStateError("markets must share the same n");
    }
  }
};

}  // namespace mshare
