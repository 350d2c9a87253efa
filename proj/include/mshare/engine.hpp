#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mshare/core_state.hpp"
#include "mshare/dynamics.hpp"
#include "mshare/error.hpp"
#include "mshare/measures.hpp"
#include "mshare/parameters.hpp"
#include "mshare/rng.hpp"
#include "mshare/summary.hpp"

namespace mshare {

/// How a market's units are laid out before the first update.
struct InitSpec {
  enum class Kind { competitive, monopoly, custom };

  Kind kind = Kind::competitive;
  std::size_t firms = 1;     ///< competitive: number of firms with (near) equal shares
  double label = 0.5;        ///< monopoly: the monopolist's label
  std::vector<double> units; ///< custom: explicit labels, length n

  static InitSpec competitive(std::size_t firms) { return {Kind::competitive, firms, 0.5, {}}; }
  static InitSpec monopoly(double label) { return {Kind::monopoly, 1, label, {}}; }
  static InitSpec custom(std::vector<double> units) { return {Kind::custom, 1, 0.5, std::move(units)}; }

  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

/// Builds a configuration of n units.
///
/// competitive(K) draws K distinct labels from `base` and hands unit i to firm
/// i mod K, so that a remainder is spread round-robin over the first firms.
inline MarketConfiguration initialize(const InitSpec& spec, std::size_t n, Rng& rng, const BaseMeasure& base) {
  if (n == 0) throw ValidationError("a market needs at least one share unit");
  switch (spec.kind) {
    case InitSpec::Kind::monopoly:
      return MarketConfiguration(std::vector<FirmLabel>(n, FirmLabel(spec.label)));
    case InitSpec::Kind::custom:
      if (spec.units.size() != n) {
        throw ValidationError("custom initial configuration has " + std::to_string(spec.units.size()) +
                              " units, expected " + std::to_string(n));
      }
      return MarketConfiguration::from_values(spec.units);
    case InitSpec::Kind::competitive: {
      if (spec.firms == 0) throw ValidationError("competitive start needs at least one firm");
      if (spec.firms > n) {
        throw ValidationError("competitive start with " + std::to_string(spec.firms) + " firms exceeds n = " +
                              std::to_string(n));
      }
      std::vector<FirmLabel> labels;
      std::set<FirmLabel> seen;
      std::size_t attempts = 0;
      while (labels.size() < spec.firms) {
        if (++attempts > 1000 * spec.firms + 1000) {
          throw ValidationError("base measure cannot supply " + std::to_string(spec.firms) + " distinct labels");
        }
        const FirmLabel x = sample_base(base, rng);
        if (seen.insert(x).second) labels.push_back(x);
      }
      std::vector<FirmLabel> units(n);
      for (std::size_t i = 0; i < n; ++i) units[i] = labels[i % spec.firms];
      return MarketConfiguration(std::move(units));
    }
  }
  throw ValidationError("unknown initializer");
}

struct MarketSpec {
  std::string id;
  InitSpec init;

  friend bool operator==(const MarketSpec&, const MarketSpec&) = default;
};

/// Which iterations end up in the trace. Explicit points win over `count`.
struct RetentionPlan {
  std::size_t count = 150;
  std::vector<std::uint64_t> points;

  friend bool operator==(const RetentionPlan&, const RetentionPlan&) = default;
};

/// Roughly `count` iterations in [1, iterations], geometrically spaced, always
/// ending at `iterations`.
inline std::vector<std::uint64_t> geometric_points(std::uint64_t iterations, std::size_t count) {
  std::vector<std::uint64_t> out;
  if (count <= 1 || iterations == 1) return {iterations};
  const double top = std::log(static_cast<double>(iterations));
  for (std::size_t k = 0; k < count; ++k) {
    const double t = std::exp(top * static_cast<double>(k) / static_cast<double>(count - 1));
    auto p = static_cast<std::uint64_t>(std::llround(t));
    p = std::clamp<std::uint64_t>(p, 1, iterations);
    if (out.empty() || p > out.back()) out.push_back(p);
  }
  if (out.back() != iterations) out.push_back(iterations);
  return out;
}

inline std::vector<std::uint64_t> retention_points(const RetentionPlan& plan, std::uint64_t iterations) {
  if (plan.points.empty()) return geometric_points(iterations, plan.count);
  std::vector<std::uint64_t> out = plan.points;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (std::uint64_t p : out) {
    if (p < 1 || p > iterations) {
      throw ValidationError("retention point " + std::to_string(p) + " outside [1, " + std::to_string(iterations) +
                            "]");
    }
  }
  if (out.back() != iterations) out.push_back(iterations);
  return out;
}

enum class TimeMode { discrete, continuous };

struct EngineConfig {
  std::string name = "scenario";
  std::size_t n = 0;
  std::vector<MarketSpec> markets;
  ParameterSet params;
  Schedule schedule;
  std::uint64_t iterations = 1;
  RetentionPlan retention;
  std::uint64_t seed = 1;
  TimeMode mode = TimeMode::discrete;
  std::size_t bins = 15;

  void validate() const {
    if (n == 0) throw ValidationError("n must be at least 1");
    if (markets.empty()) throw ValidationError("at least one market is required");
    if (params.market_count() != markets.size()) {
      throw ValidationError("parameter set covers " + std::to_string(params.market_count()) + " markets, config has " +
                            std::to_string(markets.size()));
    }
    for (std::size_t a = 0; a < markets.size(); ++a) {
      if (markets[a].id.empty()) throw ValidationError("market ids must be non-empty");
      for (std::size_t b = 0; b < a; ++b) {
        if (markets[a].id == markets[b].id) throw ValidationError("duplicate market id '" + markets[a].id + "'");
      }
    }
    if (iterations < 1) throw ValidationError("iterations must be at least 1");
    if (bins < 1) throw ValidationError("bins must be at least 1");
    params.validate();
    schedule.validate(iterations);
    retention_points(retention, iterations);
    if (mode == TimeMode::continuous && !(params.poisson_rate(n) > 0.0)) {
      throw ValidationError("continuous mode needs a positive Poisson intensity");
    }
  }

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct EventCounts {
  std::uint64_t new_firm = 0;
  std::uint64_t cross = 0;
  std::uint64_t within = 0;

  std::uint64_t total() const { return new_firm + cross + within; }
  void add(Branch b) {
    switch (b) {
      case Branch::new_firm: ++new_firm; break;
      case Branch::cross: ++cross; break;
      case Branch::within: ++within; break;
    }
  }

  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

/// Summary of the system after `iteration` updates.
struct TraceRecord {
  std::uint64_t iteration = 0;
  double clock = 0.0;
  std::vector<Histogram> histograms;  // per market
  std::vector<std::size_t> firms;     // K_n per market
  std::vector<double> herfindahl;     // per market
  std::vector<double> max_share;      // per market
  EventCounts events;                 // cumulative, all markets

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::vector<std::string> market_ids;
  std::size_t n = 0;
  std::size_t bins = 15;
  std::vector<TraceRecord> records;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// One update: the removed unit and where its share went.
struct StepRecord {
  Target target;
  FirmLabel removed;
  BranchOutcome outcome;
};

/// One random-scan Gibbs update in place. Exactly one unit label is
/// rewritten; every other component is left alone.
inline StepRecord gibbs_step(SystemState& state, const ParameterSet& params, Rng& rng) {
  StepRecord rec;
  rec.target = select_target(state, params, rng);
  rec.removed = state.markets[rec.target.market].unit(rec.target.unit);
  rec.outcome = sample_full_conditional(state, rec.target.market, rec.target.unit, params, rng);
  state.markets[rec.target.market].replace(rec.target.unit, rec.outcome.label);
  ++state.iteration;
  return rec;
}

/// RNG streams derived from the root seed.
enum class Stream : std::uint64_t { initialization = 0, chain = 1, clock = 2 };

/// Drives one replica: builds the initial state, applies the schedule, steps
/// the chain and records snapshots.
///
/// The jump chain consumes only the chain stream; waiting times come from a
/// separate clock stream, so discrete and continuous runs with the same seed
/// visit the same sequence of states.
class Engine {
 public:
  explicit Engine(EngineConfig config)
      : config_(std::move(config)),
        chain_rng_(Rng::stream(config_.seed, static_cast<std::uint64_t>(Stream::chain))),
        clock_rng_(Rng::stream(config_.seed, static_cast<std::uint64_t>(Stream::clock))) {
    config_.validate();
    params_ = config_.params;
    Rng init_rng = Rng::stream(config_.seed, static_cast<std::uint64_t>(Stream::initialization));
    for (std::size_t r = 0; r < config_.markets.size(); ++r) {
      state_.market_ids.push_back(config_.markets[r].id);
      state_.markets.push_back(initialize(config_.markets[r].init, config_.n, init_rng, params_.base[r]));
    }
    state_.validate();
  }

  const EngineConfig& config() const noexcept { return config_; }
  const SystemState& state() const noexcept { return state_; }
  const ParameterSet& params() const noexcept { return params_; }
  const EventCounts& events() const noexcept { return events_; }

  /// Applies patches due before the next update, then performs it.
  StepRecord step() {
    const std::uint64_t next = state_.iteration + 1;
    while (next_patch_ < config_.schedule.entries.size() && config_.schedule.entries[next_patch_].trigger <= next) {
      params_ = apply_patch(params_, config_.schedule.entries[next_patch_].patch);
      ++next_patch_;
    }
    StepRecord rec = gibbs_step(state_, params_, chain_rng_);
    events_.add(rec.outcome.branch);
    if (config_.mode == TimeMode::continuous) state_.clock += clock_rng_.exponential(params_.poisson_rate(config_.n));
    return rec;
  }

  TraceRecord snapshot() const {
    TraceRecord rec;
    rec.iteration = state_.iteration;
    rec.clock = state_.clock;
    rec.events = events_;
    for (const auto& m : state_.markets) {
      rec.histograms.push_back(histogram(m, config_.bins));
      rec.firms.push_back(m.firm_count());
      rec.herfindahl.push_back(herfindahl(m));
      rec.max_share.push_back(max_share(m));
    }
    return rec;
  }

  /// Runs the remaining iterations and returns the retained snapshots.
  Trace run() {
    Trace trace;
    trace.market_ids = state_.market_ids;
    trace.n = config_.n;
    trace.bins = config_.bins;
    const auto points = retention_points(config_.retention, config_.iterations);
    std::size_t next_point = 0;
    while (next_point < points.size() && points[next_point] <= state_.iteration) ++next_point;
    while (state_.iteration < config_.iterations) {
      step();
      if (next_point < points.size() && points[next_point] == state_.iteration) {
        trace.records.push_back(snapshot());
        ++next_point;
      }
    }
    return trace;
  }

 private:
  EngineConfig config_;
  ParameterSet params_;
  SystemState state_;
  Rng chain_rng_;
  Rng clock_rng_;
  EventCounts events_;
  std::size_t next_patch_ = 0;
};

inline Trace run(const EngineConfig& config) { return Engine(config).run(); }

/// run() with Poisson waiting times between updates.
inline Trace continuous_run(EngineConfig config) {
  config.mode = TimeMode::continuous;
  return Engine(std::move(config)).run();
}

}  // namespace mshare
