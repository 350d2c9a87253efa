#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mshare/engine.hpp"

namespace mshare::io {

/// Final summary of one market in one replica.
struct MarketSummary {
  std::size_t firms = 0;
  double herfindahl = 0.0;
  double max_share = 0.0;
  Histogram histogram;

  friend bool operator==(const MarketSummary&, const MarketSummary&) = default;
};

struct ReplicaSummary {
  std::uint64_t seed = 0;
  std::vector<MarketSummary> markets;

  friend bool operator==(const ReplicaSummary&, const ReplicaSummary&) = default;
};

inline ReplicaSummary summarize(std::uint64_t seed, const Trace& trace) {
  ReplicaSummary s;
  s.seed = seed;
  const TraceRecord& last = trace.records.back();
  for (std::size_t r = 0; r < trace.market_ids.size(); ++r) {
    s.markets.push_back({last.firms[r], last.herfindahl[r], last.max_share[r], last.histograms[r]});
  }
  return s;
}

struct Quantiles {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;

  friend bool operator==(const Quantiles&, const Quantiles&) = default;
};

/// Type-7 (linear interpolation) sample quantiles.
inline Quantiles quantiles(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto at = [&](double q) {
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

struct SweepReport {
  std::vector<std::string> market_ids;
  std::vector<ReplicaSummary> replicas;      ///< in seed-list order
  std::vector<Quantiles> herfindahl;         ///< per market, across seeds
  std::vector<Quantiles> firms;              ///< per market, across seeds
  double concentration_threshold = 0.8;
  std::vector<double> fraction_concentrated; ///< per market: share of seeds with final H > threshold

  friend bool operator==(const SweepReport&, const SweepReport&) = default;
};

/// Runs one replica per seed (concurrently, up to `threads` at a time) and
/// aggregates the final snapshots. The report does not depend on scheduling.
inline SweepReport sweep(const EngineConfig& base, const std::vector<std::uint64_t>& seeds,
                         double concentration_threshold = 0.8, unsigned threads = 0) {
  if (seeds.empty()) throw ValidationError("sweep needs at least one seed");
  base.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(seeds.size()));

  std::vector<ReplicaSummary> results(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        EngineConfig cfg = base;
        cfg.seed = seeds[k];
        results[k] = summarize(seeds[k], run(cfg));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepReport rep;
  for (const auto& m : base.markets) rep.market_ids.push_back(m.id);
  rep.replicas = std::move(results);
  rep.concentration_threshold = concentration_threshold;
  for (std::size_t r = 0; r < rep.market_ids.size(); ++r) {
    std::vector<double> h, k;
    std::size_t concentrated = 0;
    for (const auto& rs : rep.replicas) {
      h.push_back(rs.markets[r].herfindahl);
      k.push_back(static_cast<double>(rs.markets[r].firms));
      if (rs.markets[r].herfindahl > concentration_threshold) ++concentrated;
    }
    rep.herfindahl.push_back(quantiles(h));
    rep.firms.push_back(quantiles(k));
    rep.fraction_concentrated.push_back(static_cast<double>(concentrated) / static_cast<double>(rep.replicas.size()));
  }
  return rep;
}

inline nlohmann::ordered_json to_json(const SweepReport& rep) {
  using nlohmann::ordered_json;
  auto q = [](const Quantiles& x) {
    return ordered_json{{"min", x.min}, {"q25", x.q25}, {"median", x.median}, {"q75", x.q75}, {"max", x.max}};
  };
  ordered_json j;
  j["concentration_threshold"] = rep.concentration_threshold;
  ordered_json markets = ordered_json::array();
  for (std::size_t r = 0; r < rep.market_ids.size(); ++r) {
    markets.push_back({{"id", rep.market_ids[r]},
                       {"herfindahl", q(rep.herfindahl[r])},
                       {"firms", q(rep.firms[r])},
                       {"fraction_concentrated", rep.fraction_concentrated[r]}});
  }
  j["markets"] = markets;
  ordered_json replicas = ordered_json::array();
  for (const auto& rs : rep.replicas) {
    ordered_json per = ordered_json::array();
    for (std::size_t r = 0; r < rs.markets.size(); ++r) {
      per.push_back({{"id", rep.market_ids[r]},
                     {"K_n", rs.markets[r].firms},
                     {"herfindahl", rs.markets[r].herfindahl},
                     {"max_share", rs.markets[r].max_share},
                     {"histogram", rs.markets[r].histogram.counts}});
    }
    replicas.push_back({{"seed", rs.seed}, {"markets", per}});
  }
  j["replicas"] = replicas;
  return j;
}

}  // namespace mshare::io
