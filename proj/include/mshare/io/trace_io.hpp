#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mshare/engine.hpp"
#include "mshare/io/kv_document.hpp"
#include "mshare/io/scenario.hpp"

namespace mshare::io {

/// CSV: one row per (record, market).
inline std::string trace_csv(const Trace& trace) {
  std::ostringstream os;
  os << "iteration,clock,market";
  for (std::size_t b = 0; b < trace.bins; ++b) os << ",bin_" << b;
  os << ",K_n,herfindahl,max_share,events_new,events_cross,events_within\n";
  for (const auto& rec : trace.records) {
    for (std::size_t r = 0; r < trace.market_ids.size(); ++r) {
      os << rec.iteration << ',' << format_number(rec.clock) << ',' << trace.market_ids[r];
      for (std::size_t c : rec.histograms[r].counts) os << ',' << c;
      os << ',' << rec.firms[r] << ',' << format_number(rec.herfindahl[r]) << ',' << format_number(rec.max_share[r])
         << ',' << rec.events.new_firm << ',' << rec.events.cross << ',' << rec.events.within << '\n';
    }
  }
  return os.str();
}

/// Metadata sidecar: the resolved configuration, its scenario text and the seed.
inline nlohmann::ordered_json trace_metadata(const Trace& trace, const EngineConfig& cfg) {
  using nlohmann::ordered_json;
  const ParameterSet& p = cfg.params;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["n"] = cfg.n;
  j["iterations"] = cfg.iterations;
  j["bins"] = trace.bins;
  j["mode"] = cfg.mode == TimeMode::continuous ? "continuous" : "discrete";
  j["poisson_rate"] = p.poisson_rate(cfg.n);
  j["removal"] = to_string(p.removal.kind);
  if (p.removal.kind == RemovalPolicy::Kind::antitrust) {
    j["antitrust_threshold"] = p.removal.threshold;
    j["antitrust_inner"] = to_string(p.removal.inner);
  }
  ordered_json markets = ordered_json::array();
  for (std::size_t r = 0; r < cfg.markets.size(); ++r) {
    ordered_json m;
    m["id"] = cfg.markets[r].id;
    m["theta"] = p.theta[r];
    m["pi"] = p.pi[r];
    if (const auto* beta = std::get_if<BetaBase>(&p.base[r])) {
      m["base"] = {{"kind", "beta"}, {"a", beta->a}, {"b", beta->b}};
    } else {
      const auto& d = std::get<DiscreteBase>(p.base[r]);
      m["base"] = {{"kind", "discrete"}, {"atoms", d.atoms}, {"weights", d.weights}};
    }
    markets.push_back(m);
  }
  j["markets"] = markets;
  j["market_weights"] = p.market_weights;
  j["migration"] = p.migration.entries;
  ordered_json schedule = ordered_json::array();
  for (const auto& sp : cfg.schedule.entries) schedule.push_back(sp.trigger);
  j["schedule_triggers"] = schedule;
  j["records"] = trace.records.size();
  j["scenario"] = serialize_scenario(cfg);
  return j;
}

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string shade(double v) {
  v = std::clamp(v, 0.0, 1.0);
  auto channel = [&](int lo) { return static_cast<int>(std::lround(255.0 - v * (255.0 - lo))); };
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(8), channel(48), channel(107));
  return buf;
}

}  // namespace detail

/// Heatmap of bin shares over log10(iteration), one panel per market.
inline std::string trace_svg(const Trace& trace) {
  using detail::fixed2;
  constexpr double panel_w = 480.0, panel_h = 240.0, margin = 40.0, gap = 30.0;
  const std::size_t markets = trace.market_ids.size();
  const double width = margin * 2.0 + panel_w * static_cast<double>(markets) + gap * static_cast<double>(markets - 1);
  const double height = margin * 2.0 + panel_h;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed2(width) << "\" height=\"" << fixed2(height)
     << "\" viewBox=\"0 0 " << fixed2(width) << ' ' << fixed2(height) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << fixed2(width) << "\" height=\"" << fixed2(height) << "\" fill=\"#ffffff\"/>\n";
  if (trace.records.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  const double lo = std::log10(static_cast<double>(std::max<std::uint64_t>(trace.records.front().iteration, 1)));
  double hi = std::log10(static_cast<double>(std::max<std::uint64_t>(trace.records.back().iteration, 1)));
  if (hi <= lo) hi = lo + 1.0;
  // The last record gets a column as wide as the average one.
  const double extent = hi - lo + (hi - lo) / static_cast<double>(trace.records.size());
  const double n = static_cast<double>(trace.n);
  const double cell_h = panel_h / static_cast<double>(trace.bins);
  auto log_iter = [](std::uint64_t it) { return std::log10(static_cast<double>(std::max<std::uint64_t>(it, 1))); };

  for (std::size_t r = 0; r < markets; ++r) {
    const double x0 = margin + static_cast<double>(r) * (panel_w + gap);
    auto x_of = [&](double t) { return x0 + (t - lo) / extent * panel_w; };
    os << "<g id=\"market-" << trace.market_ids[r] << "\">\n";
    os << "<text x=\"" << fixed2(x0) << "\" y=\"" << fixed2(margin - 12.0)
       << "\" font-family=\"sans-serif\" font-size=\"12\">market " << trace.market_ids[r] << "</text>\n";
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
      const auto& rec = trace.records[k];
      const double xa = x_of(log_iter(rec.iteration));
      const double xb = k + 1 < trace.records.size() ? x_of(log_iter(trace.records[k + 1].iteration)) : x0 + panel_w;
      for (std::size_t b = 0; b < trace.bins; ++b) {
        const double share = static_cast<double>(rec.histograms[r].counts[b]) / n;
        if (share == 0.0) continue;
        const double y = margin + panel_h - static_cast<double>(b + 1) * cell_h;
        os << "<rect x=\"" << fixed2(xa) << "\" y=\"" << fixed2(y) << "\" width=\"" << fixed2(std::max(xb - xa, 0.5))
           << "\" height=\"" << fixed2(cell_h) << "\" fill=\"" << detail::shade(share) << "\"/>\n";
      }
    }
    os << "<rect x=\"" << fixed2(x0) << "\" y=\"" << fixed2(margin) << "\" width=\"" << fixed2(panel_w)
       << "\" height=\"" << fixed2(panel_h) << "\" fill=\"none\" stroke=\"#000000\"/>\n";
    os << "<text x=\"" << fixed2(x0 + panel_w / 2.0) << "\" y=\"" << fixed2(margin + panel_h + 28.0)
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">log10 iteration</text>\n";
    for (int decade = static_cast<int>(std::ceil(lo)); decade <= static_cast<int>(std::floor(hi)); ++decade) {
      os << "<text x=\"" << fixed2(x_of(decade)) << "\" y=\"" << fixed2(margin + panel_h + 14.0)
         << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << decade << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

struct EmitOptions {
  bool csv = true;
  bool json = true;
  bool svg = true;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Writes <dir>/<stem>.csv, .json and .svg. Returns the paths written.
inline std::vector<std::filesystem::path> emit_trace(const Trace& trace, const EngineConfig& cfg,
                                                     const std::filesystem::path& dir, const std::string& stem,
                                                     EmitOptions options = {}) {
  if (trace.records.empty()) throw ValidationError("cannot emit an empty trace");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  if (options.csv) {
    written.push_back(dir / (stem + ".csv"));
    write_text_file(written.back(), trace_csv(trace));
  }
  if (options.json) {
    written.push_back(dir / (stem + ".json"));
    write_text_file(written.back(), trace_metadata(trace, cfg).dump(2) + "\n");
  }
  if (options.svg) {
    written.push_back(dir / (stem + ".svg"));
    write_text_file(written.back(), trace_svg(trace));
  }
  return written;
}

}  // namespace mshare::io
