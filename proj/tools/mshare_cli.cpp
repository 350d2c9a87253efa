#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mshare/io/scenario.hpp"
#include "mshare/io/sweep.hpp"
#include "mshare/io/trace_io.hpp"
#include "mshare/io/validation.hpp"
#include "mshare/mshare.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mshare::IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

mshare::EngineConfig load(const std::string& path) {
  try {
    return mshare::io::parse_scenario(read_file(path));
  } catch (const mshare::io::ParseError& e) {
    throw mshare::ValidationError(path + ":" + std::to_string(e.line()) + ": " +
                                  std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw mshare::ValidationError("bad seed '" + s + "'");
  return v;
}

/// "a..b" (inclusive) or a comma-separated list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::uint64_t a = parse_u64(text.substr(0, dots));
    const std::uint64_t b = parse_u64(text.substr(dots + 2));
    if (b < a) throw mshare::ValidationError("empty seed range '" + text + "'");
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) seeds.push_back(parse_u64(piece));
  if (seeds.empty()) throw mshare::ValidationError("no seeds given");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interacting Polya-urn market share simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::size_t bins = 0;
  app.add_option("--bins", bins, "histogram bins (default: scenario value, 15)");

  auto* run_cmd = app.add_subcommand("run", "simulate one replica and write CSV/JSON/SVG");
  std::string scenario;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir = ".";
  bool continuous = false;
  run_cmd->add_option("scenario", scenario, "scenario file")->required();
  run_cmd->add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) { seed_given = true; });
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_flag("--continuous", continuous, "embed the chain in continuous time");

  auto* sweep_cmd = app.add_subcommand("sweep", "run one replica per seed and aggregate final summaries");
  std::string sweep_scenario, seeds_text, sweep_out;
  double threshold = 0.8;
  unsigned threads = 0;
  sweep_cmd->add_option("scenario", sweep_scenario, "scenario file")->required();
  sweep_cmd->add_option("--seeds", seeds_text, "seed range a..b or list a,b,c")->required();
  sweep_cmd->add_option("--threshold", threshold, "Herfindahl level counted as concentrated");
  sweep_cmd->add_option("--threads", threads, "worker threads (0: hardware concurrency)");
  sweep_cmd->add_option("--out", sweep_out, "write the report to this JSON file");

  auto* validate_cmd = app.add_subcommand("validate", "run the exact-oracle checks");
  std::uint64_t cap = mshare::oracle::kDefaultCap;
  bool quick = false;
  std::string report_path;
  validate_cmd->add_option("--cap", cap, "enumeration cap (entries)");
  validate_cmd->add_flag("--quick", quick, "skip the Monte Carlo moment check");
  validate_cmd->add_option("--report", report_path, "also write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      mshare::EngineConfig cfg = load(scenario);
      if (seed_given) cfg.seed = seed;
      if (bins > 0) cfg.bins = bins;
      if (continuous) cfg.mode = mshare::TimeMode::continuous;
      const mshare::Trace trace = mshare::run(cfg);
      const std::string stem = cfg.name + "_seed" + std::to_string(cfg.seed);
      for (const auto& p : mshare::io::emit_trace(trace, cfg, out_dir, stem)) std::cout << p.string() << "\n";
      const auto& last = trace.records.back();
      for (std::size_t r = 0; r < trace.market_ids.size(); ++r) {
        std::cout << "market " << trace.market_ids[r] << ": K_n=" << last.firms[r]
                  << " herfindahl=" << mshare::io::format_number(last.herfindahl[r]) << "\n";
      }
      return 0;
    }
    if (*sweep_cmd) {
      mshare::EngineConfig cfg = load(sweep_scenario);
      if (bins > 0) cfg.bins = bins;
      const auto report = mshare::io::sweep(cfg, parse_seeds(seeds_text), threshold, threads);
      const std::string text = mshare::io::to_json(report).dump(2) + "\n";
      if (!sweep_out.empty()) mshare::io::write_text_file(sweep_out, text);
      std::cout << text;
      return 0;
    }
    if (*validate_cmd) {
      mshare::io::ValidationOptions opt;
      opt.cap = cap;
      opt.include_moments = !quick;
      const auto results = mshare::io::run_validation(opt);
      const std::string text = mshare::io::to_json(results).dump(2) + "\n";
      if (!report_path.empty()) mshare::io::write_text_file(report_path, text);
      std::cout << text;
      return mshare::io::all_passed(results) ? 0 : 1;
    }
  } catch (const mshare::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
