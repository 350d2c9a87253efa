#include <iostream>

#include "mshare/mshare.hpp"

int main() {
  mshare::EngineConfig cfg;
  cfg.name = "two_market_sample";
  cfg.n = 100;
  cfg.iterations = 20000;
  cfg.seed = 7;
  cfg.markets = {{"a", mshare::InitSpec::competitive(10)}, {"b", mshare::InitSpec::competitive(10)}};
  cfg.params = mshare::ParameterSet::homogeneous(2, 1.0, 0.5, mshare::BetaBase{1.0, 1.0});
  const mshare::Trace trace = mshare::run(cfg);
  const auto& last = trace.records.back();
  for (std::size_t r = 0; r < trace.market_ids.size(); ++r) {
    std::cout << trace.market_ids[r] << ": firms=" << last.firms[r] << " herfindahl=" << last.herfindahl[r] << "\n";
  }
}
