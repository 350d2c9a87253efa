#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mshare/dynamics.hpp"
#include "mshare/oracle.hpp"

namespace mshare::io {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t cap = oracle::kDefaultCap;
  bool include_moments = true;
  std::uint64_t moment_seed = 1;
};

namespace detail {

inline CheckResult guarded(const std::string& name, double tolerance, const std::function<CheckResult()>& body) {
  try {
    CheckResult r = body();
    r.name = name;
    r.tolerance = tolerance;
    return r;
  } catch (const std::exception& e) {
    return {name, std::nan(""), tolerance, false, e.what()};
  }
}

inline CheckResult at_most(double value, double tolerance, std::string detail = {}) {
  return {"", value, tolerance, value <= tolerance, std::move(detail)};
}

}  // namespace detail

/// The exact-oracle checks behind `validate`. Each result passes iff its value
/// is within tolerance.
inline std::vector<CheckResult> run_validation(const ValidationOptions& opt = {}) {
  using namespace oracle;
  using detail::at_most;
  using detail::guarded;
  std::vector<CheckResult> out;

  out.push_back(guarded("exact_joint_two_atoms", 1e-12, [&] {
    const auto p = exact_joint(FiniteInstance::uniform(2, 2, 1.0), opt.cap);
    // states: (a,a)=0, (b,a)=1, (a,b)=2, (b,b)=3
    const double err = std::max({std::abs(p[0] - 0.375), std::abs(p[3] - 0.375), std::abs(p[1] - 0.125),
                                 std::abs(p[2] - 0.125)});
    return at_most(err, 1e-12);
  }));

  out.push_back(guarded("marginal_invariance_grid", 1e-12, [&] {
    double worst = 0.0;
    for (std::size_t atoms : {2, 3}) {
      for (std::size_t n : {2, 3}) {
        for (double theta : {0.5, 1.0, 5.0}) {
          worst = std::max(worst, check_lemma1(FiniteInstance::uniform(atoms, n, theta), opt.cap));
        }
      }
    }
    return at_most(worst, 1e-12, "atoms x n x theta in {2,3} x {2,3} x {0.5,1,5}");
  }));

  auto gibbs = [&](std::vector<double> beta) {
    FiniteInstance inst = FiniteInstance::uniform(3, 3, 1.0);
    inst.beta = std::move(beta);
    const auto pi = exact_joint(inst, opt.cap);
    const auto t = transition_matrix(inst, RemovalPolicy{}, opt.cap);
    return std::max({stationarity_error(pi, t), detailed_balance_error(pi, t), row_sum_error(t)});
  };
  out.push_back(guarded("gibbs_reversibility_unit_beta", 1e-10, [&] { return at_most(gibbs({}), 1e-10); }));
  out.push_back(guarded("gibbs_reversibility_beta_table", 1e-10,
                        [&] { return at_most(gibbs({2.0, 1.0, 1.0}), 1e-10, "beta = (2, 1, 1)"); }));

  out.push_back(guarded("one_step_drift", 1e-12, [&] {
    double worst = 0.0;
    bool signs = true;
    for (double theta : {0.0, 1.0}) {
      const auto rep = one_step_drift_check(FiniteInstance::uniform(2, 3, theta), {true, false}, opt.cap);
      worst = std::max(worst, rep.max_discrepancy);
      signs = signs && rep.sign_consistent;
    }
    CheckResult r = at_most(worst, 1e-12, signs ? "drift sign consistent" : "drift sign violated");
    r.passed = r.passed && signs;
    return r;
  }));

  out.push_back(guarded("normalizer_closed_forms", 1e-12, [&] {
    Rng rng(opt.moment_seed + 17);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t markets = 1 + rng.index(3);
      const std::size_t n = 2 + rng.index(20);
      SystemState s;
      for (std::size_t r = 0; r < markets; ++r) {
        std::vector<double> units(n);
        for (auto& u : units) u = rng.uniform();
        s.market_ids.push_back("m" + std::to_string(r));
        s.markets.push_back(MarketConfiguration::from_values(units));
      }
      ParameterSet p = ParameterSet::homogeneous(markets, 10.0 * rng.uniform(), rng.uniform(), BetaBase{2.0, 3.0});
      const std::size_t r = rng.index(markets);
      const std::size_t i = rng.index(n);
      const double unit_q = normalizer(s, r, i, p);
      if (unit_q != p.theta[r] + static_cast<double>(n - 1)) return CheckResult{"", 1.0, 0.0, false, "unit normalizer differs from theta + n - 1"};
      p.selection = IdentitySelection{};
      const BranchTerms t = branch_terms(s, r, i, p);
      worst = std::max(worst, std::abs(normalizer(s, r, i, p) - t.total()) / std::max(1.0, t.total()));
    }
    return at_most(worst, 1e-12, "identity beta closed form vs term sum, 100 random states");
  }));

  if (opt.include_moments) {
    MomentCheckConfig cfg;
    cfg.seed = opt.moment_seed;
    std::optional<MomentReport> rep;
    std::string failure;
    try {
      rep = stationary_moment_check(cfg);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    if (rep) {
      CheckResult mean = at_most(rep->mean_error, 0.01, "mean " + std::to_string(rep->mean) + " vs 0.3");
      if (!rep->warning.empty()) mean.detail += "; " + rep->warning;
      mean.name = "stationary_mean";
      mean.tolerance = 0.01;
      out.push_back(mean);
      CheckResult var = at_most(rep->relative_variance_error, 0.10,
                                "variance " + std::to_string(rep->variance) + " vs " +
                                    std::to_string(rep->target_variance));
      var.name = "stationary_variance_relative";
      var.tolerance = 0.10;
      out.push_back(var);
    } else {
      out.push_back({"stationary_mean", std::nan(""), 0.01, false, failure});
      out.push_back({"stationary_variance_relative", std::nan(""), 0.10, false, failure});
    }
  }
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

inline nlohmann::ordered_json to_json(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json j;
  j["passed"] = all_passed(results);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    nlohmann::ordered_json c;
    c["name"] = r.name;
    if (std::isfinite(r.value)) c["value"] = r.value;
    else c["value"] = nullptr;
    c["tolerance"] = r.tolerance;
    c["passed"] = r.passed;
    c["detail"] = r.detail;
    arr.push_back(c);
  }
  j["checks"] = arr;
  return j;
}

}  // namespace mshare::io
